#include "doctest.h"

#include <cmath>
#include <complex>
#include <functional>
#include <string>
#include <vector>

#include "spike/algorithms.hpp"
#include "spike/complex_matrix.hpp"
#include "spike/ensembles.hpp"
#include "spike/errors.hpp"
#include "spike/query_model.hpp"

using namespace spike;

namespace {

std::string error_code(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  return "";
}

CVector uniform_unit(std::size_t d) {
  CVector v(d, cdouble(1.0 / std::sqrt(static_cast<double>(d))));
  return v;
}

CVector random_unit(std::size_t d, Seed seed) {
  Rng rng(seed);
  CVector v(d);
  for (auto& z : v) z = cdouble(rng.gaussian(), rng.gaussian());
  double n = norm2(v);
  for (auto& z : v) z /= n;
  return v;
}

}  // namespace

TEST_CASE("one identity step is a fixed point with zero residual") {
  CVector v0 = random_unit(9, Seed{200, 0});
  PowerMethodResult res = power_method(ComplexMatrix::identity(9), v0, 1,
                                       PowerMethodTarget::fixed());
  CHECK(res.iterations == 1);
  CHECK(res.queries_used == 1);
  REQUIRE(res.residual_history.size() == 1);
  CHECK(res.residual_history[0] < 1e-14);
  for (std::size_t i = 0; i < 9; ++i)
    CHECK(std::abs(res.iterate[i] - v0[i]) < 1e-14);
}

TEST_CASE("the iteration bound matches its closed form") {
  CHECK(power_method_iteration_bound(1.0, 1000.0, 1e-2, 0.1) ==
        doctest::Approx(115.89787797450055).epsilon(1e-4));

  // Doubling kappa shifts the bound by exactly ln 2 over the rate log.
  const double b1 = power_method_iteration_bound(2.0, 500.0, 1e-3, 0.25);
  const double b2 = power_method_iteration_bound(4.0, 500.0, 1e-3, 0.25);
  CHECK(b2 - b1 ==
        doctest::Approx(std::log(2.0) / std::log(1.0 / 0.75)).epsilon(1e-12));

  // Larger gap means fewer iterations.
  double prev = power_method_iteration_bound(1.0, 100.0, 1e-2, 0.05);
  for (double gap : {0.1, 0.2, 0.4}) {
    double b = power_method_iteration_bound(1.0, 100.0, 1e-2, gap);
    CHECK(b < prev);
    prev = b;
  }

  CHECK(error_code([] {
          power_method_iteration_bound(0.5, 10.0, 1e-2, 0.1);
        }) == "invalid-region");
  CHECK(error_code([] {
          power_method_iteration_bound(1.0, 10.0, 1.5, 0.1);
        }) == "invalid-epsilon");
  CHECK(error_code([] {
          power_method_iteration_bound(1.0, 10.0, 1e-2, 1.0);
        }) == "invalid-gap");
}

TEST_CASE("the diagonal example is exactly diag(1, 1-gap, ...)") {
  ComplexMatrix a = example1_matrix(3, 0.5);
  for (std::size_t i = 0; i < 3; ++i)
    for (std::size_t j = 0; j < 3; ++j) {
      cdouble want = 0.0;
      if (i == j) want = i == 0 ? 1.0 : 0.5;
      CHECK(a(i, j) == want);
    }
  CHECK(error_code([] { example1_matrix(0, 0.5); }) == "invalid-dimension");
  CHECK(error_code([] { example1_matrix(3, 1.0); }) == "invalid-gap");
}

TEST_CASE("the skewed example degenerates to a diagonal at theta zero") {
  ComplexMatrix a = example2_matrix(0.0, 0.3);
  CHECK(a(0, 0) == cdouble(1.0));
  CHECK(a(0, 1) == cdouble(0.0));
  CHECK(std::abs(a(1, 0)) < 1e-15);
  CHECK(a(1, 1) == cdouble(0.3 - 1.0));
  CHECK(example2_condition_number(0.0) == doctest::Approx(1.0));
}

TEST_CASE("the skewed example's condition number and its singular edge") {
  const double kPi = 3.141592653589793;
  CHECK(example2_condition_number(kPi / 3.0) ==
        doctest::Approx(13.928203230275503).epsilon(1e-6));
  CHECK(error_code([&] { example2_condition_number(kPi / 2.0); }) ==
        "singular-eigenbasis");
  CHECK(error_code([&] { example2_matrix(kPi / 2.0, 0.1); }) ==
        "singular-eigenbasis");
  CHECK(error_code([&] { example2_matrix(-0.1, 0.1); }) == "invalid-region");
}

TEST_CASE("the skewed example has the advertised eigenstructure") {
  const double kPi = 3.141592653589793;
  const double theta = kPi / 3.0, gap = 0.1;
  ComplexMatrix a = example2_matrix(theta, gap);
  // Eigenpairs (1, Sigma e1) and (gap - 1, Sigma e2).
  const double s = std::sin(theta), c = std::cos(theta);
  CVector u1 = {cdouble(1.0), cdouble(s)};
  CVector u2 = {cdouble(0.0), cdouble(c)};
  for (int which = 0; which < 2; ++which) {
    const CVector& u = which == 0 ? u1 : u2;
    const double lam = which == 0 ? 1.0 : gap - 1.0;
    for (std::size_t i = 0; i < 2; ++i) {
      cdouble img = a(i, 0) * u[0] + a(i, 1) * u[1];
      CHECK(std::abs(img - lam * u[i]) < 1e-14);
    }
  }
}

TEST_CASE("power iteration on the diagonal example converges within bound") {
  const std::size_t d = 200;
  const double gap = 0.1, eps = 1e-2;
  const double bound = power_method_iteration_bound(1.0, d, eps, gap);
  const std::size_t iters = static_cast<std::size_t>(std::ceil(2.0 * bound));
  ComplexMatrix a = example1_matrix(d, gap);
  PowerMethodResult res = power_method(a, uniform_unit(d), iters,
                                       PowerMethodTarget::fixed());
  CHECK(res.iterations == iters);
  CHECK(std::abs(norm2(res.iterate) - 1.0) < 1e-12);
  CHECK(std::abs(res.iterate[0]) >= 1.0 - eps);
}

TEST_CASE("power iteration survives the skewed eigenbasis within bound") {
  const double kPi = 3.141592653589793;
  const double theta = kPi / 3.0, gap = 0.1, eps = 1e-2;
  const double kappa = example2_condition_number(theta);
  const std::size_t iters = static_cast<std::size_t>(
      std::ceil(power_method_iteration_bound(kappa, 2.0, eps, gap)));
  ComplexMatrix a = example2_matrix(theta, gap);
  CVector v0 = {cdouble(1.0 / std::sqrt(2.0)), cdouble(1.0 / std::sqrt(2.0))};
  PowerMethodResult res =
      power_method(a, v0, iters, PowerMethodTarget::fixed());
  CVector u = {cdouble(1.0), cdouble(std::sin(theta))};
  double n = norm2(u);
  for (auto& z : u) z /= n;
  const double align = std::abs(dot(res.iterate, u));
  // Phase-minimal distance at most sqrt(eps).
  CHECK(std::sqrt(2.0 * (1.0 - align)) <= std::sqrt(eps));
}

TEST_CASE("the residual target stops the run early") {
  ComplexMatrix a = example1_matrix(60, 0.5);
  PowerMethodResult res = power_method(a, uniform_unit(60), 500,
                                       PowerMethodTarget::residual(1e-10));
  CHECK(res.iterations < 500);
  CHECK(res.residual_history.back() <= 1e-10);
  CHECK(res.residual_history.size() == res.iterations);
}

TEST_CASE("residuals decay monotonically on the diagonal example") {
  ComplexMatrix a = example1_matrix(50, 0.3);
  PowerMethodResult res = power_method(a, uniform_unit(50), 120,
                                       PowerMethodTarget::fixed());
  for (std::size_t t = 10; t + 1 < res.residual_history.size(); ++t)
    CHECK(res.residual_history[t + 1] <=
          res.residual_history[t] * (1.0 + 1e-9));
}

TEST_CASE("the observer can stop the iteration") {
  ComplexMatrix a = example1_matrix(30, 0.2);
  std::size_t seen = 0;
  PowerMethodResult res = power_method(
      a, uniform_unit(30), 100, PowerMethodTarget::fixed(),
      [&seen](std::size_t t, const CVector&) {
        seen = t;
        return t >= 7;
      });
  CHECK(res.iterations == 7);
  CHECK(seen == 7);
}

TEST_CASE("oracle-driven power iteration spends exactly its iterations") {
  DeformedSpec spec;
  spec.d = 80;
  spec.r = 1;
  spec.lambdas = {cdouble(2.0)};
  spec.shape = Shape::hermitian_spike;
  spec.seed = Seed{202, 0};
  QueryOracle oracle(build_planted(spec), QueryMode::one_side, 100);
  const std::size_t before = oracle.used();
  PowerMethodResult res = power_method(oracle, uniform_unit(80), 12,
                                       PowerMethodTarget::fixed());
  CHECK(res.queries_used == 12);
  CHECK(oracle.used() - before == 12);
  CHECK(oracle.ledger().rounds() == 12);
  CHECK(std::abs(norm2(res.iterate) - 1.0) < 1e-12);

  QueryOracle tight(build_planted(spec), QueryMode::one_side, 3);
  CHECK(error_code([&] {
          power_method(tight, uniform_unit(80), 10,
                       PowerMethodTarget::fixed());
        }) == "query-budget-exceeded");
}

TEST_CASE("a vanishing image raises degenerate-iterate") {
  ComplexMatrix zero(5, 5);
  CHECK(error_code([&] {
          power_method(zero, uniform_unit(5), 3, PowerMethodTarget::fixed());
        }) == "degenerate-iterate");
}

TEST_CASE("the random-query baseline is deterministic in its seed") {
  ComplexMatrix m = sample_iid(40, EntryLaw::complex_gaussian, Seed{203, 0});
  QueryOracle o1(m, QueryMode::one_side, 10);
  QueryOracle o2(m, QueryMode::one_side, 10);
  CVector a = random_query_baseline(o1, 6, Seed{204, 0});
  CVector b = random_query_baseline(o2, 6, Seed{204, 0});
  REQUIRE(a.size() == b.size());
  for (std::size_t i = 0; i < a.size(); ++i) CHECK(a[i] == b[i]);
  CHECK(o1.used() == 6);

  QueryOracle o3(m, QueryMode::one_side, 10);
  CVector c = random_query_baseline(o3, 6, Seed{204, 1});
  double diff = 0.0;
  for (std::size_t i = 0; i < c.size(); ++i)
    diff = std::max(diff, std::abs(a[i] - c[i]));
  CHECK(diff > 1e-8);
}

TEST_CASE("a full-dimension baseline saturates the overlap potential") {
  const std::size_t d = 20;
  ComplexMatrix m = sample_iid(d, EntryLaw::complex_gaussian, Seed{205, 0});
  QueryOracle oracle(m, QueryMode::one_side, d + 1);
  random_query_baseline(oracle, d, Seed{205, 1});
  CVector u = random_unit(d, Seed{205, 2});
  CHECK(oracle.ledger().overlap_potential(u) ==
        doctest::Approx(1.0).epsilon(1e-10));
}

TEST_CASE("baseline outputs respect the query-bound invariants") {
  DeformedSpec spec;
  spec.d = 500;
  spec.r = 1;
  spec.lambdas = {cdouble(2.0)};
  spec.shape = Shape::hermitian_spike;
  ThresholdSchedule sched = ThresholdSchedule::from_gap(0.5, 0.1, spec.d);
  const std::size_t rounds = 5;
  for (std::uint64_t trial = 0; trial < 20; ++trial) {
    spec.seed = Seed{206, trial};
    PlantedInstance inst = build_planted(spec);
    QueryOracle oracle(inst, QueryMode::one_side, rounds + 1);
    CVector u(spec.d);
    for (std::size_t i = 0; i < spec.d; ++i)
      u[i] = oracle.truth(TruthGrant::key()).truth.columns(i, 0);
    CVector vhat = random_query_baseline(oracle, rounds, Seed{207, trial});
    const double phi = oracle.ledger().overlap_potential(u);
    CHECK(phi >= -1e-12);
    CHECK(phi <= 1.0 + 1e-10);
    CHECK(phi <= overlap_bound(sched, rounds));
    CHECK(phi - std::norm(dot(vhat, u)) >= -1e-10);
    CHECK(oracle.ledger().basis_width() <= 2 * rounds + 2);
  }
}

TEST_CASE("baseline rejects empty and oversized spans") {
  ComplexMatrix m = sample_iid(10, EntryLaw::complex_gaussian, Seed{208, 0});
  QueryOracle oracle(m, QueryMode::one_side, 30);
  CHECK(error_code([&] {
          random_query_baseline(oracle, 0, Seed{208, 1});
        }) == "invalid-index");
  CHECK(error_code([&] {
          random_query_baseline(oracle, 11, Seed{208, 1});
        }) == "invalid-dimension");
}
