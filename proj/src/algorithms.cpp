#include "spike/algorithms.hpp"

#include <cmath>
#include <utility>

#include "spike/errors.hpp"
#include "spike/kernels.hpp"
#include "spike/linalg.hpp"

namespace spike {

namespace {

constexpr double kPi = 3.141592653589793;

using ApplyFn = std::function<CVector(const CVector&)>;

PowerMethodResult run_power_method(const ApplyFn& apply, const CVector& v0,
                                   std::size_t max_iters,
                                   PowerMethodTarget target,
                                   const PowerMethodObserver& observer) {
  if (max_iters == 0) fail("invalid-index", "max_iters must be >= 1");
  if (std::abs(norm2(v0) - 1.0) > 1e-8)
    fail("invalid-query", "v0 must be unit norm within 1e-8");
  PowerMethodResult res;
  CVector v = v0;
  for (std::size_t t = 1; t <= max_iters; ++t) {
    CVector w = apply(v);
    cdouble rho = 0.0;
    for (std::size_t i = 0; i < v.size(); ++i) rho += std::conj(v[i]) * w[i];
    double rnorm = 0.0;
    for (std::size_t i = 0; i < v.size(); ++i)
      rnorm += std::norm(w[i] - rho * v[i]);
    res.residual_history.push_back(std::sqrt(rnorm));
    res.iterations = t;
    res.queries_used = t;
    const double wn = norm2(w);
    if (!(wn > 0.0) || !std::isfinite(wn))
      fail("degenerate-iterate", "matrix image of the iterate vanished");
    for (cdouble& c : w) c /= wn;
    v = std::move(w);
    res.iterate = v;
    if (target.kind == PowerMethodTarget::Kind::residual &&
        res.residual_history.back() <= target.eta)
      break;
    if (observer && observer(t, v)) break;
  }
  return res;
}

}  // namespace

PowerMethodResult power_method(const ComplexMatrix& a, const CVector& v0,
                               std::size_t max_iters, PowerMethodTarget target,
                               const PowerMethodObserver& observer) {
  if (!a.square() || a.rows != v0.size())
    fail("invalid-dimension", "matrix/vector dimension mismatch");
  return run_power_method(
      [&a](const CVector& v) { return matvec(a, v); }, v0, max_iters, target,
      observer);
}

PowerMethodResult power_method(QueryOracle& oracle, const CVector& v0,
                               std::size_t max_iters, PowerMethodTarget target,
                               const PowerMethodObserver& observer) {
  if (oracle.dimension() != v0.size())
    fail("invalid-dimension", "oracle/vector dimension mismatch");
  return run_power_method(
      [&oracle](const CVector& v) { return oracle.query(v).w; }, v0,
      max_iters, target, observer);
}

double power_method_iteration_bound(double kappa, double d, double epsilon,
                                    double gap) {
  if (!(kappa >= 1.0)) fail("invalid-region", "kappa must be >= 1");
  if (!(d >= 1.0)) fail("invalid-dimension", "d must be >= 1");
  if (!(epsilon > 0.0) || !(epsilon < 1.0))
    fail("invalid-epsilon", "epsilon must lie in (0, 1)");
  if (!(gap > 0.0) || !(gap < 1.0)) fail("invalid-gap", "gap must lie in (0, 1)");
  return (std::log(kappa * d) + std::log(2.0 / epsilon + 1.0)) /
         std::log(1.0 / (1.0 - gap));
}

ComplexMatrix example1_matrix(std::size_t d, double gap) {
  if (d == 0) fail("invalid-dimension", "d must be >= 1");
  if (!(gap > 0.0) || !(gap < 1.0)) fail("invalid-gap", "gap must lie in (0, 1)");
  ComplexMatrix a(d, d);
  a(0, 0) = 1.0;
  for (std::size_t i = 1; i < d; ++i) a(i, i) = 1.0 - gap;
  return a;
}

ComplexMatrix example2_matrix(double theta, double gap) {
  if (!(gap > 0.0) || !(gap < 1.0)) fail("invalid-gap", "gap must lie in (0, 1)");
  if (!(theta >= 0.0) || theta > kPi / 2.0 + 1e-12)
    fail("invalid-region", "theta must lie in [0, pi/2)");
  if (std::cos(theta) <= 1e-12)
    fail("singular-eigenbasis", "theta = pi/2 collapses the eigenbasis");
  // Sigma diag(1, gap-1) Sigma^{-1} in closed form.
  ComplexMatrix a(2, 2);
  a(0, 0) = 1.0;
  a(0, 1) = 0.0;
  a(1, 0) = std::sin(theta) * (2.0 - gap);
  a(1, 1) = gap - 1.0;
  return a;
}

double example2_condition_number(double theta) {
  if (!(theta >= 0.0) || theta > kPi / 2.0 + 1e-12)
    fail("invalid-region", "theta must lie in [0, pi/2)");
  const double s = std::sin(theta);
  if (1.0 - s <= 1e-12)
    fail("singular-eigenbasis", "theta = pi/2 collapses the eigenbasis");
  return (1.0 + s) / (1.0 - s);
}

CVector random_query_baseline(QueryOracle& oracle, std::size_t t, Seed seed) {
  if (t == 0) fail("invalid-index", "baseline needs T >= 1");
  const std::size_t d = oracle.dimension();
  if (t > d) fail("invalid-dimension", "baseline needs T <= d");
  const StiefelFrame frame = sample_stiefel(d, t, Field::complex, seed);
  std::vector<CVector> vs(t), ws(t);
  for (std::size_t j = 0; j < t; ++j) {
    CVector v(d);
    for (std::size_t i = 0; i < d; ++i) v[i] = frame.columns(i, j);
    ws[j] = oracle.query(v).w;
    vs[j] = std::move(v);
  }
  // Gram data H_jk = v_j* w_k; the span maximizer of Re(c* H c) is the top
  // eigenvector of the Hermitian part, solved through its 2T x 2T real form.
  ComplexMatrix h(t, t);
  for (std::size_t j = 0; j < t; ++j)
    for (std::size_t k = 0; k < t; ++k) h(j, k) = dot(vs[j], ws[k]);
  const std::size_t n2 = 2 * t;
  std::vector<double> s(n2 * n2, 0.0);
  for (std::size_t j = 0; j < t; ++j)
    for (std::size_t k = 0; k < t; ++k) {
      const cdouble hs = 0.5 * (h(j, k) + std::conj(h(k, j)));
      s[j * n2 + k] = hs.real();
      s[j * n2 + (t + k)] = -hs.imag();
      s[(t + j) * n2 + k] = hs.imag();
      s[(t + j) * n2 + (t + k)] = hs.real();
    }
  std::vector<double> evals, vecs;
  jacobi_sym_eig(s, n2, evals, vecs);
  CVector c(t);
  for (std::size_t j = 0; j < t; ++j)
    c[j] = cdouble(vecs[j * n2 + 0], vecs[(t + j) * n2 + 0]);
  CVector vhat(d, 0.0);
  for (std::size_t j = 0; j < t; ++j)
    for (std::size_t i = 0; i < d; ++i) vhat[i] += c[j] * vs[j][i];
  const double n = norm2(vhat);
  if (!(n > 0.0)) fail("degenerate-iterate", "baseline span collapsed");
  for (cdouble& z : vhat) z /= n;
  oracle.ledger().append_output_query(vhat);
  return vhat;
}

}  // namespace spike
