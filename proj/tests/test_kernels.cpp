#include "doctest.h"

#include <cmath>
#include <complex>
#include <vector>

#include "spike/complex_matrix.hpp"
#include "spike/ensembles.hpp"
#include "spike/kernels.hpp"
#include "spike/linalg.hpp"

using namespace spike;

namespace {

double max_diff(const ComplexMatrix& a, const ComplexMatrix& b) {
  REQUIRE(a.rows == b.rows);
  REQUIRE(a.cols == b.cols);
  double m = 0.0;
  for (std::size_t i = 0; i < a.data.size(); ++i)
    m = std::max(m, std::abs(a.data[i] - b.data[i]));
  return m;
}

double max_diff(const CVector& a, const CVector& b) {
  REQUIRE(a.size() == b.size());
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i)
    m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

CVector random_vector(std::size_t n, Seed seed) {
  Rng rng(seed);
  CVector v(n);
  for (auto& z : v) z = cdouble(rng.gaussian(), rng.gaussian());
  return v;
}

struct ThreadGuard {
  int saved;
  ThreadGuard() : saved(get_threads()) {}
  ~ThreadGuard() { set_threads(saved); }
};

}  // namespace

TEST_CASE("parallel kernels agree with the serial references") {
  const std::size_t n = 83;
  ComplexMatrix a = sample_iid(n, EntryLaw::complex_gaussian, Seed{11, 0});
  ComplexMatrix b = sample_iid(n, EntryLaw::complex_gaussian, Seed{11, 1});
  CVector x = random_vector(n, Seed{11, 2});

  // The kernels and the naive references order their arithmetic
  // differently, and fused multiply-add contraction shifts with inlining,
  // so agreement holds to a few ulps rather than bitwise. Thread-count
  // invariance stays bitwise in its own test below.
  CHECK(max_diff(matvec(a, x), ref::matvec(a, x)) <= 1e-12);
  CHECK(max_diff(matvec_adj(a, x), ref::matvec_adj(a, x)) <= 1e-12);
  CHECK(max_diff(matmul(a, b), ref::matmul(a, b)) <= 1e-12);

  Householder h = make_householder(random_vector(n, Seed{11, 3}));
  ComplexMatrix c1 = a, c2 = a;
  householder_left(c1, h.v, h.tau, 0, 0);
  ref::householder_left(c2, h.v, h.tau, 0, 0);
  CHECK(max_diff(c1, c2) <= 1e-12);
  c1 = a;
  c2 = a;
  householder_right(c1, h.v, h.tau, 0, 0);
  ref::householder_right(c2, h.v, h.tau, 0, 0);
  CHECK(max_diff(c1, c2) <= 1e-12);

  LuFactors f1 = lu_factor(a);
  LuFactors f2 = ref::lu_factor(a);
  CHECK(max_diff(f1.lu, f2.lu) <= 1e-12);
  CHECK(f1.piv == f2.piv);
  CHECK(f1.singular == f2.singular);
}

TEST_CASE("kernel outputs are bitwise stable across thread counts") {
  ThreadGuard guard;
  const std::size_t n = 120;
  ComplexMatrix a = sample_iid(n, EntryLaw::complex_gaussian, Seed{21, 0});
  ComplexMatrix b = sample_iid(n, EntryLaw::complex_gaussian, Seed{21, 1});
  CVector x = random_vector(n, Seed{21, 2});

  set_threads(1);
  CVector mv1 = matvec(a, x);
  ComplexMatrix mm1 = matmul(a, b);
  LuFactors lu1 = lu_factor(a);
  set_threads(8);
  CHECK(get_threads() == 8);
  CVector mv8 = matvec(a, x);
  ComplexMatrix mm8 = matmul(a, b);
  LuFactors lu8 = lu_factor(a);

  CHECK(max_diff(mv1, mv8) == 0.0);
  CHECK(max_diff(mm1, mm8) == 0.0);
  CHECK(max_diff(lu1.lu, lu8.lu) == 0.0);
  CHECK(lu1.piv == lu8.piv);
}

TEST_CASE("matvec_adj equals the matvec of the adjoint") {
  const std::size_t n = 40;
  ComplexMatrix a = sample_iid(n, EntryLaw::complex_gaussian, Seed{31, 0});
  CVector x = random_vector(n, Seed{31, 1});
  CHECK(max_diff(matvec_adj(a, x), matvec(adjoint(a), x)) < 1e-13);
}

TEST_CASE("lu solves recover known right-hand sides") {
  const std::size_t n = 60;
  ComplexMatrix a = sample_iid(n, EntryLaw::complex_gaussian, Seed{41, 0});
  CVector x = random_vector(n, Seed{41, 1});
  LuFactors f = lu_factor(a);
  REQUIRE(!f.singular);

  CVector b = matvec(a, x);
  CVector got = lu_solve(f, b);
  CHECK(max_diff(got, x) < 1e-10);

  CVector b_adj = matvec_adj(a, x);
  CVector got_adj = lu_solve_adjoint(f, b_adj);
  CHECK(max_diff(got_adj, x) < 1e-10);

  CVector c = b;
  lu_solve_inplace(f, c);
  CHECK(max_diff(c, got) == 0.0);
}

TEST_CASE("lu determinant matches direct expansion on small matrices") {
  ComplexMatrix m(2, 2);
  m(0, 0) = cdouble(1, 2);
  m(0, 1) = cdouble(0, -1);
  m(1, 0) = cdouble(3, 0);
  m(1, 1) = cdouble(2, 1);
  cdouble expected = m(0, 0) * m(1, 1) - m(0, 1) * m(1, 0);
  CHECK(std::abs(lu_det(lu_factor(m)) - expected) < 1e-13);

  CHECK(std::abs(lu_det(lu_factor(ComplexMatrix::identity(7))) -
                 cdouble(1.0)) < 1e-14);
}

TEST_CASE("exactly singular input raises the singular flag") {
  ComplexMatrix z(5, 5);  // all zeros
  LuFactors f = lu_factor(z);
  CHECK(f.singular);
  CHECK(lu_det(f) == cdouble(0.0));
}

TEST_CASE("set_threads clamps to at least one worker") {
  ThreadGuard guard;
  set_threads(3);
  CHECK(get_threads() == 3);
  set_threads(1);
  CHECK(get_threads() == 1);
}
