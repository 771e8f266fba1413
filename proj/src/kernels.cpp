#include "spike/kernels.hpp"

#include <omp.h>

#include <algorithm>
#include <cstdlib>

namespace spike {

namespace {

int g_threads = 1;

// Fixed column-block width for the adjoint-side kernels. Blocks partition
// the output index set only; the accumulation order inside each output
// element (ascending row) never depends on the block or thread count.
constexpr std::size_t kColBlock = 256;

inline double cabs1(cdouble z) { return std::abs(z.real()) + std::abs(z.imag()); }

}  // namespace

void set_threads(int n) {
  g_threads = n < 1 ? 1 : n;
  omp_set_num_threads(g_threads);
}

int get_threads() { return g_threads; }

CVector matvec(const ComplexMatrix& a, const CVector& x) {
  if (x.size() != a.cols) fail("invalid-dimension", "matvec size mismatch");
  CVector y(a.rows);
  const std::size_t m = a.rows, n = a.cols;
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(m); ++i) {
    const cdouble* ai = a.row(static_cast<std::size_t>(i));
    cdouble s = 0.0;
    for (std::size_t j = 0; j < n; ++j) s += ai[j] * x[j];
    y[static_cast<std::size_t>(i)] = s;
  }
  return y;
}

CVector matvec_adj(const ComplexMatrix& a, const CVector& x) {
  if (x.size() != a.rows) fail("invalid-dimension", "matvec_adj size mismatch");
  CVector y(a.cols, cdouble(0.0));
  const std::size_t m = a.rows, n = a.cols;
  const std::size_t nblocks = (n + kColBlock - 1) / kColBlock;
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t b = 0; b < static_cast<std::ptrdiff_t>(nblocks); ++b) {
    const std::size_t j0 = static_cast<std::size_t>(b) * kColBlock;
    const std::size_t j1 = std::min(j0 + kColBlock, n);
    for (std::size_t i = 0; i < m; ++i) {
      const cdouble* ai = a.row(i);
      const cdouble xi = x[i];
      for (std::size_t j = j0; j < j1; ++j) y[j] += std::conj(ai[j]) * xi;
    }
  }
  return y;
}

ComplexMatrix matmul(const ComplexMatrix& a, const ComplexMatrix& b) {
  if (a.cols != b.rows) fail("invalid-dimension", "matmul size mismatch");
  ComplexMatrix c(a.rows, b.cols);
  const std::size_t m = a.rows, kk = a.cols, n = b.cols;
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(m); ++i) {
    cdouble* ci = c.row(static_cast<std::size_t>(i));
    const cdouble* ai = a.row(static_cast<std::size_t>(i));
    for (std::size_t k = 0; k < kk; ++k) {
      const cdouble aik = ai[k];
      const cdouble* bk = b.row(k);
      for (std::size_t j = 0; j < n; ++j) ci[j] += aik * bk[j];
    }
  }
  return c;
}

void householder_left(ComplexMatrix& a, const CVector& v, double tau,
                      std::size_t r0, std::size_t c0) {
  const std::size_t m = a.rows, n = a.cols;
  if (v.size() != m - r0) fail("invalid-dimension", "householder_left v size");
  if (tau == 0.0) return;
  CVector w(n - c0, cdouble(0.0));
  const std::size_t wlen = n - c0;
  const std::size_t nblocks = (wlen + kColBlock - 1) / kColBlock;
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t b = 0; b < static_cast<std::ptrdiff_t>(nblocks); ++b) {
    const std::size_t j0 = static_cast<std::size_t>(b) * kColBlock;
    const std::size_t j1 = std::min(j0 + kColBlock, wlen);
    for (std::size_t i = r0; i < m; ++i) {
      const cdouble vi = std::conj(v[i - r0]);
      const cdouble* ai = a.row(i) + c0;
      for (std::size_t j = j0; j < j1; ++j) w[j] += vi * ai[j];
    }
  }
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = static_cast<std::ptrdiff_t>(r0);
       i < static_cast<std::ptrdiff_t>(m); ++i) {
    const cdouble tv = tau * v[static_cast<std::size_t>(i) - r0];
    cdouble* ai = a.row(static_cast<std::size_t>(i)) + c0;
    for (std::size_t j = 0; j < wlen; ++j) ai[j] -= tv * w[j];
  }
}

void householder_right(ComplexMatrix& a, const CVector& v, double tau,
                       std::size_t r0, std::size_t c0) {
  const std::size_t m = a.rows, n = a.cols;
  if (v.size() != n - c0) fail("invalid-dimension", "householder_right v size");
  if (tau == 0.0) return;
  const std::size_t vlen = n - c0;
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = static_cast<std::ptrdiff_t>(r0);
       i < static_cast<std::ptrdiff_t>(m); ++i) {
    cdouble* ai = a.row(static_cast<std::size_t>(i)) + c0;
    cdouble u = 0.0;
    for (std::size_t j = 0; j < vlen; ++j) u += ai[j] * v[j];
    const cdouble tu = tau * u;
    for (std::size_t j = 0; j < vlen; ++j) ai[j] -= tu * std::conj(v[j]);
  }
}

LuFactors lu_factor(ComplexMatrix a) {
  if (!a.square()) fail("invalid-dimension", "lu_factor needs a square matrix");
  const std::size_t n = a.rows;
  LuFactors f;
  f.piv.resize(n);
  for (std::size_t k = 0; k < n; ++k) {
    std::size_t p = k;
    double best = cabs1(a(k, k));
    for (std::size_t i = k + 1; i < n; ++i) {
      const double m = cabs1(a(i, k));
      if (m > best) {
        best = m;
        p = i;
      }
    }
    f.piv[k] = p;
    if (p != k)
      for (std::size_t j = 0; j < n; ++j) std::swap(a(k, j), a(p, j));
    const cdouble pivot = a(k, k);
    if (pivot == cdouble(0.0)) {
      f.singular = true;
      continue;
    }
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t i = static_cast<std::ptrdiff_t>(k) + 1;
         i < static_cast<std::ptrdiff_t>(n); ++i) {
      const std::size_t ii = static_cast<std::size_t>(i);
      const cdouble l = a(ii, k) / pivot;
      a(ii, k) = l;
      cdouble* arow = a.row(ii);
      const cdouble* krow = a.row(k);
      for (std::size_t j = k + 1; j < n; ++j) arow[j] -= l * krow[j];
    }
  }
  f.lu = std::move(a);
  return f;
}

void lu_solve_inplace(const LuFactors& f, CVector& b) {
  const std::size_t n = f.lu.rows;
  if (b.size() != n) fail("invalid-dimension", "lu_solve size mismatch");
  if (f.singular) fail("singular-matrix", "lu_solve on a singular factorization");
  for (std::size_t k = 0; k < n; ++k)
    if (f.piv[k] != k) std::swap(b[k], b[f.piv[k]]);
  for (std::size_t i = 1; i < n; ++i) {
    const cdouble* li = f.lu.row(i);
    cdouble s = b[i];
    for (std::size_t j = 0; j < i; ++j) s -= li[j] * b[j];
    b[i] = s;
  }
  for (std::size_t ii = n; ii-- > 0;) {
    const cdouble* ui = f.lu.row(ii);
    cdouble s = b[ii];
    for (std::size_t j = ii + 1; j < n; ++j) s -= ui[j] * b[j];
    b[ii] = s / ui[ii];
  }
}

CVector lu_solve(const LuFactors& f, const CVector& b) {
  CVector x = b;
  lu_solve_inplace(f, x);
  return x;
}

CVector lu_solve_adjoint(const LuFactors& f, const CVector& b) {
  const std::size_t n = f.lu.rows;
  if (b.size() != n) fail("invalid-dimension", "lu_solve size mismatch");
  if (f.singular) fail("singular-matrix", "lu_solve on a singular factorization");
  // A = P^T L U, so A* x = b resolves as U* y = b, L* s = y, x = P^T s.
  CVector x = b;
  for (std::size_t i = 0; i < n; ++i) {
    cdouble s = x[i];
    for (std::size_t j = 0; j < i; ++j) s -= std::conj(f.lu(j, i)) * x[j];
    x[i] = s / std::conj(f.lu(i, i));
  }
  for (std::size_t ii = n; ii-- > 0;) {
    cdouble s = x[ii];
    for (std::size_t j = ii + 1; j < n; ++j) s -= std::conj(f.lu(j, ii)) * x[j];
    x[ii] = s;
  }
  for (std::size_t k = n; k-- > 0;)
    if (f.piv[k] != k) std::swap(x[k], x[f.piv[k]]);
  return x;
}

cdouble lu_det(const LuFactors& f) {
  cdouble d = 1.0;
  for (std::size_t k = 0; k < f.lu.rows; ++k) {
    d *= f.lu(k, k);
    if (f.piv[k] != k) d = -d;
  }
  return d;
}

namespace ref {

CVector matvec(const ComplexMatrix& a, const CVector& x) {
  CVector y(a.rows, cdouble(0.0));
  for (std::size_t i = 0; i < a.rows; ++i)
    for (std::size_t j = 0; j < a.cols; ++j) y[i] += a(i, j) * x[j];
  return y;
}

CVector matvec_adj(const ComplexMatrix& a, const CVector& x) {
  CVector y(a.cols, cdouble(0.0));
  for (std::size_t i = 0; i < a.rows; ++i)
    for (std::size_t j = 0; j < a.cols; ++j)
      y[j] += std::conj(a(i, j)) * x[i];
  return y;
}

ComplexMatrix matmul(const ComplexMatrix& a, const ComplexMatrix& b) {
  ComplexMatrix c(a.rows, b.cols);
  for (std::size_t i = 0; i < a.rows; ++i)
    for (std::size_t j = 0; j < b.cols; ++j) {
      cdouble s = 0.0;
      for (std::size_t k = 0; k < a.cols; ++k) s += a(i, k) * b(k, j);
      c(i, j) = s;
    }
  return c;
}

void householder_left(ComplexMatrix& a, const CVector& v, double tau,
                      std::size_t r0, std::size_t c0) {
  if (tau == 0.0) return;
  for (std::size_t j = c0; j < a.cols; ++j) {
    cdouble w = 0.0;
    for (std::size_t i = r0; i < a.rows; ++i)
      w += std::conj(v[i - r0]) * a(i, j);
    for (std::size_t i = r0; i < a.rows; ++i)
      a(i, j) -= tau * v[i - r0] * w;
  }
}

void householder_right(ComplexMatrix& a, const CVector& v, double tau,
                       std::size_t r0, std::size_t c0) {
  if (tau == 0.0) return;
  for (std::size_t i = r0; i < a.rows; ++i) {
    cdouble u = 0.0;
    for (std::size_t j = c0; j < a.cols; ++j) u += a(i, j) * v[j - c0];
    for (std::size_t j = c0; j < a.cols; ++j)
      a(i, j) -= tau * u * std::conj(v[j - c0]);
  }
}

LuFactors lu_factor(ComplexMatrix a) {
  const std::size_t n = a.rows;
  LuFactors f;
  f.piv.resize(n);
  for (std::size_t k = 0; k < n; ++k) {
    std::size_t p = k;
    double best = cabs1(a(k, k));
    for (std::size_t i = k + 1; i < n; ++i)
      if (cabs1(a(i, k)) > best) {
        best = cabs1(a(i, k));
        p = i;
      }
    f.piv[k] = p;
    if (p != k)
      for (std::size_t j = 0; j < n; ++j) std::swap(a(k, j), a(p, j));
    if (a(k, k) == cdouble(0.0)) {
      f.singular = true;
      continue;
    }
    for (std::size_t i = k + 1; i < n; ++i) {
      const cdouble l = a(i, k) / a(k, k);
      a(i, k) = l;
      for (std::size_t j = k + 1; j < n; ++j) a(i, j) -= l * a(k, j);
    }
  }
  f.lu = std::move(a);
  return f;
}

}  // namespace ref

}  // namespace spike
