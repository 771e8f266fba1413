#include "spike/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "spike/errors.hpp"
#include "spike/kernels.hpp"
#include "spike/rng.hpp"

namespace spike {

Householder make_householder(const CVector& x) {
  Householder h;
  h.v = x;
  const double xn = norm2(x);
  if (xn == 0.0) {
    h.tau = 0.0;
    h.beta = 0.0;
    return h;
  }
  const cdouble x0 = x[0];
  const cdouble phase = x0 == cdouble(0.0) ? cdouble(1.0) : x0 / std::abs(x0);
  h.beta = -phase * xn;
  h.v[0] = x0 - h.beta;
  double vv = 0.0;
  for (const cdouble& z : h.v) vv += std::norm(z);
  h.tau = 2.0 / vv;
  return h;
}

ThinQR qr_thin(const ComplexMatrix& a) {
  const std::size_t d = a.rows, r = a.cols;
  if (r > d) fail("invalid-dimension", "qr_thin needs rows >= cols");
  ComplexMatrix b = a;
  std::vector<Householder> hs;
  hs.reserve(r);
  for (std::size_t k = 0; k < r; ++k) {
    CVector x(d - k);
    for (std::size_t i = k; i < d; ++i) x[i - k] = b(i, k);
    Householder h = make_householder(x);
    b(k, k) = h.beta;
    for (std::size_t i = k + 1; i < d; ++i) b(i, k) = 0.0;
    if (k + 1 < r) householder_left(b, h.v, h.tau, k, k + 1);
    hs.push_back(std::move(h));
  }
  ThinQR out;
  out.r = ComplexMatrix(r, r);
  for (std::size_t i = 0; i < r; ++i)
    for (std::size_t j = i; j < r; ++j) out.r(i, j) = b(i, j);
  out.q = ComplexMatrix(d, r);
  for (std::size_t i = 0; i < r; ++i) out.q(i, i) = 1.0;
  for (std::size_t k = r; k-- > 0;)
    householder_left(out.q, hs[k].v, hs[k].tau, k, 0);
  return out;
}

double op_norm_est(const ComplexMatrix& a, int iters) {
  if (a.rows == 0 || a.cols == 0) return 0.0;
  Rng rng(Seed{0x6f70206e6f726d00ull, 0});
  CVector v(a.cols);
  for (cdouble& z : v) z = cdouble(rng.gaussian(), rng.gaussian());
  double vn = norm2(v);
  for (cdouble& z : v) z /= vn;
  double sigma = 0.0;
  for (int it = 0; it < iters; ++it) {
    CVector w = matvec(a, v);
    sigma = norm2(w);
    if (sigma == 0.0) return 0.0;
    v = matvec_adj(a, w);
    vn = norm2(v);
    if (vn == 0.0) return sigma;
    for (cdouble& z : v) z /= vn;
  }
  return sigma;
}

void jacobi_sym_eig(const std::vector<double>& s, std::size_t n,
                    std::vector<double>& evals, std::vector<double>& v) {
  if (s.size() != n * n) fail("invalid-dimension", "jacobi_sym_eig size");
  std::vector<double> a = s;
  v.assign(n * n, 0.0);
  for (std::size_t i = 0; i < n; ++i) v[i * n + i] = 1.0;
  double fro = 0.0;
  for (double x : a) fro += x * x;
  const double stop = 1e-13 * std::sqrt(fro);
  for (int sweep = 0; sweep < 60; ++sweep) {
    double off = 0.0;
    for (std::size_t p = 0; p < n; ++p)
      for (std::size_t q = p + 1; q < n; ++q) off += 2.0 * a[p * n + q] * a[p * n + q];
    if (std::sqrt(off) <= stop) break;
    for (std::size_t p = 0; p < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        const double apq = a[p * n + q];
        if (apq == 0.0) continue;
        const double theta = (a[q * n + q] - a[p * n + p]) / (2.0 * apq);
        const double t = (theta >= 0.0 ? 1.0 : -1.0) /
                         (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double sn = t * c;
        for (std::size_t k = 0; k < n; ++k) {
          const double akp = a[k * n + p], akq = a[k * n + q];
          a[k * n + p] = c * akp - sn * akq;
          a[k * n + q] = sn * akp + c * akq;
        }
        for (std::size_t k = 0; k < n; ++k) {
          const double apk = a[p * n + k], aqk = a[q * n + k];
          a[p * n + k] = c * apk - sn * aqk;
          a[q * n + k] = sn * apk + c * aqk;
        }
        for (std::size_t k = 0; k < n; ++k) {
          const double vkp = v[k * n + p], vkq = v[k * n + q];
          v[k * n + p] = c * vkp - sn * vkq;
          v[k * n + q] = sn * vkp + c * vkq;
        }
      }
    }
  }
  evals.resize(n);
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::vector<double> diag(n);
  for (std::size_t i = 0; i < n; ++i) diag[i] = a[i * n + i];
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t x, std::size_t y) { return diag[x] > diag[y]; });
  std::vector<double> vs(n * n);
  for (std::size_t j = 0; j < n; ++j) {
    evals[j] = diag[order[j]];
    for (std::size_t i = 0; i < n; ++i) vs[i * n + j] = v[i * n + order[j]];
  }
  v = std::move(vs);
}

}  // namespace spike
