#include "spike/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "spike/kernels.hpp"
#include "spike/linalg.hpp"
#include "spike/rng.hpp"
#include "spike/stats.hpp"

namespace spike {

namespace {

constexpr double kPi = 3.141592653589793;

struct GivensRot {
  double c = 1.0;  // real by construction
  cdouble s = 0.0;
};

// [[c, s], [-conj(s), c]] maps (f, g) to (r, 0).
GivensRot make_givens(cdouble f, cdouble g) {
  if (g == cdouble(0.0)) return {1.0, cdouble(0.0)};
  const double ag = std::abs(g);
  if (f == cdouble(0.0)) return {0.0, std::conj(g) / ag};
  const double af = std::abs(f);
  const double den = std::sqrt(af * af + ag * ag);
  const cdouble fs = f / af;
  return {af / den, fs * (std::conj(g) / den)};
}

std::pair<cdouble, cdouble> eig2(cdouble a, cdouble b, cdouble c, cdouble d) {
  const cdouble half = 0.5 * (a + d);
  const cdouble diff = 0.5 * (a - d);
  const cdouble disc = std::sqrt(diff * diff + b * c);
  return {half + disc, half - disc};
}

cdouble wilkinson_shift(const ComplexMatrix& h, std::size_t hi) {
  const cdouble d = h(hi, hi);
  auto [l1, l2] = eig2(h(hi - 1, hi - 1), h(hi - 1, hi), h(hi, hi - 1), d);
  return std::abs(l1 - d) <= std::abs(l2 - d) ? l1 : l2;
}

// One implicit single-shift bulge chase over the active window [lo, hi].
// Rotations are applied inside the window only: eigenvalues-only mode, no
// Schur form is accumulated.
void qr_sweep(ComplexMatrix& h, std::size_t lo, std::size_t hi, cdouble shift) {
  cdouble f = h(lo, lo) - shift;
  cdouble g = h(lo + 1, lo);
  for (std::size_t k = lo; k < hi; ++k) {
    const GivensRot rot = make_givens(f, g);
    const cdouble cs = rot.s;
    const cdouble ccs = std::conj(rot.s);
    const std::size_t col0 = k == lo ? lo : k - 1;
    cdouble* rp = h.row(k);
    cdouble* rq = h.row(k + 1);
    for (std::size_t j = col0; j <= hi; ++j) {
      const cdouble hp = rp[j], hq = rq[j];
      rp[j] = rot.c * hp + cs * hq;
      rq[j] = rot.c * hq - ccs * hp;
    }
    if (k > lo) h(k + 1, k - 1) = 0.0;
    const std::size_t rend = std::min(k + 2, hi);
    for (std::size_t i = lo; i <= rend; ++i) {
      cdouble* ri = h.row(i);
      const cdouble hp = ri[k], hq = ri[k + 1];
      ri[k] = rot.c * hp + ccs * hq;
      ri[k + 1] = rot.c * hq - cs * hp;
    }
    if (k + 1 < hi) {
      f = h(k + 1, k);
      g = h(k + 2, k);
    }
  }
}

CVector hessenberg_eigenvalues(ComplexMatrix h) {
  const std::size_t n = h.rows;
  CVector evals;
  evals.reserve(n);
  const double defl_tol = 1e-13 * frobenius_norm(h);
  const std::size_t budget = 40 * n;
  std::size_t sweeps = 0;
  std::size_t stagnation = 0;
  std::size_t hi = n - 1;
  while (true) {
    if (hi == 0) {
      evals.push_back(h(0, 0));
      break;
    }
    std::size_t lo = hi;
    while (lo > 0 && std::abs(h(lo, lo - 1)) > defl_tol) --lo;
    if (lo > 0) h(lo, lo - 1) = 0.0;
    if (lo == hi) {
      evals.push_back(h(hi, hi));
      --hi;
      stagnation = 0;
      continue;
    }
    if (lo + 1 == hi) {
      auto [l1, l2] = eig2(h(lo, lo), h(lo, hi), h(hi, lo), h(hi, hi));
      evals.push_back(l1);
      evals.push_back(l2);
      stagnation = 0;
      if (lo == 0) break;
      hi = lo - 1;
      continue;
    }
    if (sweeps >= budget)
      fail("eigensolver-failure",
           "no convergence: " + std::to_string(evals.size()) + " of " +
               std::to_string(n) + " eigenvalues after " +
               std::to_string(sweeps) + " sweeps, window [" +
               std::to_string(lo) + ", " + std::to_string(hi) + "]");
    ++stagnation;
    const cdouble shift =
        stagnation % 10 == 0
            ? h(hi, hi) + cdouble(0.75 * std::abs(h(hi, hi - 1)), 0.0)
            : wilkinson_shift(h, hi);
    qr_sweep(h, lo, hi, shift);
    ++sweeps;
  }
  return evals;
}

void sort_spectrum(CVector& evals) {
  std::stable_sort(evals.begin(), evals.end(), [](cdouble a, cdouble b) {
    const double ma = std::abs(a), mb = std::abs(b);
    if (ma != mb) return ma > mb;
    if (a.real() != b.real()) return a.real() > b.real();
    return a.imag() > b.imag();
  });
}

void check_tol(double tol) {
  if (!(tol > 0.0) || tol > 1e-4)
    fail("invalid-tolerance", "tol must lie in (0, 1e-4]");
}

}  // namespace

CVector eigenvector_for(const ComplexMatrix& m, cdouble lambda_hat, double tol) {
  if (!m.square()) fail("invalid-dimension", "eigenvector_for needs square");
  check_tol(tol);
  const std::size_t n = m.rows;
  if (n == 1) return {cdouble(1.0)};
  const double scale =
      std::max(std::abs(lambda_hat),
               frobenius_norm(m) / std::sqrt(static_cast<double>(n)));
  const double target = tol * std::max(scale, 1e-300);
  CVector best;
  double best_res = std::numeric_limits<double>::infinity();
  for (int attempt = 0; attempt < 2; ++attempt) {
    const double bump = attempt == 0 ? 1e-10 : 1e-7;
    const cdouble shift = lambda_hat == cdouble(0.0)
                              ? cdouble(bump, 0.0)
                              : lambda_hat * (1.0 + bump);
    ComplexMatrix b = m;
    for (std::size_t i = 0; i < n; ++i) b(i, i) -= shift;
    const LuFactors f = lu_factor(std::move(b));
    if (f.singular) continue;
    Rng rng(Seed{0x65696776656331ull, 0});
    CVector x(n);
    for (cdouble& z : x) z = cdouble(rng.gaussian(), rng.gaussian());
    double nx = norm2(x);
    for (cdouble& z : x) z /= nx;
    for (int it = 0; it < 50; ++it) {
      CVector y = lu_solve(f, x);
      const double ny = norm2(y);
      if (!(ny > 0.0) || !std::isfinite(ny)) break;
      for (cdouble& z : y) z /= ny;
      x = std::move(y);
      const CVector w = matvec(m, x);
      double res = 0.0;
      for (std::size_t i = 0; i < n; ++i)
        res += std::norm(w[i] - lambda_hat * x[i]);
      res = std::sqrt(res);
      if (res < best_res) {
        best_res = res;
        best = x;
      }
      if (best_res <= target) return best;
    }
    if (best_res <= target) return best;
  }
  if (best.empty() || best_res > target)
    fail("eigensolver-failure",
         "inverse iteration stalled at residual " + std::to_string(best_res));
  return best;
}

Spectrum eigen(const ComplexMatrix& m, double tol) {
  if (!m.square()) fail("invalid-dimension", "eigen needs a square matrix");
  check_tol(tol);
  if (!all_finite(m)) fail("invalid-matrix", "eigen needs finite entries");
  const std::size_t n = m.rows;
  Spectrum s;
  if (n == 1) {
    s.eigenvalues = {m(0, 0)};
    s.top_right_eigenvector = {cdouble(1.0)};
    return s;
  }
  ComplexMatrix h = m;
  for (std::size_t k = 0; k + 2 < n; ++k) {
    CVector x(n - k - 1);
    for (std::size_t i = k + 1; i < n; ++i) x[i - k - 1] = h(i, k);
    const Householder hh = make_householder(x);
    if (hh.tau == 0.0) continue;
    h(k + 1, k) = hh.beta;
    for (std::size_t i = k + 2; i < n; ++i) h(i, k) = 0.0;
    householder_left(h, hh.v, hh.tau, k + 1, k + 1);
    householder_right(h, hh.v, hh.tau, 0, k + 1);
  }
  CVector evals = hessenberg_eigenvalues(std::move(h));
  sort_spectrum(evals);
  s.eigenvalues = std::move(evals);
  s.top_right_eigenvector = eigenvector_for(m, s.eigenvalues[0], tol);
  return s;
}

double spectral_gap(const Spectrum& s) {
  if (s.eigenvalues.size() < 2)
    fail("invalid-dimension", "spectral_gap needs d >= 2");
  const double m1 = std::abs(s.eigenvalues[0]);
  if (m1 == 0.0) fail("undefined-gap", "top eigenvalue is zero");
  return (m1 - std::abs(s.eigenvalues[1])) / m1;
}

std::pair<CVector, CVector> detect_outliers(const Spectrum& s, double epsilon) {
  if (!(epsilon > 0.0)) fail("invalid-epsilon", "epsilon must be positive");
  CVector out, bulk;
  for (const cdouble& z : s.eigenvalues)
    (std::abs(z) > 1.0 + epsilon ? out : bulk).push_back(z);
  return {std::move(out), std::move(bulk)};
}

ESDStats circular_law_stats(const Spectrum& s, std::size_t r_exclude) {
  const std::size_t d = s.eigenvalues.size();
  if (r_exclude >= d) fail("invalid-dimension", "r_exclude must be below d");
  ESDStats st;
  st.outlier_count = r_exclude;
  st.bulk_count = d - r_exclude;
  std::vector<double> radii, angles;
  radii.reserve(st.bulk_count);
  angles.reserve(st.bulk_count);
  for (std::size_t i = r_exclude; i < d; ++i) {
    const cdouble z = s.eigenvalues[i];
    double r = std::abs(z);
    if (r > 1.0) {
      r = 1.0;
      ++st.clipped_count;
    }
    radii.push_back(r);
    double th = std::atan2(z.imag(), z.real());
    if (th < 0.0) th += 2.0 * kPi;
    angles.push_back(th);
  }
  st.radial_ks = ks_distance(std::move(radii), [](double r) { return r * r; });
  st.angular_ks =
      ks_distance(std::move(angles), [](double t) { return t / (2.0 * kPi); });
  return st;
}

CVector outlier_roots_via_resolvent(const PlantedInstance& inst,
                                    double epsilon) {
  if (!(epsilon > 0.0)) fail("invalid-epsilon", "epsilon must be positive");
  if (inst.spec.shape != Shape::hermitian_spike)
    fail("invalid-shape", "resolvent roots need a hermitian-spike instance");
  const std::size_t d = inst.spec.d, r = inst.spec.r;
  if (std::abs(inst.spec.lambdas[r - 1]) <= 1.0 + 3.0 * epsilon)
    fail("invalid-region", "needs |lambda_r| > 1 + 3 epsilon");
  // W/sqrt(d), recovered from the instance through its reconstruction
  // identity; exact whenever matrix was assembled as noise plus perturbation.
  ComplexMatrix a = inst.matrix;
  {
    const ComplexMatrix pert =
        perturbation_matrix(inst.spec, inst.truth, inst.truth_right);
    for (std::size_t i = 0; i < a.data.size(); ++i) a.data[i] -= pert.data[i];
  }
  const ComplexMatrix& u = inst.truth.columns;
  CVector roots(r);
  for (std::size_t idx = 0; idx < r; ++idx) {
    cdouble z = inst.spec.lambdas[idx];
    if (std::abs(z) <= 1.0 + 2.0 * epsilon)
      fail("invalid-region", "Newton seed inside the bulk disk");
    bool converged = false;
    for (int it = 0; it < 60 && !converged; ++it) {
      ComplexMatrix b(d, d);
      for (std::size_t i = 0; i < d; ++i) {
        const cdouble* ai = a.row(i);
        cdouble* bi = b.row(i);
        for (std::size_t j = 0; j < d; ++j) bi[j] = -ai[j];
        bi[i] += z;
      }
      const LuFactors f = lu_factor(std::move(b));
      if (f.singular) fail("root-finding-failure", "singular shifted matrix");
      std::vector<CVector> xs(r), ys(r);
      for (std::size_t c = 0; c < r; ++c) {
        CVector col(d);
        for (std::size_t i = 0; i < d; ++i) col[i] = u(i, c);
        xs[c] = lu_solve(f, col);
        ys[c] = lu_solve(f, xs[c]);
      }
      ComplexMatrix tm(r, r), rm(r, r);
      for (std::size_t p = 0; p < r; ++p) {
        for (std::size_t q = 0; q < r; ++q) {
          cdouble bs = 0.0, cs = 0.0;
          for (std::size_t i = 0; i < d; ++i) {
            const cdouble up = std::conj(u(i, p));
            bs += up * xs[q][i];
            cs += up * ys[q][i];
          }
          tm(p, q) = (p == q ? cdouble(1.0) : cdouble(0.0)) -
                     inst.spec.lambdas[p] * bs;
          rm(p, q) = inst.spec.lambdas[p] * cs;
        }
      }
      const LuFactors ft = ref::lu_factor(tm);
      if (ft.singular) {
        converged = true;
        break;
      }
      cdouble tr = 0.0;
      for (std::size_t c = 0; c < r; ++c) {
        CVector col(r);
        for (std::size_t i = 0; i < r; ++i) col[i] = rm(i, c);
        const CVector sol = lu_solve(ft, col);
        tr += sol[c];
      }
      if (tr == cdouble(0.0))
        fail("root-finding-failure", "vanishing Newton derivative");
      const cdouble step = -1.0 / tr;
      z += step;
      if (std::abs(z) <= 1.0 + 2.0 * epsilon)
        fail("root-finding-failure", "iterate left the outlier region");
      if (std::abs(step) <= 1e-12 * std::abs(z)) converged = true;
    }
    if (!converged)
      fail("root-finding-failure", "no convergence in 60 Newton steps");
    roots[idx] = z;
  }
  return roots;
}

AlignmentReport alignment(const PlantedInstance& inst, const Spectrum& s) {
  const std::size_t r = inst.spec.r;
  const ComplexMatrix& u = inst.truth.columns;
  const std::size_t d = inst.spec.d;
  AlignmentReport rep;
  rep.overlaps.assign(r, std::vector<double>(r, 0.0));
  rep.weighted_sums.assign(r, 0.0);
  std::vector<CVector> vs(r);
  vs[0] = s.top_right_eigenvector;
  for (std::size_t j = 1; j < r; ++j)
    vs[j] = eigenvector_for(inst.matrix, s.eigenvalues[j]);
  for (std::size_t i = 0; i < r; ++i)
    for (std::size_t j = 0; j < r; ++j) {
      cdouble ip = 0.0;
      for (std::size_t k = 0; k < d; ++k) ip += std::conj(u(k, i)) * vs[j][k];
      rep.overlaps[i][j] = std::norm(ip);
    }
  for (std::size_t j = 0; j < r; ++j) {
    double ws = 0.0;
    for (std::size_t i = 0; i < r; ++i)
      ws += std::norm(inst.spec.lambdas[i]) * rep.overlaps[i][j];
    rep.weighted_sums[j] = ws;
  }
  cdouble ip = 0.0;
  double raw = 0.0;
  for (std::size_t k = 0; k < d; ++k) {
    ip += std::conj(u(k, 0)) * vs[0][k];
    raw += std::norm(u(k, 0) - vs[0][k]);
  }
  rep.phase_aligned_distance =
      std::sqrt(std::max(0.0, 2.0 - 2.0 * std::abs(ip)));
  rep.raw_distance = std::sqrt(raw);
  return rep;
}

}  // namespace spike
