#include "spike/concentration.hpp"

#include <cmath>
#include <cstdio>

#include "json.hpp"
#include "spike/errors.hpp"
#include "spike/kernels.hpp"
#include "spike/linalg.hpp"
#include "spike/rng.hpp"

namespace spike {

namespace {

// Per-trial sub-streams: entry draws use blocks from 0, sphere draws from
// here, so the two never overlap inside one (value, stream) pair.
constexpr std::uint64_t kSphereBlock = std::uint64_t{1} << 32;

std::vector<double> sample_sphere_real(std::size_t d, Rng& rng) {
  std::vector<double> u(d);
  double n2 = 0.0;
  for (double& x : u) {
    x = rng.gaussian();
    n2 += x * x;
  }
  const double inv = 1.0 / std::sqrt(n2);
  for (double& x : u) x *= inv;
  return u;
}

CVector sample_sphere(std::size_t d, bool complex_field, Rng& rng) {
  CVector u(d);
  double n2 = 0.0;
  for (cdouble& x : u) {
    x = complex_field ? cdouble(rng.gaussian(), rng.gaussian())
                      : cdouble(rng.gaussian(), 0.0);
    n2 += std::norm(x);
  }
  const double inv = 1.0 / std::sqrt(n2);
  for (cdouble& x : u) x *= inv;
  return u;
}

bool real_frame_variant(HwVariant v) {
  return v == HwVariant::real_stiefel || v == HwVariant::general_case_real;
}

}  // namespace

std::string to_string(HwVariant v) {
  switch (v) {
    case HwVariant::real_stiefel: return "real-stiefel";
    case HwVariant::complex_matrix: return "complex-matrix";
    case HwVariant::complex_stiefel_r1: return "complex-stiefel-r1";
    case HwVariant::complex_stiefel_general: return "complex-stiefel-general";
    case HwVariant::general_case_real: return "general-case-real";
    case HwVariant::general_case_complex: return "general-case-complex";
  }
  fail("invalid-variant", "unknown variant");
}

HwVariant hw_variant_from_string(const std::string& s) {
  if (s == "real-stiefel") return HwVariant::real_stiefel;
  if (s == "complex-matrix") return HwVariant::complex_matrix;
  if (s == "complex-stiefel-r1") return HwVariant::complex_stiefel_r1;
  if (s == "complex-stiefel-general") return HwVariant::complex_stiefel_general;
  if (s == "general-case-real") return HwVariant::general_case_real;
  if (s == "general-case-complex") return HwVariant::general_case_complex;
  fail("invalid-variant", "unknown variant: " + s);
}

HwBound hw_bound(double op_norm, double frob_norm, std::size_t d,
                 std::size_t r, double t, HwVariant variant) {
  if (d == 0 || r == 0 || r > d) fail("invalid-dimension", "need 1 <= r <= d");
  if (!(t > 0.0)) fail("bound-degenerate", "t must be positive");
  const double dd = static_cast<double>(d);
  if (!(t < dd / 4.0))
    fail("bound-degenerate", "t must be below d/4 to keep denominators positive");
  const double rr = static_cast<double>(r);
  const double core = t * op_norm + std::sqrt(t) * frob_norm;
  const double den_real = dd * (1.0 - 2.0 * std::sqrt(t / dd));
  const double den_cplx = dd * (1.0 - std::sqrt(2.0 * t / dd));
  HwBound b;
  switch (variant) {
    case HwVariant::real_stiefel:
      b.deviation_bound = 8.0 * core / den_real;
      b.failure_prob = 3.0 * std::exp(2.2 * rr - t);
      break;
    case HwVariant::complex_matrix:
      b.deviation_bound = 16.0 * core / den_real;
      b.failure_prob = 6.0 * std::exp(2.2 * rr - t);
      break;
    case HwVariant::complex_stiefel_r1:
      b.deviation_bound = 16.0 * core / den_cplx;
      b.failure_prob = 6.0 * std::exp(2.2 - t);
      break;
    case HwVariant::complex_stiefel_general:
      b.deviation_bound = 32.0 * core / den_cplx;
      b.failure_prob = 6.0 * std::exp(4.4 * rr + 2.2 - t);
      break;
    case HwVariant::general_case_real:
      b.deviation_bound = 16.0 * core / den_real;
      b.failure_prob = 6.0 * std::exp(2.2 * rr - t);
      break;
    case HwVariant::general_case_complex:
      b.deviation_bound = 32.0 * core / den_real;
      b.failure_prob = 6.0 * std::exp(4.4 * rr + 2.2 - t);
      break;
  }
  return b;
}

TailTestReport hw_empirical(const ComplexMatrix& a, std::size_t r,
                            HwVariant variant, double t, std::size_t trials,
                            Seed seed) {
  if (!a.square()) fail("invalid-dimension", "A must be square");
  const std::size_t d = a.rows;
  const HwBound bound =
      hw_bound(op_norm_est(a), frobenius_norm(a), d, r, t, variant);
  const cdouble tr_term = [&] {
    cdouble tr = 0.0;
    for (std::size_t i = 0; i < d; ++i) tr += a(i, i);
    return tr / static_cast<double>(d);
  }();
  const Field field =
      real_frame_variant(variant) ? Field::real : Field::complex;
  std::size_t exceed = 0;
  for (std::size_t trial = 0; trial < trials; ++trial) {
    const StiefelFrame u =
        sample_stiefel(d, r, field, Seed{seed.value, seed.stream + trial});
    const ComplexMatrix au = matmul(a, u.columns);
    ComplexMatrix x(r, r);
    for (std::size_t p = 0; p < r; ++p)
      for (std::size_t q = 0; q < r; ++q) {
        cdouble s = 0.0;
        for (std::size_t i = 0; i < d; ++i)
          s += std::conj(u.columns(i, p)) * au(i, q);
        x(p, q) = s - (p == q ? tr_term : cdouble(0.0));
      }
    if (op_norm_est(x, 200) > bound.deviation_bound) ++exceed;
  }
  TailTestReport rep;
  rep.bound_value = bound.failure_prob;
  rep.trials = trials;
  rep.empirical_frequency =
      trials == 0 ? 0.0
                  : static_cast<double>(exceed) / static_cast<double>(trials);
  if (trials > 0) rep.wilson_interval = wilson_interval(exceed, trials);
  return rep;
}

double entropy_tail_bound(std::size_t k, double tau) {
  const double kk = 2.0 * static_cast<double>(k);
  if (!(tau >= kk)) fail("bound-inapplicable", "tau must be at least 2k");
  const double root = std::sqrt(tau) - std::sqrt(kk);
  return std::exp(-0.5 * root * root);
}

TailTestReport entropy_tail_empirical(std::size_t d, const ComplexMatrix& v,
                                      double tau, std::size_t trials,
                                      Seed seed) {
  if (v.rows != d) fail("invalid-dimension", "basis/d mismatch");
  if (v.cols % 2 != 0) fail("invalid-dimension", "basis must be d x 2k");
  const std::size_t k = v.cols / 2;
  const double bound = entropy_tail_bound(k, tau);
  const double threshold = tau / static_cast<double>(d);
  // The basis is real in every use; keep a real copy for the hot loop.
  std::vector<std::vector<double>> cols(v.cols, std::vector<double>(d));
  for (std::size_t j = 0; j < v.cols; ++j)
    for (std::size_t i = 0; i < d; ++i) cols[j][i] = v(i, j).real();
  std::size_t exceed = 0;
  for (std::size_t trial = 0; trial < trials; ++trial) {
    Rng rng(Seed{seed.value, seed.stream + trial}, kSphereBlock);
    const std::vector<double> u = sample_sphere_real(d, rng);
    double phi = 0.0;
    for (const auto& col : cols) {
      double ip = 0.0;
      for (std::size_t i = 0; i < d; ++i) ip += col[i] * u[i];
      phi += ip * ip;
    }
    if (phi >= threshold) ++exceed;
  }
  TailTestReport rep;
  rep.bound_value = bound;
  rep.trials = trials;
  rep.empirical_frequency =
      trials == 0 ? 0.0
                  : static_cast<double>(exceed) / static_cast<double>(trials);
  if (trials > 0) rep.wilson_interval = wilson_interval(exceed, trials);
  return rep;
}

double information_increment(double eta, double lambda, std::size_t d,
                             double overlap_sq) {
  if (!(eta > 0.0)) fail("invalid-eta", "eta must be positive");
  if (!(lambda > 1.0)) fail("subcritical-spike", "lambda must exceed 1");
  return std::exp(eta * (1.0 + eta) / 2.0 * lambda * lambda *
                  static_cast<double>(d) * overlap_sq);
}

namespace {

struct PinvData {
  std::vector<double> evals;
  std::vector<double> vecs;  // row-major n x n, eigenvector j in column j
  std::vector<double> q;     // V^T mu
  double quad = 0.0;         // mu^T pinv(Sigma) mu
  double cutoff = 0.0;
  std::size_t n = 0;
};

PinvData sigma_pinv_quad(const std::vector<double>& mu,
                         const std::vector<double>& sigma) {
  PinvData p;
  p.n = mu.size();
  if (sigma.size() != p.n * p.n)
    fail("invalid-dimension", "sigma must be n x n for n = |mu|");
  jacobi_sym_eig(sigma, p.n, p.evals, p.vecs);
  const double lmax = p.evals.empty() ? 0.0 : std::max(p.evals[0], 0.0);
  p.cutoff = 1e-12 * lmax;
  p.q.assign(p.n, 0.0);
  for (std::size_t j = 0; j < p.n; ++j)
    for (std::size_t i = 0; i < p.n; ++i)
      p.q[j] += p.vecs[i * p.n + j] * mu[i];
  double outside = 0.0;
  for (std::size_t j = 0; j < p.n; ++j) {
    if (p.evals[j] > p.cutoff)
      p.quad += p.q[j] * p.q[j] / p.evals[j];
    else
      outside += p.q[j] * p.q[j];
  }
  if (std::sqrt(outside) > 1e-8)
    fail("undefined-moment", "mu_diff is outside the range of Sigma");
  return p;
}

}  // namespace

double gaussian_ratio_moment(const std::vector<double>& mu_diff,
                             const std::vector<double>& sigma, double eta) {
  if (!(eta > 0.0)) fail("invalid-eta", "eta must be positive");
  const PinvData p = sigma_pinv_quad(mu_diff, sigma);
  return std::exp(eta * (1.0 + eta) / 2.0 * p.quad);
}

double gaussian_ratio_empirical(const std::vector<double>& mu_diff,
                                const std::vector<double>& sigma, double eta,
                                std::size_t trials, Seed seed) {
  if (!(eta > 0.0)) fail("invalid-eta", "eta must be positive");
  if (trials == 0) fail("invalid-index", "need at least one sample");
  const PinvData p = sigma_pinv_quad(mu_diff, sigma);
  const std::size_t n = p.n;
  // x = V sqrt(diag) g; the ratio exponent needs x^T pinv(Sigma) mu, which in
  // eigencoordinates is sum_j g_j q_j / sqrt(eval_j) over the kept modes.
  std::vector<double> weight(n, 0.0);
  for (std::size_t j = 0; j < n; ++j)
    if (p.evals[j] > p.cutoff) weight[j] = p.q[j] / std::sqrt(p.evals[j]);
  Rng rng(seed);
  double acc = 0.0;
  for (std::size_t trial = 0; trial < trials; ++trial) {
    double xdot = 0.0;
    for (std::size_t j = 0; j < n; ++j) xdot += rng.gaussian() * weight[j];
    acc += std::exp((1.0 + eta) * (xdot - 0.5 * p.quad));
  }
  return acc / static_cast<double>(trials);
}

double resolvent_norm_value(double lambda, const ComplexMatrix& w) {
  if (!(lambda > 1.0)) fail("subcritical-spike", "lambda must exceed 1");
  if (!w.square()) fail("invalid-dimension", "W must be square");
  const std::size_t d = w.rows;
  ComplexMatrix b(d, d);
  for (std::size_t i = 0; i < d; ++i) {
    const cdouble* wi = w.row(i);
    cdouble* bi = b.row(i);
    for (std::size_t j = 0; j < d; ++j) bi[j] = -wi[j];
    bi[i] += lambda;
  }
  const LuFactors f = lu_factor(std::move(b));
  if (f.singular) fail("singular-matrix", "lambda I - W is singular");
  Rng rng(Seed{0x7265736f6c76ull, 0});
  CVector v(d);
  for (cdouble& z : v) z = cdouble(rng.gaussian(), rng.gaussian());
  double nv = norm2(v);
  for (cdouble& z : v) z /= nv;
  double sigma = 0.0;
  for (int it = 0; it < 40; ++it) {
    CVector x = lu_solve(f, v);
    sigma = norm2(x);
    if (!(sigma > 0.0) || !std::isfinite(sigma))
      fail("singular-matrix", "resolvent power iteration broke down");
    CVector y = lu_solve_adjoint(f, x);
    const double ny = norm2(y);
    for (std::size_t i = 0; i < d; ++i) v[i] = y[i] / ny;
  }
  return lambda * sigma;
}

std::pair<double, double> resolvent_norm_check(double lambda, std::size_t d,
                                               Seed seed) {
  if (!(lambda > 1.0)) fail("subcritical-spike", "lambda must exceed 1");
  if (d == 0) fail("invalid-dimension", "d must be >= 1");
  const double gap = (lambda - 1.0) / lambda;
  const double bound = 2.0 / (gap * gap);
  const double inv_sqrt_d = 1.0 / std::sqrt(static_cast<double>(d));
  for (std::uint64_t attempt = 0;; ++attempt) {
    ComplexMatrix w =
        sample_iid(d, EntryLaw::real_gaussian,
                   Seed{seed.value, seed.stream + attempt});
    for (cdouble& e : w.data) e *= inv_sqrt_d;
    try {
      return {resolvent_norm_value(lambda, w), bound};
    } catch (const Error& e) {
      if (std::string(e.code()) != "singular-matrix" || attempt >= 8) throw;
      std::fprintf(stderr,
                   "warning: singular lambda I - W draw, resampling "
                   "(attempt %llu)\n",
                   static_cast<unsigned long long>(attempt + 1));
    }
  }
}

MomentEstimate moment_cross_check(std::size_t d, std::size_t k1,
                                  std::size_t k2, EntryLaw law,
                                  std::size_t trials, Seed seed) {
  if (k1 > 4 || k2 > 4) fail("invalid-index", "powers are capped at 4");
  if (d == 0) fail("invalid-dimension", "d must be >= 1");
  const bool complex_field = law == EntryLaw::complex_gaussian;
  const double scale_pow =
      std::pow(static_cast<double>(d),
               -0.5 * static_cast<double>(k1 + k2));
  std::vector<cdouble> vals;
  vals.reserve(trials);
  for (std::size_t trial = 0; trial < trials; ++trial) {
    const Seed ts{seed.value, seed.stream + trial};
    const ComplexMatrix w = sample_iid(d, law, ts);
    Rng urng(ts, kSphereBlock);
    const CVector u = sample_sphere(d, complex_field, urng);
    CVector a = u;
    for (std::size_t i = 0; i < k1; ++i) a = matvec(w, a);
    CVector b = u;
    for (std::size_t i = 0; i < k2; ++i) b = matvec(w, b);
    vals.push_back(dot(a, b) * scale_pow);
  }
  MomentEstimate est;
  if (vals.empty()) return est;
  for (const cdouble& v : vals) est.mean += v;
  est.mean /= static_cast<double>(vals.size());
  double var = 0.0;
  for (const cdouble& v : vals) var += std::norm(v - est.mean);
  if (vals.size() > 1) {
    var /= static_cast<double>(vals.size() - 1);
    est.std_error = std::sqrt(var / static_cast<double>(vals.size()));
  }
  return est;
}

std::pair<double, double> moment_uwu_check(std::size_t d, std::size_t k,
                                           std::size_t trials, Seed seed) {
  if (k == 0 || k > 4) fail("invalid-index", "power must be in [1, 4]");
  if (d == 0 || trials == 0) fail("invalid-dimension", "need d, trials >= 1");
  double dfact = 1.0;
  for (std::size_t j = 2; j <= 2 * k; j += 2) dfact *= static_cast<double>(j);
  const double bound = dfact *
                       std::pow(static_cast<double>(k),
                                2.0 * static_cast<double>(k) - 1.0) /
                       static_cast<double>(d);
  const double inv_sqrt_d = 1.0 / std::sqrt(static_cast<double>(d));
  double acc = 0.0;
  for (std::size_t trial = 0; trial < trials; ++trial) {
    const Seed ts{seed.value, seed.stream + trial};
    const ComplexMatrix w = sample_iid(d, EntryLaw::real_gaussian, ts);
    Rng urng(ts, kSphereBlock);
    const CVector u = sample_sphere(d, false, urng);
    CVector x = u;
    for (std::size_t i = 0; i < k; ++i) {
      x = matvec(w, x);
      for (cdouble& z : x) z *= inv_sqrt_d;
    }
    acc += std::norm(dot(u, x));
  }
  return {acc / static_cast<double>(trials), bound};
}

std::string tail_report_json(const std::string& variant,
                             const std::map<std::string, double>& params,
                             const TailTestReport& rep) {
  nlohmann::json j;
  j["variant"] = variant;
  j["params"] = params;
  j["bound"] = rep.bound_value;
  j["frequency"] = rep.empirical_frequency;
  j["trials"] = rep.trials;
  j["interval"] = {rep.wilson_interval.lo, rep.wilson_interval.hi};
  return j.dump();
}

}  // namespace spike
