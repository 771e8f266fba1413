#include "spike/harness.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>
#include <utility>

#include "CLI11.hpp"
#include "json.hpp"

#include "spike/algorithms.hpp"
#include "spike/bounds.hpp"
#include "spike/concentration.hpp"
#include "spike/ensembles.hpp"
#include "spike/errors.hpp"
#include "spike/kernels.hpp"
#include "spike/linalg.hpp"
#include "spike/query_model.hpp"
#include "spike/spectral.hpp"
#include "spike/stats.hpp"

namespace spike {
namespace {

using nlohmann::json;

// Planted instances consume blocks [0, d^2) and [2^32, ...) of their seed;
// harness-side draws (start vectors) sit above both.
constexpr std::uint64_t kAuxBlock = std::uint64_t{3} << 32;
constexpr double kPowerEpsilon = 1e-2;
constexpr std::size_t kQueryRounds = 10;
constexpr double kKsTolerance = 0.05;

const std::vector<std::string>& experiment_names() {
  static const std::vector<std::string> names = {
      "esd",      "outliers", "alignment",     "power",
      "querybound", "twoside", "concentration"};
  return names;
}

std::string fmt_g(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%g", x);
  return buf;
}

void add_metric(TrialRecord& rec, std::string name, double value) {
  rec.metrics.emplace_back(std::move(name), value);
}

CVector sphere_vector(std::size_t d, bool complex_field, Rng& rng) {
  CVector v(d);
  double n2 = 0.0;
  for (std::size_t i = 0; i < d; ++i) {
    const double re = rng.gaussian();
    const double im = complex_field ? rng.gaussian() : 0.0;
    v[i] = cdouble(re, im);
    n2 += re * re + im * im;
  }
  const double inv = 1.0 / std::sqrt(n2);
  for (auto& e : v) e *= inv;
  return v;
}

DeformedSpec spec_for(const ExperimentConfig& cfg, std::size_t trial) {
  DeformedSpec s;
  s.d = cfg.d;
  s.r = cfg.r;
  s.lambdas.assign(cfg.lambdas.begin(), cfg.lambdas.end());
  s.entry_law = entry_law_from_string(cfg.entry_law);
  s.shape = Shape::hermitian_spike;
  s.field = s.entry_law == EntryLaw::complex_gaussian ? Field::complex
                                                      : Field::real;
  s.seed = Seed{cfg.seed, trial};
  return s;
}

template <typename Body>
void run_trials(const ExperimentConfig& cfg, ExperimentReport& rep,
                Body&& body) {
  for (std::size_t t = 0; t < cfg.trials; ++t) {
    TrialRecord rec;
    rec.index = rep.trials.size();
    try {
      body(t, rec);
    } catch (const Error& e) {
      rec.ok = false;
      rec.error = e.code();
      rec.metrics.clear();
    }
    rep.trials.push_back(std::move(rec));
  }
}

void summarize(ExperimentReport& rep) {
  std::vector<std::string> order;
  std::map<std::string, std::vector<double>> values;
  for (const TrialRecord& rec : rep.trials) {
    if (!rec.ok) continue;
    for (const auto& [name, v] : rec.metrics) {
      auto it = values.find(name);
      if (it == values.end()) {
        order.push_back(name);
        values.emplace(name, std::vector<double>{v});
      } else {
        it->second.push_back(v);
      }
    }
  }
  for (const std::string& name : order) {
    const std::vector<double>& xs = values[name];
    MetricSummary s;
    s.name = name;
    s.count = xs.size();
    s.mean = mean(xs);
    s.stddev = xs.size() > 1 ? sample_stddev(xs) : 0.0;
    s.ci_half_width =
        s.count > 0
            ? 1.96 * s.stddev / std::sqrt(static_cast<double>(s.count))
            : 0.0;
    s.min = *std::min_element(xs.begin(), xs.end());
    s.max = *std::max_element(xs.begin(), xs.end());
    rep.summaries.push_back(std::move(s));
  }
  rep.failed_trials = 0;
  for (const TrialRecord& rec : rep.trials)
    if (!rec.ok) ++rep.failed_trials;
}

const MetricSummary* find_summary(const ExperimentReport& rep,
                                  const std::string& name) {
  for (const MetricSummary& s : rep.summaries)
    if (s.name == name) return &s;
  return nullptr;
}

enum class Agg { mean, max };

void add_criterion(ExperimentReport& rep, const std::string& name,
                   const std::string& metric, Agg agg, double lo, double hi) {
  CriterionResult c;
  c.name = name;
  c.lower = lo;
  c.upper = hi;
  const MetricSummary* s = find_summary(rep, metric);
  if (s == nullptr || s->count == 0) {
    c.value = std::numeric_limits<double>::quiet_NaN();
    c.passed = false;
  } else {
    c.value = agg == Agg::mean ? s->mean : s->max;
    c.passed = c.value >= lo && c.value <= hi;
  }
  rep.criteria.push_back(std::move(c));
}

// Criterion whose upper edge is itself a recorded number.
void add_criterion_vs_metric(ExperimentReport& rep, const std::string& name,
                             const std::string& value_metric,
                             const std::string& upper_metric) {
  const MetricSummary* v = find_summary(rep, value_metric);
  const MetricSummary* u = find_summary(rep, upper_metric);
  CriterionResult c;
  c.name = name;
  c.lower = 0.0;
  if (v == nullptr || u == nullptr || v->count == 0 || u->count == 0) {
    c.value = std::numeric_limits<double>::quiet_NaN();
    c.upper = std::numeric_limits<double>::quiet_NaN();
    c.passed = false;
  } else {
    c.value = v->mean;
    c.upper = u->mean;
    c.passed = c.value >= c.lower && c.value <= c.upper;
  }
  rep.criteria.push_back(std::move(c));
}

// ---------------------------------------------------------------------------
// experiment drivers

void run_esd(const ExperimentConfig& cfg, ExperimentReport& rep) {
  run_trials(cfg, rep, [&](std::size_t t, TrialRecord& rec) {
    const PlantedInstance inst = build_planted(spec_for(cfg, t));
    const Spectrum sp = eigen(inst.matrix);
    const ESDStats st = circular_law_stats(sp, cfg.r);
    add_metric(rec, "radial_ks", st.radial_ks);
    add_metric(rec, "angular_ks", st.angular_ks);
    add_metric(rec, "clipped", static_cast<double>(st.clipped_count));
    if (t == 0) rep.scatter = sp.eigenvalues;
  });
  summarize(rep);
  if (cfg.trials == 0) return;
  add_criterion(rep, "radial-ks-mean", "radial_ks", Agg::mean, 0.0,
                kKsTolerance);
  add_criterion(rep, "angular-ks-mean", "angular_ks", Agg::mean, 0.0,
                kKsTolerance);
}

void run_outliers(const ExperimentConfig& cfg, ExperimentReport& rep) {
  run_trials(cfg, rep, [&](std::size_t t, TrialRecord& rec) {
    const PlantedInstance inst = build_planted(spec_for(cfg, t));
    const Spectrum sp = eigen(inst.matrix);
    for (std::size_t i = 0; i < cfg.r; ++i)
      add_metric(rec, "outlier_" + std::to_string(i + 1),
                 std::abs(sp.eigenvalues[i]));
    add_metric(rec, "bulk_edge", std::abs(sp.eigenvalues[cfg.r]));
    if (cfg.gap > 0.0) {
      CVector roots = outlier_roots_via_resolvent(inst, cfg.gap);
      std::sort(roots.begin(), roots.end(), [](cdouble a, cdouble b) {
        if (std::abs(a) != std::abs(b)) return std::abs(a) > std::abs(b);
        if (a.real() != b.real()) return a.real() > b.real();
        return a.imag() > b.imag();
      });
      double worst = 0.0;
      for (std::size_t i = 0; i < roots.size(); ++i)
        worst = std::max(worst, std::abs(roots[i] - sp.eigenvalues[i]));
      add_metric(rec, "resolvent_match", worst);
    }
    if (t == 0) rep.scatter = sp.eigenvalues;
  });
  summarize(rep);
  if (cfg.trials == 0) return;
  for (std::size_t i = 0; i < cfg.r; ++i) {
    const double c = cfg.lambdas[i];
    add_criterion(rep, "outlier-" + std::to_string(i + 1) + "-mean",
                  "outlier_" + std::to_string(i + 1), Agg::mean, c - 0.1,
                  c + 0.1);
  }
  add_criterion(rep, "bulk-edge-mean", "bulk_edge", Agg::mean, 0.95, 1.1);
  if (cfg.gap > 0.0)
    add_criterion(rep, "resolvent-match-max", "resolvent_match", Agg::max,
                  0.0, 1e-6);
}

void run_alignment(const ExperimentConfig& cfg, ExperimentReport& rep) {
  run_trials(cfg, rep, [&](std::size_t t, TrialRecord& rec) {
    const PlantedInstance inst = build_planted(spec_for(cfg, t));
    const Spectrum sp = eigen(inst.matrix);
    const AlignmentReport ar = alignment(inst, sp);
    add_metric(rec, "overlap_sq", ar.overlaps[0][0]);
    for (std::size_t j = 0; j < cfg.r; ++j)
      add_metric(rec, "weighted_sum_" + std::to_string(j + 1),
                 ar.weighted_sums[j]);
    add_metric(rec, "aligned_distance", ar.phase_aligned_distance);
  });
  summarize(rep);
  if (cfg.trials == 0) return;
  if (cfg.r == 1) {
    const double limit = alignment_limit(cfg.lambdas[0]);
    add_criterion(rep, "overlap-mean", "overlap_sq", Agg::mean,
                  limit * limit - 0.05, limit * limit + 0.05);
  } else {
    for (std::size_t j = 0; j < cfg.r; ++j) {
      const double center = cfg.lambdas[j] * cfg.lambdas[j] - 1.0;
      const double half = std::max(0.3, 0.05 * center);
      add_criterion(rep, "weighted-sum-" + std::to_string(j + 1) + "-mean",
                    "weighted_sum_" + std::to_string(j + 1), Agg::mean,
                    center - half, center + half);
    }
  }
}

void run_power(const ExperimentConfig& cfg, ExperimentReport& rep) {
  std::vector<double> gaps;
  if (cfg.gap > 0.0)
    gaps.push_back(cfg.gap);
  else
    gaps = {0.1, 0.05, 0.025};
  std::vector<double> bounds;
  for (double g : gaps)
    bounds.push_back(power_method_iteration_bound(
        1.0, static_cast<double>(cfg.d), kPowerEpsilon, g));
  for (double g : gaps) {
    const ComplexMatrix a = example1_matrix(cfg.d, g);
    const std::string metric = "iterations@" + fmt_g(g);
    for (std::size_t t = 0; t < cfg.trials; ++t) {
      TrialRecord rec;
      rec.index = rep.trials.size();
      try {
        Rng rng(Seed{cfg.seed, t}, kAuxBlock);
        const CVector v0 = sphere_vector(cfg.d, true, rng);
        const auto stop = [](std::size_t, const CVector& v) {
          return 2.0 - 2.0 * std::abs(v[0]) <= kPowerEpsilon;
        };
        const PowerMethodResult res = power_method(
            a, v0, 100000, PowerMethodTarget::fixed(), stop);
        add_metric(rec, metric, static_cast<double>(res.iterations));
      } catch (const Error& e) {
        rec.ok = false;
        rec.error = e.code();
        rec.metrics.clear();
      }
      rep.trials.push_back(std::move(rec));
    }
  }
  summarize(rep);
  if (cfg.trials == 0) return;
  for (std::size_t i = 0; i < gaps.size(); ++i)
    add_criterion(rep, "factor-2@" + fmt_g(gaps[i]),
                  "iterations@" + fmt_g(gaps[i]), Agg::mean, 0.0,
                  2.0 * bounds[i]);
  for (std::size_t i = 0; i + 1 < gaps.size(); ++i) {
    const double num = metric_mean(rep, "iterations@" + fmt_g(gaps[i + 1]));
    const double den = metric_mean(rep, "iterations@" + fmt_g(gaps[i]));
    CriterionResult c;
    c.name = "scaling@" + fmt_g(gaps[i + 1]) + "/" + fmt_g(gaps[i]);
    c.lower = 1.7;
    c.upper = 2.3;
    c.value = num / den;
    c.passed = std::isfinite(c.value) && c.value >= c.lower &&
               c.value <= c.upper;
    rep.criteria.push_back(std::move(c));
  }
}

void run_querybound(const ExperimentConfig& cfg, ExperimentReport& rep) {
  const double lambda = cfg.lambdas[0];
  const double gap = (lambda - 1.0) / lambda;
  const ThresholdSchedule sched =
      ThresholdSchedule::from_gap(gap, cfg.delta, cfg.d);
  std::vector<double> bounds(kQueryRounds + 1, 0.0);
  for (std::size_t k = 1; k <= kQueryRounds; ++k)
    bounds[k] = overlap_bound(sched, k);
  run_trials(cfg, rep, [&](std::size_t t, TrialRecord& rec) {
    const PlantedInstance inst = build_planted(spec_for(cfg, t));
    CVector u(cfg.d);
    for (std::size_t i = 0; i < cfg.d; ++i) u[i] = inst.truth.columns(i, 0);
    const bool complex_field = inst.spec.field == Field::complex;

    QueryOracle power_oracle(inst, QueryMode::one_side, kQueryRounds);
    Rng rng(Seed{cfg.seed, t}, kAuxBlock);
    const CVector v0 = sphere_vector(cfg.d, complex_field, rng);
    power_method(power_oracle, v0, kQueryRounds, PowerMethodTarget::fixed());

    QueryOracle base_oracle(inst, QueryMode::one_side, kQueryRounds);
    random_query_baseline(base_oracle, kQueryRounds,
                          Seed{cfg.seed, (std::uint64_t{1} << 32) + t});

    const auto violated = [&](const QueryOracle& o) {
      for (std::size_t k = 1; k <= o.ledger().rounds(); ++k)
        if (o.ledger().overlap_potential_at_round(u, k) > bounds[k])
          return 1.0;
      return 0.0;
    };
    add_metric(rec, "violation_power", violated(power_oracle));
    add_metric(rec, "violation_baseline", violated(base_oracle));
  });
  summarize(rep);
  if (cfg.trials == 0) return;
  add_criterion(rep, "power-violation-rate", "violation_power", Agg::mean,
                0.0, cfg.delta + 0.13);
  add_criterion(rep, "baseline-violation-rate", "violation_baseline",
                Agg::mean, 0.0, cfg.delta + 0.13);
}

void run_twoside(const ExperimentConfig& cfg, ExperimentReport& rep) {
  if (cfg.trials == 0) {
    summarize(rep);
    return;
  }
  const std::size_t d = cfg.d;
  const std::size_t m = cfg.r;
  const std::size_t n = cfg.trials;
  TrialRecord rec;
  rec.index = 0;
  try {
    const StiefelFrame frame =
        sample_stiefel(d, m + 1, Field::real, Seed{cfg.seed, 0});
    std::vector<std::vector<double>> basis(m, std::vector<double>(d));
    std::vector<double> v(d);
    for (std::size_t i = 0; i < d; ++i) {
      for (std::size_t j = 0; j < m; ++j)
        basis[j][i] = frame.columns(i, j).real();
      v[i] = frame.columns(i, m).real();
    }
    CVector vc(d);
    for (std::size_t i = 0; i < d; ++i) vc[i] = v[i];

    const double inv_sqrt_d = 1.0 / std::sqrt(static_cast<double>(d));
    std::vector<double> sum_s(d, 0.0), sum_t(d, 0.0);
    std::vector<double> acc_ss(d * d, 0.0), acc_tt(d * d, 0.0),
        acc_st(d * d, 0.0);
    std::vector<double> wr(d), zr(d), s(d), td(d);
    for (std::size_t i = 0; i < n; ++i) {
      const ComplexMatrix w =
          sample_iid(d, EntryLaw::real_gaussian, Seed{cfg.seed, 1 + i});
      const CVector wv = matvec(w, vc);
      const CVector zv = matvec_adj(w, vc);
      for (std::size_t j = 0; j < d; ++j) {
        wr[j] = wv[j].real() * inv_sqrt_d;
        zr[j] = zv[j].real() * inv_sqrt_d;
      }
      for (const auto& b : basis) {
        double cw = 0.0, cz = 0.0;
        for (std::size_t j = 0; j < d; ++j) {
          cw += b[j] * wr[j];
          cz += b[j] * zr[j];
        }
        for (std::size_t j = 0; j < d; ++j) {
          wr[j] -= cw * b[j];
          zr[j] -= cz * b[j];
        }
      }
      for (std::size_t j = 0; j < d; ++j) {
        s[j] = wr[j] + zr[j];
        td[j] = wr[j] - zr[j];
        sum_s[j] += s[j];
        sum_t[j] += td[j];
      }
      for (std::size_t a = 0; a < d; ++a) {
        const double sa = s[a];
        const double ta = td[a];
        double* rs = acc_ss.data() + a * d;
        double* rt = acc_tt.data() + a * d;
        double* rc = acc_st.data() + a * d;
        for (std::size_t b2 = 0; b2 < d; ++b2) {
          rs[b2] += sa * s[b2];
          rt[b2] += ta * td[b2];
          rc[b2] += sa * td[b2];
        }
      }
    }
    const double nn = static_cast<double>(n);
    const auto cov = [&](const std::vector<double>& acc,
                         const std::vector<double>& ma,
                         const std::vector<double>& mb) {
      std::vector<double> c(d * d);
      for (std::size_t a = 0; a < d; ++a)
        for (std::size_t b2 = 0; b2 < d; ++b2)
          c[a * d + b2] = (acc[a * d + b2] - ma[a] * mb[b2] / nn) / (nn - 1.0);
      return c;
    };
    const std::vector<double> css = cov(acc_ss, sum_s, sum_s);
    const std::vector<double> ctt = cov(acc_tt, sum_t, sum_t);
    const std::vector<double> cst = cov(acc_st, sum_s, sum_t);

    // P(I +- vv^T)P with P v = v, so the target is (2/d)(P +- vv^T).
    std::vector<double> proj(d * d, 0.0);
    for (std::size_t i = 0; i < d; ++i) proj[i * d + i] = 1.0;
    for (const auto& b : basis)
      for (std::size_t a = 0; a < d; ++a)
        for (std::size_t b2 = 0; b2 < d; ++b2)
          proj[a * d + b2] -= b[a] * b[b2];
    const double scale2 = 2.0 / static_cast<double>(d);
    // Both the estimate and the target are symmetric, so the exact operator
    // norm is the extreme Jacobi eigenvalue.
    const auto opnorm = [&](const std::vector<double>& mdat) {
      std::vector<double> evals, vecs;
      jacobi_sym_eig(mdat, d, evals, vecs);
      return std::max(std::abs(evals.front()), std::abs(evals.back()));
    };
    std::vector<double> target(d * d), diff(d * d);
    double sum_err = 0.0, diff_err = 0.0, target_norm = 0.0;
    for (int sign = 0; sign < 2; ++sign) {
      for (std::size_t a = 0; a < d; ++a)
        for (std::size_t b2 = 0; b2 < d; ++b2) {
          const double vterm = v[a] * v[b2];
          target[a * d + b2] =
              scale2 * (proj[a * d + b2] + (sign == 0 ? vterm : -vterm));
        }
      const std::vector<double>& est = sign == 0 ? css : ctt;
      for (std::size_t i = 0; i < d * d; ++i)
        diff[i] = est[i] - target[i];
      const double tn = opnorm(target);
      const double en = opnorm(diff);
      if (sign == 0) {
        sum_err = en / tn;
        target_norm = tn;
      } else {
        diff_err = en / tn;
      }
    }
    const double threshold = 4.0 * scale2 / std::sqrt(nn);
    double cross_max = 0.0;
    std::size_t exceed = 0;
    for (std::size_t i = 0; i < d * d; ++i) {
      const double aval = std::abs(cst[i]);
      cross_max = std::max(cross_max, aval);
      if (aval > threshold) ++exceed;
    }
    add_metric(rec, "sum_cov_rel_err", sum_err);
    add_metric(rec, "diff_cov_rel_err", diff_err);
    add_metric(rec, "target_norm", target_norm);
    add_metric(rec, "cross_max_abs", cross_max);
    add_metric(rec, "cross_threshold", threshold);
    add_metric(rec, "cross_exceed", static_cast<double>(exceed));
  } catch (const Error& e) {
    rec.ok = false;
    rec.error = e.code();
    rec.metrics.clear();
  }
  rep.trials.push_back(std::move(rec));
  summarize(rep);
  add_criterion(rep, "sum-covariance", "sum_cov_rel_err", Agg::mean, 0.0,
                0.20);
  add_criterion(rep, "cross-covariance", "cross_exceed", Agg::mean, 0.0, 0.0);
}

std::string variant_metric(HwVariant v) {
  std::string s = to_string(v);
  for (char& c : s)
    if (c == '-') c = '_';
  return s;
}

void run_concentration(const ExperimentConfig& cfg, ExperimentReport& rep) {
  if (cfg.trials == 0) {
    summarize(rep);
    return;
  }
  const std::uint64_t seed = cfg.seed;
  const auto sub = [&](auto&& body) {
    TrialRecord rec;
    rec.index = rep.trials.size();
    try {
      body(rec);
    } catch (const Error& e) {
      rec.ok = false;
      rec.error = e.code();
      rec.metrics.clear();
    }
    rep.trials.push_back(std::move(rec));
  };

  sub([&](TrialRecord& rec) {
    const StiefelFrame frame =
        sample_stiefel(500, 10, Field::real, Seed{seed, 1000000});
    const TailTestReport r = entropy_tail_empirical(
        500, frame.columns, 40.0, 100000, Seed{seed, 1200000});
    add_metric(rec, "entropy_bound", r.bound_value);
    add_metric(rec, "entropy_freq", r.empirical_frequency);
    add_metric(rec, "entropy_limit",
               r.bound_value + (r.wilson_interval.hi - r.wilson_interval.lo));
  });

  const HwVariant variants[] = {
      HwVariant::real_stiefel,          HwVariant::complex_matrix,
      HwVariant::complex_stiefel_r1,    HwVariant::complex_stiefel_general,
      HwVariant::general_case_real,     HwVariant::general_case_complex};
  for (std::size_t i = 0; i < 6; ++i) {
    const HwVariant var = variants[i];
    sub([&](TrialRecord& rec) {
      const std::size_t d = 500;
      ComplexMatrix a;
      if (var == HwVariant::real_stiefel ||
          var == HwVariant::general_case_real) {
        a = sample_goe(d, Seed{seed, 2000000 + i});
      } else {
        const ComplexMatrix b = sample_cginoe(d, Seed{seed, 2000000 + i});
        a = ComplexMatrix(d, d);
        const double inv_sqrt2 = 1.0 / std::sqrt(2.0);
        for (std::size_t p = 0; p < d; ++p)
          for (std::size_t q = 0; q < d; ++q)
            a(p, q) = (b(p, q) + std::conj(b(q, p))) * inv_sqrt2;
      }
      const std::size_t r = var == HwVariant::complex_stiefel_r1 ? 1 : 2;
      const TailTestReport rp = hw_empirical(a, r, var, 15.0, 2000,
                                             Seed{seed, 2100000 + 10000 * i});
      const std::string tag = "hw_" + variant_metric(var);
      add_metric(rec, tag + "_prob", rp.bound_value);
      add_metric(rec, tag + "_freq", rp.empirical_frequency);
      add_metric(rec, tag + "_limit",
                 rp.bound_value +
                     (rp.wilson_interval.hi - rp.wilson_interval.lo));
    });
  }

  for (std::size_t k = 1; k <= 3; ++k) {
    sub([&](TrialRecord& rec) {
      const MomentEstimate est =
          moment_cross_check(1000, k, k, EntryLaw::complex_gaussian, 50,
                             Seed{seed, 3000000 + 1000 * k});
      const std::string tag = "uwwu_diag_k" + std::to_string(k);
      add_metric(rec, tag + "_err", std::abs(est.mean - cdouble(1.0)));
      add_metric(rec, tag + "_se", est.std_error);
    });
  }
  sub([&](TrialRecord& rec) {
    const MomentEstimate est = moment_cross_check(
        1000, 1, 2, EntryLaw::complex_gaussian, 50, Seed{seed, 3100000});
    add_metric(rec, "uwwu_offdiag_err", std::abs(est.mean));
    add_metric(rec, "uwwu_offdiag_se", est.std_error);
  });

  for (std::size_t k = 1; k <= 3; ++k) {
    sub([&](TrialRecord& rec) {
      const auto [emp, bound] =
          moment_uwu_check(1000, k, 200, Seed{seed, 3200000 + 1000 * k});
      const std::string tag = "uwu_k" + std::to_string(k);
      add_metric(rec, tag + "_emp", emp);
      add_metric(rec, tag + "_bound", bound);
    });
  }

  sub([&](TrialRecord& rec) {
    const std::vector<double> mu = {1.0, 0.0, 0.0};
    const std::vector<double> sigma = {1.0, 0.0, 0.0, 0.0, 1.0,
                                       0.0, 0.0, 0.0, 1.0};
    const double closed = gaussian_ratio_moment(mu, sigma, 1.0);
    const double emp = gaussian_ratio_empirical(mu, sigma, 1.0, 1000000,
                                                Seed{seed, 3300000});
    add_metric(rec, "ratio_closed", closed);
    add_metric(rec, "ratio_emp", emp);
    add_metric(rec, "ratio_rel_err", std::abs(emp - closed) / closed);
  });

  sub([&](TrialRecord& rec) {
    double worst = 0.0;
    double bound = 0.0;
    for (std::size_t j = 0; j < 10; ++j) {
      const auto [val, b] =
          resolvent_norm_check(2.0, 1000, Seed{seed, 3400000 + 16 * j});
      worst = std::max(worst, val);
      bound = b;
    }
    add_metric(rec, "resolvent_max", worst);
    add_metric(rec, "resolvent_bound", bound);
  });

  summarize(rep);
  add_criterion_vs_metric(rep, "entropy-tail", "entropy_freq",
                          "entropy_limit");
  for (HwVariant var : variants) {
    const std::string tag = "hw_" + variant_metric(var);
    add_criterion_vs_metric(rep, "hw-" + to_string(var), tag + "_freq",
                            tag + "_limit");
  }
  for (std::size_t k = 1; k <= 3; ++k)
    add_criterion(rep, "uwwu-diag-k" + std::to_string(k),
                  "uwwu_diag_k" + std::to_string(k) + "_err", Agg::mean, 0.0,
                  0.1);
  add_criterion(rep, "uwwu-offdiag", "uwwu_offdiag_err", Agg::mean, 0.0, 0.1);
  for (std::size_t k = 1; k <= 3; ++k)
    add_criterion_vs_metric(rep, "uwu-k" + std::to_string(k),
                            "uwu_k" + std::to_string(k) + "_emp",
                            "uwu_k" + std::to_string(k) + "_bound");
  add_criterion(rep, "gaussian-ratio", "ratio_rel_err", Agg::mean, 0.0, 0.05);
  add_criterion(rep, "resolvent-norm", "resolvent_max", Agg::mean, 0.0, 8.5);
}

}  // namespace

// ---------------------------------------------------------------------------
// config plumbing

ExperimentConfig default_config(const std::string& experiment) {
  ExperimentConfig c;
  c.experiment = experiment;
  if (experiment == "esd") {
    c.d = 2000;
    c.r = 3;
    c.lambdas = {3.0, 2.0, 1.5};
    c.trials = 1;
  } else if (experiment == "outliers") {
    c.d = 1000;
    c.r = 2;
    c.lambdas = {3.0, 2.0};
    c.trials = 20;
  } else if (experiment == "alignment") {
    c.d = 1000;
    c.r = 1;
    c.lambdas = {2.0};
    c.trials = 20;
  } else if (experiment == "power") {
    c.d = 1000;
    c.r = 0;
    c.lambdas = {};
    c.gap = 0.0;
    c.trials = 20;
  } else if (experiment == "querybound") {
    c.d = 1000;
    c.r = 1;
    c.lambdas = {2.0};
    c.delta = 0.1;
    c.trials = 50;
  } else if (experiment == "twoside") {
    c.d = 200;
    c.r = 3;
    c.lambdas = {};
    c.trials = 5000;
  } else if (experiment == "concentration") {
    c.d = 500;
    c.r = 0;
    c.lambdas = {};
    c.trials = 1;
  } else {
    fail("config-error", "experiment: unknown name '" + experiment + "'");
  }
  return c;
}

void validate_config(const ExperimentConfig& cfg) {
  const auto& names = experiment_names();
  if (std::find(names.begin(), names.end(), cfg.experiment) == names.end())
    fail("config-error", "experiment: unknown name '" + cfg.experiment + "'");
  if (cfg.d < 2) fail("config-error", "d: must be >= 2");
  try {
    entry_law_from_string(cfg.entry_law);
  } catch (const Error&) {
    fail("config-error", "entry_law: unknown law '" + cfg.entry_law + "'");
  }
  if (!(cfg.delta > 0.0 && cfg.delta < 1.0))
    fail("config-error", "delta: must be in (0, 1)");
  const bool spiked = cfg.experiment == "esd" || cfg.experiment == "outliers" ||
                      cfg.experiment == "alignment" ||
                      cfg.experiment == "querybound";
  if (spiked) {
    if (cfg.r == 0) fail("config-error", "r: must be >= 1");
    if (cfg.r + 1 > cfg.d) fail("config-error", "r: must be < d");
    if (cfg.lambdas.size() != cfg.r)
      fail("config-error", "lambdas: size must equal r");
    for (std::size_t i = 0; i < cfg.lambdas.size(); ++i) {
      if (!(cfg.lambdas[i] > 1.0))
        fail("config-error", "lambdas: entries must exceed 1");
      if (i > 0 && cfg.lambdas[i] > cfg.lambdas[i - 1])
        fail("config-error", "lambdas: must be non-increasing");
    }
  }
  if (cfg.experiment == "querybound") {
    if (!(cfg.lambdas[0] <= 2.0))
      fail("config-error", "lambdas: spike must be in (1, 2] here");
    if (!(cfg.delta < 0.36787944117144233))
      fail("config-error", "delta: must be below 1/e");
  }
  if (cfg.experiment == "power") {
    if (cfg.gap != 0.0 && !(cfg.gap > 0.0 && cfg.gap <= 0.5))
      fail("config-error", "gap: must be 0 (sweep) or in (0, 1/2]");
  } else if (cfg.experiment == "outliers") {
    if (cfg.gap < 0.0) fail("config-error", "gap: must be >= 0");
    if (cfg.gap > 0.0 && !(cfg.lambdas.back() > 1.0 + 3.0 * cfg.gap))
      fail("config-error", "gap: needs lambda_r > 1 + 3 gap");
  } else if (cfg.gap < 0.0 || cfg.gap > 0.5) {
    fail("config-error", "gap: must be in [0, 1/2]");
  }
  if (cfg.experiment == "twoside") {
    if (cfg.r == 0) fail("config-error", "r: history must be >= 1");
    if (cfg.r + 2 > cfg.d) fail("config-error", "r: history too long for d");
    if (cfg.trials == 1)
      fail("config-error", "trials: covariance needs 0 or >= 2 draws");
  }
}

ExperimentConfig config_from_json_text(const std::string& text) {
  const json j = json::parse(text, nullptr, false);
  if (j.is_discarded()) fail("config-error", "not valid JSON");
  if (!j.is_object()) fail("config-error", "top level must be an object");
  if (!j.contains("experiment") || !j.at("experiment").is_string())
    fail("config-error", "experiment: required string field");
  ExperimentConfig c = default_config(j.at("experiment").get<std::string>());
  bool saw_r = false;
  bool saw_lambdas = false;
  for (const auto& [key, value] : j.items()) {
    if (key == "experiment") continue;
    if (key == "d" || key == "r" || key == "trials" || key == "seed") {
      if (!value.is_number_unsigned())
        fail("config-error", key + ": must be a nonnegative integer");
      const auto u = value.get<std::uint64_t>();
      if (key == "d")
        c.d = static_cast<std::size_t>(u);
      else if (key == "r")
        c.r = static_cast<std::size_t>(u), saw_r = true;
      else if (key == "trials")
        c.trials = static_cast<std::size_t>(u);
      else
        c.seed = u;
    } else if (key == "gap" || key == "delta") {
      if (!value.is_number())
        fail("config-error", key + ": must be a number");
      (key == "gap" ? c.gap : c.delta) = value.get<double>();
    } else if (key == "lambdas") {
      if (!value.is_array())
        fail("config-error", "lambdas: must be an array of numbers");
      c.lambdas.clear();
      for (const auto& e : value) {
        if (!e.is_number())
          fail("config-error", "lambdas: must be an array of numbers");
        c.lambdas.push_back(e.get<double>());
      }
      saw_lambdas = true;
    } else if (key == "entry_law" || key == "output_dir") {
      if (!value.is_string())
        fail("config-error", key + ": must be a string");
      (key == "entry_law" ? c.entry_law : c.output_dir) =
          value.get<std::string>();
    } else {
      fail("config-error", "unexpected field '" + key + "'");
    }
  }
  if (saw_lambdas && !saw_r) c.r = c.lambdas.size();
  validate_config(c);
  return c;
}

ExperimentConfig config_from_json_file(const std::string& path) {
  std::ifstream ifs(path, std::ios::binary);
  if (!ifs) fail("io-error", "cannot open config file: " + path);
  std::ostringstream ss;
  ss << ifs.rdbuf();
  return config_from_json_text(ss.str());
}

namespace {

json config_json(const ExperimentConfig& c) {
  json j;
  j["experiment"] = c.experiment;
  j["d"] = c.d;
  j["r"] = c.r;
  j["lambdas"] = c.lambdas;
  j["gap"] = c.gap;
  j["delta"] = c.delta;
  j["trials"] = c.trials;
  j["seed"] = c.seed;
  j["entry_law"] = c.entry_law;
  j["output_dir"] = c.output_dir;
  return j;
}

json finite_or_null(double x) {
  if (std::isfinite(x)) return x;
  return nullptr;
}

json report_json(const ExperimentReport& rep) {
  json j;
  j["config"] = config_json(rep.config);
  json crits = json::array();
  for (const CriterionResult& c : rep.criteria) {
    json e;
    e["name"] = c.name;
    e["value"] = finite_or_null(c.value);
    e["lower"] = finite_or_null(c.lower);
    e["upper"] = finite_or_null(c.upper);
    e["passed"] = c.passed;
    crits.push_back(std::move(e));
  }
  j["criteria"] = std::move(crits);
  json sums = json::array();
  for (const MetricSummary& s : rep.summaries) {
    json e;
    e["name"] = s.name;
    e["count"] = s.count;
    e["mean"] = s.mean;
    e["stddev"] = s.stddev;
    e["ci_half_width"] = s.ci_half_width;
    e["min"] = s.min;
    e["max"] = s.max;
    sums.push_back(std::move(e));
  }
  j["summaries"] = std::move(sums);
  json trials = json::array();
  for (const TrialRecord& t : rep.trials) {
    json e;
    e["index"] = t.index;
    e["ok"] = t.ok;
    e["error"] = t.error;
    json ms = json::object();
    for (const auto& [name, v] : t.metrics) ms[name] = v;
    e["metrics"] = std::move(ms);
    trials.push_back(std::move(e));
  }
  j["trials"] = std::move(trials);
  j["failed_trials"] = rep.failed_trials;
  j["wall_time_s"] = rep.wall_time_s;
  return j;
}

}  // namespace

std::string config_json_text(const ExperimentConfig& cfg) {
  return config_json(cfg).dump(2) + "\n";
}

ExperimentReport run(const ExperimentConfig& cfg) {
  validate_config(cfg);
  ExperimentReport rep;
  rep.config = cfg;
  if (cfg.trials == 0) return rep;  // nothing to run, nothing to judge
  const auto t0 = std::chrono::steady_clock::now();
  if (cfg.experiment == "esd")
    run_esd(cfg, rep);
  else if (cfg.experiment == "outliers")
    run_outliers(cfg, rep);
  else if (cfg.experiment == "alignment")
    run_alignment(cfg, rep);
  else if (cfg.experiment == "power")
    run_power(cfg, rep);
  else if (cfg.experiment == "querybound")
    run_querybound(cfg, rep);
  else if (cfg.experiment == "twoside")
    run_twoside(cfg, rep);
  else
    run_concentration(cfg, rep);
  rep.wall_time_s =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
          .count();
  return rep;
}

std::string report_json_text(const ExperimentReport& rep) {
  return report_json(rep).dump(2) + "\n";
}

std::string report_signature(const ExperimentReport& rep) {
  json j = report_json(rep);
  j.erase("wall_time_s");
  return j.dump();
}

double metric_mean(const ExperimentReport& rep, const std::string& name) {
  const MetricSummary* s = find_summary(rep, name);
  if (s == nullptr || s->count == 0)
    return std::numeric_limits<double>::quiet_NaN();
  return s->mean;
}

void emit_json(const ExperimentReport& rep, const std::string& path) {
  std::ofstream ofs(path, std::ios::binary);
  if (!ofs) fail("io-error", "cannot open for writing: " + path);
  ofs << report_json_text(rep);
  ofs.flush();
  if (!ofs.good()) fail("io-error", "write failed: " + path);
}

void emit_csv(const ExperimentReport& rep, const std::string& path) {
  std::vector<std::string> columns;
  for (const TrialRecord& t : rep.trials)
    for (const auto& [name, v] : t.metrics)
      if (std::find(columns.begin(), columns.end(), name) == columns.end())
        columns.push_back(name);
  std::ofstream ofs(path, std::ios::binary);
  if (!ofs) fail("io-error", "cannot open for writing: " + path);
  ofs << "trial,ok,error";
  for (const std::string& c : columns) ofs << "," << c;
  ofs << "\n";
  char buf[64];
  for (const TrialRecord& t : rep.trials) {
    std::map<std::string, double> lookup(t.metrics.begin(), t.metrics.end());
    ofs << t.index << "," << (t.ok ? 1 : 0) << "," << t.error;
    for (const std::string& c : columns) {
      ofs << ",";
      const auto it = lookup.find(c);
      if (it != lookup.end()) {
        std::snprintf(buf, sizeof buf, "%.17g", it->second);
        ofs << buf;
      }
    }
    ofs << "\n";
  }
  ofs.flush();
  if (!ofs.good()) fail("io-error", "write failed: " + path);
}

void emit_svg_scatter(const CVector& eigenvalues, const std::string& path) {
  std::ofstream ofs(path, std::ios::binary);
  if (!ofs) fail("io-error", "cannot open for writing: " + path);
  double max_abs_z = 1.0;
  for (const cdouble& z : eigenvalues) max_abs_z = std::max(max_abs_z, std::abs(z));
  // unit radius in viewBox coordinates, shrunk so every point stays on canvas
  const double scale = std::min(312.5, 470.0 / max_abs_z);
  ofs << "<svg xmlns=\"http://www.w3.org/2000/svg\" "
         "viewBox=\"0 0 1000 1000\">\n";
  ofs << "<rect width=\"1000\" height=\"1000\" fill=\"white\"/>\n";
  ofs << "<circle cx=\"500\" cy=\"500\" r=\"" << scale
      << "\" fill=\"none\" stroke=\"#808080\" stroke-width=\"2\"/>\n";
  char buf[128];
  for (const cdouble& z : eigenvalues) {
    const double cx = 500.0 + scale * z.real();
    const double cy = 500.0 - scale * z.imag();
    std::snprintf(buf, sizeof buf,
                  "<circle cx=\"%.6g\" cy=\"%.6g\" r=\"3\" "
                  "fill=\"#1f6fb2\" fill-opacity=\"0.7\"/>\n",
                  cx, cy);
    ofs << buf;
  }
  ofs << "</svg>\n";
  ofs.flush();
  if (!ofs.good()) fail("io-error", "write failed: " + path);
}

namespace {

void print_report(const ExperimentReport& rep) {
  std::printf("experiment %s: d=%zu trials=%zu failed=%zu wall=%.2fs\n",
              rep.config.experiment.c_str(), rep.config.d, rep.trials.size(),
              rep.failed_trials, rep.wall_time_s);
  for (const MetricSummary& s : rep.summaries)
    std::printf("  %-24s mean=%-12.6g stddev=%-12.6g n=%zu\n",
                s.name.c_str(), s.mean, s.stddev, s.count);
  for (const CriterionResult& c : rep.criteria)
    std::printf("  [%s] %-24s value=%.6g window=[%.6g, %.6g]\n",
                c.passed ? "PASS" : "FAIL", c.name.c_str(), c.value, c.lower,
                c.upper);
}

void emit_outputs(const ExperimentReport& rep, const std::string& out) {
  std::error_code ec;
  std::filesystem::create_directories(out, ec);
  if (ec) fail("io-error", "cannot create directory: " + out);
  const std::string base = out + "/" + rep.config.experiment;
  emit_json(rep, base + "-report.json");
  emit_csv(rep, base + "-trials.csv");
  if (!rep.scatter.empty())
    emit_svg_scatter(rep.scatter, base + "-eigenvalues.svg");
}

}  // namespace

int cli(int argc, char** argv) {
  CLI::App app{
      "Random-matrix spike experiments: eigenvalue outliers, circular-law "
      "statistics, eigenvector alignment, power iteration, matrix-vector "
      "query bounds, and concentration checks."};
  app.require_subcommand(0, 1);
  for (const std::string& name : experiment_names())
    app.add_subcommand(name, "run the " + name + " experiment")
        ->fallthrough();
  app.add_subcommand("all", "run every experiment with default settings")
      ->fallthrough();

  std::string config_path, out_dir;
  std::size_t d_val = 0, trials_val = 0;
  std::uint64_t seed_val = 0;
  double gap_val = 0.0;
  std::vector<double> lambda_vals;
  int threads_val = 0;
  bool check_flag = false;
  auto* opt_config =
      app.add_option("--config", config_path, "JSON config file");
  auto* opt_d = app.add_option("--d", d_val, "matrix dimension");
  auto* opt_gap = app.add_option(
      "--gap", gap_val,
      "spectral gap (power: 0 sweeps the default list; outliers: "
      "detection margin enabling the determinant-root cross-check)");
  auto* opt_lambda = app.add_option("--lambda", lambda_vals,
                                    "spike strengths, largest first");
  auto* opt_trials = app.add_option("--trials", trials_val, "trial count");
  auto* opt_seed = app.add_option("--seed", seed_val, "base RNG seed");
  auto* opt_out =
      app.add_option("--out", out_dir, "directory for JSON/CSV/SVG output");
  auto* opt_threads =
      app.add_option("--threads", threads_val, "worker thread cap");
  app.add_flag("--check", check_flag,
               "exit 2 when any criterion window fails");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    std::printf("%s", app.help().c_str());
    return 0;
  } catch (const CLI::CallForAllHelp&) {
    std::printf("%s", app.help().c_str());
    return 0;
  } catch (const CLI::ParseError& e) {
    std::fprintf(stderr, "%s\n%s", e.what(), app.help().c_str());
    return 1;
  }

  int threads = 0;
  if (opt_threads->count() > 0) {
    threads = threads_val;
  } else if (const char* env = std::getenv("THREADS")) {
    threads = std::atoi(env);
  }
  if (threads > 0) set_threads(threads);

  std::string sub_name;
  for (const CLI::App* sub : app.get_subcommands()) sub_name = sub->get_name();

  try {
    std::vector<ExperimentConfig> configs;
    if (sub_name == "all") {
      for (const std::string& name : experiment_names())
        configs.push_back(default_config(name));
      for (ExperimentConfig& cfg : configs) {
        if (opt_seed->count() > 0) cfg.seed = seed_val;
        if (opt_out->count() > 0) cfg.output_dir = out_dir;
      }
    } else {
      ExperimentConfig cfg;
      if (opt_config->count() > 0) {
        cfg = config_from_json_file(config_path);
        if (!sub_name.empty() && sub_name != cfg.experiment)
          fail("config-error", "experiment: config file says '" +
                                   cfg.experiment + "' but subcommand is '" +
                                   sub_name + "'");
      } else if (!sub_name.empty()) {
        cfg = default_config(sub_name);
      } else {
        std::fprintf(stderr, "no experiment selected\n%s",
                     app.help().c_str());
        return 1;
      }
      if (opt_d->count() > 0) cfg.d = d_val;
      if (opt_gap->count() > 0) cfg.gap = gap_val;
      if (opt_lambda->count() > 0) {
        cfg.lambdas = lambda_vals;
        if (cfg.experiment != "power" && cfg.experiment != "twoside" &&
            cfg.experiment != "concentration")
          cfg.r = cfg.lambdas.size();
      }
      if (opt_trials->count() > 0) cfg.trials = trials_val;
      if (opt_seed->count() > 0) cfg.seed = seed_val;
      if (opt_out->count() > 0) cfg.output_dir = out_dir;
      validate_config(cfg);
      configs.push_back(std::move(cfg));
    }

    bool any_fail = false;
    for (const ExperimentConfig& cfg : configs) {
      const ExperimentReport rep = run(cfg);
      print_report(rep);
      for (const CriterionResult& c : rep.criteria)
        if (!c.passed) any_fail = true;
      if (!rep.config.output_dir.empty())
        emit_outputs(rep, rep.config.output_dir);
    }
    if (check_flag && any_fail) return 2;
    return 0;
  } catch (const Error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
}

}  // namespace spike
