#include "spike/bounds.hpp"

#include <cmath>

namespace spike {

LowerBoundParams LowerBoundParams::make(double gap, std::size_t d,
                                        std::size_t rounds) {
  if (!(gap > 0.0 && gap <= 0.5)) fail("invalid-gap", "gap must be in (0, 1/2]");
  if (d < 2) fail("invalid-dimension", "d must be >= 2");
  LowerBoundParams p;
  p.gap = gap;
  p.d = d;
  p.rounds = rounds;
  p.lambda = 1.0 / (1.0 - gap);
  return p;
}

double failure_probability_bound(const LowerBoundParams& p) {
  if (!(p.gap > 0.0 && p.gap <= 0.5) || p.d < 2 || !(p.lambda > 1.0))
    fail("invalid-gap", "params must come from LowerBoundParams::make");
  const double decay =
      std::pow(p.lambda, -4.0 * static_cast<double>(p.rounds));
  const double exponent = -1.0 / p.gap - decay * static_cast<double>(p.d) *
                                             p.gap * p.gap * p.gap / 256.0;
  return std::exp(exponent);
}

std::size_t theorem_query_budget(double d, double gap, bool two_side) {
  if (!(gap > 0.0 && gap <= 0.5)) fail("invalid-gap", "gap must be in (0, 1/2]");
  if (!(d >= 2.0)) fail("invalid-dimension", "d must be >= 2");
  const double rate = two_side ? gap / (1.0 - gap) : gap;
  const double raw = std::log(d) / (5.0 * rate);
  // Nudge before flooring: log(exp(k)) can land one ulp under k.
  return static_cast<std::size_t>(std::floor(raw + 1e-9));
}

double alignment_limit(double lambda) {
  if (!(lambda > 1.0))
    fail("subcritical-spike", "alignment limit needs lambda > 1");
  return std::sqrt(lambda * lambda - 1.0) / lambda;
}

LemmaD2Result lemma_d2_check(double lambda, std::size_t k_max) {
  if (!(lambda > 1.0))
    fail("subcritical-spike", "envelopes need lambda > 1");
  if (k_max == 0) fail("invalid-index", "k_max must be >= 1");
  LemmaD2Result r;
  const double log_lambda = std::log(lambda);
  for (std::size_t k = 0; k <= k_max; ++k) {
    const double decay = std::pow(lambda, -4.0 * static_cast<double>(k));
    const double lhs = decay * (static_cast<double>(k) + 1.0);
    if (lhs > r.lhs_max) r.lhs_max = lhs;
    if (k >= 1) {
      const double lhs2 = decay * std::log1p(static_cast<double>(k));
      if (lhs2 > r.lhs2_max) r.lhs2_max = lhs2;
    }
  }
  const double inv = 1.0 / (4.0 * std::exp(1.0) * log_lambda);
  r.rhs = 1.0 + inv;
  r.rhs2 = inv;
  r.holds = r.lhs_max <= r.rhs && r.lhs2_max <= r.rhs2;
  return r;
}

double two_side_target(double lambda) {
  if (!(lambda > 1.0))
    fail("subcritical-spike", "target needs lambda > 1");
  return (lambda - 1.0) / 4.0;
}

}  // namespace spike
