#pragma once

#include <cstddef>

#include "spike/errors.hpp"

namespace spike {

// Parameter pack for the query lower-bound formulas. The spike size is
// pinned to lambda = 1/(1 - gap), so gap alone fixes the spectral side.
struct LowerBoundParams {
  double gap = 0.0;
  std::size_t d = 0;
  std::size_t rounds = 0;
  double lambda = 0.0;

  static LowerBoundParams make(double gap, std::size_t d, std::size_t rounds);
};

// Probability that an adaptive deterministic solver beats the stated round
// budget on the hard instance; decays like exp(-c d) once rounds stall.
double failure_probability_bound(const LowerBoundParams& p);

// Closed-form round budgets. One-sided queries pay 1/gap per factor of
// progress, two-sided queries pay 1/(lambda - 1); both budgets floor the
// ratio log(d) / (5 * rate). d arrives as a double so callers can probe
// the formula at sizes past 2^53 without overflow.
std::size_t theorem_query_budget(double d, double gap, bool two_side = false);

// Asymptotic overlap between the planted direction and the top eigenvector.
double alignment_limit(double lambda);

// Brute-force check of the two geometric-series envelopes used by the
// failure-probability proof. lhs values are exact maxima over the grid,
// rhs values are the closed-form envelopes.
struct LemmaD2Result {
  double lhs_max = 0.0;
  double rhs = 0.0;
  double lhs2_max = 0.0;
  double rhs2 = 0.0;
  bool holds = false;
};

LemmaD2Result lemma_d2_check(double lambda, std::size_t k_max);

// Alignment threshold that a two-sided solver must clear per round.
double two_side_target(double lambda);

}  // namespace spike
