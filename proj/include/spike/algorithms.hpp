#pragma once

#include <cstddef>
#include <functional>
#include <vector>

#include "spike/complex_matrix.hpp"
#include "spike/query_model.hpp"

namespace spike {

struct PowerMethodResult {
  CVector iterate;
  std::size_t iterations = 0;
  // ||A v_t - rho_t v_t|| with rho_t = v_t* A v_t, one entry per step,
  // indexed by the iterate the step started from (v_0, v_1, ...).
  std::vector<double> residual_history;
  std::size_t queries_used = 0;
};

struct PowerMethodTarget {
  enum class Kind { residual, fixed };
  Kind kind = Kind::residual;
  double eta = 1e-10;  // residual threshold when kind == residual

  static PowerMethodTarget residual(double eta) {
    return {Kind::residual, eta};
  }
  static PowerMethodTarget fixed() { return {Kind::fixed, 0.0}; }
};

// Called after each step with (t, v_t); returning true stops the run. Lets
// the harness stop on truth-aware statistics without widening this API.
using PowerMethodObserver =
    std::function<bool(std::size_t, const CVector&)>;

PowerMethodResult power_method(const ComplexMatrix& a, const CVector& v0,
                               std::size_t max_iters, PowerMethodTarget target,
                               const PowerMethodObserver& observer = {});
PowerMethodResult power_method(QueryOracle& oracle, const CVector& v0,
                               std::size_t max_iters, PowerMethodTarget target,
                               const PowerMethodObserver& observer = {});

// (ln(kappa d) + ln(2/eps + 1)) / ln(1/(1 - gap)).
double power_method_iteration_bound(double kappa, double d, double epsilon,
                                    double gap);

// diag(1, 1-gap, ..., 1-gap).
ComplexMatrix example1_matrix(std::size_t d, double gap);

// Sigma [[1,0],[sin t, cos t]] conjugating diag(1, gap-1).
ComplexMatrix example2_matrix(double theta, double gap);

// (1 + sin t)/(1 - sin t), the eigenbasis condition number of the above.
double example2_condition_number(double theta);

// Queries T Haar-random orthonormal directions, then returns the unit vector
// in their span maximizing the Rayleigh estimate assembled from the observed
// responses. The output is appended to the oracle's ledger basis.
CVector random_query_baseline(QueryOracle& oracle, std::size_t t, Seed seed);

}  // namespace spike
