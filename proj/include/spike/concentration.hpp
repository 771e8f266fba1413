#pragma once

#include <cstddef>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "spike/complex_matrix.hpp"
#include "spike/ensembles.hpp"
#include "spike/stats.hpp"

namespace spike {

struct TailTestReport {
  double bound_value = 0.0;
  double empirical_frequency = 0.0;
  std::size_t trials = 0;
  WilsonInterval wilson_interval;
};

enum class HwVariant {
  real_stiefel,
  complex_matrix,
  complex_stiefel_r1,
  complex_stiefel_general,
  general_case_real,
  general_case_complex,
};

std::string to_string(HwVariant v);
HwVariant hw_variant_from_string(const std::string& s);

struct HwBound {
  double deviation_bound = 0.0;
  double failure_prob = 0.0;
};

// Deviation/failure pair for ||U*AU - tr(A)/d I_r||, Haar U, by variant.
HwBound hw_bound(double op_norm, double frob_norm, std::size_t d,
                 std::size_t r, double t, HwVariant variant);

// Samples frames (real for the *-real variants, complex otherwise), measures
// the deviation, reports how often it exceeds the bound.
TailTestReport hw_empirical(const ComplexMatrix& a, std::size_t r,
                            HwVariant variant, double t, std::size_t trials,
                            Seed seed);

// exp(-(sqrt(tau) - sqrt(2k))^2 / 2), tau >= 2k.
double entropy_tail_bound(std::size_t k, double tau);

// P[u*VV*u >= tau/d] for u uniform on the real unit sphere, against the
// closed-form bound.
TailTestReport entropy_tail_empirical(std::size_t d, const ComplexMatrix& v,
                                      double tau, std::size_t trials,
                                      Seed seed);

// exp(eta(1+eta)/2 * lambda^2 * d * overlap_sq).
double information_increment(double eta, double lambda, std::size_t d,
                             double overlap_sq);

// exp(eta(1+eta)/2 * mu^T pinv(Sigma) mu); sigma is real symmetric PSD,
// row-major n x n. mu outside range(sigma) is rejected.
double gaussian_ratio_moment(const std::vector<double>& mu_diff,
                             const std::vector<double>& sigma, double eta);

// Monte-Carlo E_Q[(dP/dQ)^{1+eta}] with P = N(mu_diff, Sigma), Q = N(0, Sigma).
double gaussian_ratio_empirical(const std::vector<double>& mu_diff,
                                const std::vector<double>& sigma, double eta,
                                std::size_t trials, Seed seed);

// lambda * ||(lambda I - w)^{-1}||_2 by power iteration through LU solves;
// pass w already scaled by 1/sqrt(d).
double resolvent_norm_value(double lambda, const ComplexMatrix& w);

// Samples W/sqrt(d) (real gaussian entries), returns (empirical norm,
// bound 2/gap^2 with gap = (lambda-1)/lambda). A numerically singular draw
// is resampled with a logged warning.
std::pair<double, double> resolvent_norm_check(double lambda, std::size_t d,
                                               Seed seed);

struct MomentEstimate {
  cdouble mean = 0.0;
  double std_error = 0.0;
};

// Monte-Carlo mean of d^{-(k1+k2)/2} u*(W^{k1})* W^{k2} u, powers applied by
// repeated matvec.
MomentEstimate moment_cross_check(std::size_t d, std::size_t k1,
                                  std::size_t k2, EntryLaw law,
                                  std::size_t trials, Seed seed);

// (empirical E|u*(W/sqrt(d))^k u|^2, bound (2k)!! k^{2k-1} / d).
std::pair<double, double> moment_uwu_check(std::size_t d, std::size_t k,
                                           std::size_t trials, Seed seed);

// {variant, params, bound, frequency, trials, interval} as JSON.
std::string tail_report_json(const std::string& variant,
                             const std::map<std::string, double>& params,
                             const TailTestReport& rep);

}  // namespace spike
