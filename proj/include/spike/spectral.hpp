#pragma once

#include <cstddef>
#include <utility>
#include <vector>

#include "spike/complex_matrix.hpp"
#include "spike/ensembles.hpp"

namespace spike {

struct Spectrum {
  // Descending modulus; ties broken by descending real part, then
  // descending imaginary part.
  CVector eigenvalues;
  CVector top_right_eigenvector;  // unit; ||M v - l_1 v|| <= tol * ||M||_2
};

struct ESDStats {
  double radial_ks = 0.0;
  double angular_ks = 0.0;
  std::size_t bulk_count = 0;
  std::size_t outlier_count = 0;
  std::size_t clipped_count = 0;  // bulk moduli clipped to 1 in the radial test
};

struct AlignmentReport {
  // overlaps[i][j] = |u_i* v_j|^2 over the planted frame and the top-r
  // computed eigenvectors.
  std::vector<std::vector<double>> overlaps;
  std::vector<double> weighted_sums;  // sum_i |lambda_i|^2 |u_i* v_j|^2
  double phase_aligned_distance = 0.0;
  double raw_distance = 0.0;
};

// Hessenberg reduction + implicitly shifted QR, eigenvalues only; top right
// eigenvector by inverse iteration at shift l_1 (1 + 1e-10). tol is the
// eigenvector residual target as a multiple of ||M||_2.
Spectrum eigen(const ComplexMatrix& m, double tol = 1e-8);

// Unit eigenvector for one accurately known eigenvalue of m.
CVector eigenvector_for(const ComplexMatrix& m, cdouble lambda_hat,
                        double tol = 1e-8);

double spectral_gap(const Spectrum& s);

// (outliers, bulk): eigenvalues with modulus above / at most 1 + epsilon,
// sorted order preserved.
std::pair<CVector, CVector> detect_outliers(const Spectrum& s, double epsilon);

ESDStats circular_law_stats(const Spectrum& s, std::size_t r_exclude);

// Roots of det(I_r - Lambda U*(zI - W/sqrt(d))^{-1} U) = 0 outside the
// 1 + 2 epsilon disk, Newton-iterated from each planted lambda_i.
CVector outlier_roots_via_resolvent(const PlantedInstance& inst, double epsilon);

AlignmentReport alignment(const PlantedInstance& inst, const Spectrum& s);

}  // namespace spike
