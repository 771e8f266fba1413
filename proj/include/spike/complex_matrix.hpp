#pragma once

#include <cmath>
#include <complex>
#include <cstddef>
#include <vector>

#include "spike/errors.hpp"

namespace spike {

using cdouble = std::complex<double>;
using CVector = std::vector<cdouble>;

// Dense row-major complex matrix, the carrier for every ensemble and
// spectrum in the library. Real-valued objects ride along with zero
// imaginary parts.
struct ComplexMatrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<cdouble> data;

  ComplexMatrix() = default;
  ComplexMatrix(std::size_t r, std::size_t c) : rows(r), cols(c), data(r * c) {}

  cdouble& operator()(std::size_t i, std::size_t j) {
    return data[i * cols + j];
  }
  const cdouble& operator()(std::size_t i, std::size_t j) const {
    return data[i * cols + j];
  }

  cdouble* row(std::size_t i) { return data.data() + i * cols; }
  const cdouble* row(std::size_t i) const { return data.data() + i * cols; }

  bool square() const { return rows == cols && rows > 0; }

  static ComplexMatrix identity(std::size_t n) {
    ComplexMatrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
  }
};

inline ComplexMatrix adjoint(const ComplexMatrix& a) {
  ComplexMatrix b(a.cols, a.rows);
  for (std::size_t i = 0; i < a.rows; ++i)
    for (std::size_t j = 0; j < a.cols; ++j) b(j, i) = std::conj(a(i, j));
  return b;
}

inline double frobenius_norm(const ComplexMatrix& a) {
  double s = 0.0;
  for (const cdouble& z : a.data) s += std::norm(z);
  return std::sqrt(s);
}

inline double max_abs(const ComplexMatrix& a) {
  double m = 0.0;
  for (const cdouble& z : a.data) m = std::max(m, std::abs(z));
  return m;
}

inline bool all_finite(const ComplexMatrix& a) {
  for (const cdouble& z : a.data)
    if (!std::isfinite(z.real()) || !std::isfinite(z.imag())) return false;
  return true;
}

inline cdouble dot(const CVector& x, const CVector& y) {
  cdouble s = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) s += std::conj(x[i]) * y[i];
  return s;
}

inline double norm2(const CVector& x) {
  double s = 0.0;
  for (const cdouble& z : x) s += std::norm(z);
  return std::sqrt(s);
}

inline void scale(CVector& x, cdouble a) {
  for (cdouble& z : x) z *= a;
}

}  // namespace spike
