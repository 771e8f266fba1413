#pragma once

#include <cstddef>
#include <vector>

#include "spike/complex_matrix.hpp"

namespace spike {

struct Householder {
  CVector v;
  double tau = 0.0;    // real: reflector is Hermitian as well as unitary
  cdouble beta = 0.0;  // H x = beta e_1, |beta| = ||x||
};

// H = I - tau v v*. The sign of beta is chosen against x_0 so forming v is
// cancellation-free; tau = 0 encodes the identity (x = 0).
Householder make_householder(const CVector& x);

struct ThinQR {
  ComplexMatrix q;  // d x r, orthonormal columns
  ComplexMatrix r;  // r x r, upper triangular
};

ThinQR qr_thin(const ComplexMatrix& a);

// Power iteration on A*A from a fixed internal start vector.
double op_norm_est(const ComplexMatrix& a, int iters = 40);

// Cyclic Jacobi for small real symmetric matrices (row-major s, n x n).
// Eigenvalues descending; eigenvector j in column j of v (row-major).
void jacobi_sym_eig(const std::vector<double>& s, std::size_t n,
                    std::vector<double>& evals, std::vector<double>& v);

}  // namespace spike
