#pragma once

#include <cstddef>
#include <vector>

#include "spike/complex_matrix.hpp"

namespace spike {

// Thread count for the parallel kernels below. Every kernel computes each
// output element in a fixed serial order, so results are bitwise identical
// for any setting; this knob only changes wall time.
void set_threads(int n);
int get_threads();

CVector matvec(const ComplexMatrix& a, const CVector& x);
CVector matvec_adj(const ComplexMatrix& a, const CVector& x);
ComplexMatrix matmul(const ComplexMatrix& a, const ComplexMatrix& b);

// In-place A[r0.., c0..] <- (I - tau v v*) A[r0.., c0..]; v spans rows r0..
void householder_left(ComplexMatrix& a, const CVector& v, double tau,
                      std::size_t r0, std::size_t c0);
// In-place A[r0.., c0..] <- A[r0.., c0..] (I - tau v v*); v spans cols c0..
void householder_right(ComplexMatrix& a, const CVector& v, double tau,
                       std::size_t r0, std::size_t c0);

struct LuFactors {
  ComplexMatrix lu;                // unit L below the diagonal, U on and above
  std::vector<std::size_t> piv;    // piv[k]: row swapped into k at step k
  bool singular = false;           // exact zero pivot seen
};

LuFactors lu_factor(ComplexMatrix a);
void lu_solve_inplace(const LuFactors& f, CVector& b);
CVector lu_solve(const LuFactors& f, const CVector& b);
// Solves A* x = b from the factorization of A.
CVector lu_solve_adjoint(const LuFactors& f, const CVector& b);
cdouble lu_det(const LuFactors& f);

namespace ref {
// Naive serial references the parallel kernels are tested against.
CVector matvec(const ComplexMatrix& a, const CVector& x);
CVector matvec_adj(const ComplexMatrix& a, const CVector& x);
ComplexMatrix matmul(const ComplexMatrix& a, const ComplexMatrix& b);
void householder_left(ComplexMatrix& a, const CVector& v, double tau,
                      std::size_t r0, std::size_t c0);
void householder_right(ComplexMatrix& a, const CVector& v, double tau,
                       std::size_t r0, std::size_t c0);
LuFactors lu_factor(ComplexMatrix a);
}  // namespace ref

}  // namespace spike
