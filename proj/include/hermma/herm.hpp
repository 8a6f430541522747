#pragma once

#include <complex>
#include <vector>

#include <Eigen/Dense>

namespace hermma {

using cplx = std::complex<double>;

// Pointwise matrices never exceed 4x4 (complex dimension 2..4), so storage is inline.
using CMat = Eigen::Matrix<cplx, Eigen::Dynamic, Eigen::Dynamic, Eigen::ColMajor, 4, 4>;
using CVec = Eigen::Matrix<cplx, Eigen::Dynamic, 1, Eigen::ColMajor, 4, 1>;
using RVec = Eigen::Matrix<double, Eigen::Dynamic, 1, Eigen::ColMajor, 4, 1>;

inline constexpr int kMaxDim = 4;

struct Eigh {
    RVec values;   // ascending
    CMat vectors;  // columns; A = V diag(values) V^*
    int sweeps = 0;
};

/// Cyclic Jacobi eigensolver for a Hermitian matrix. Off-diagonal mass is driven
/// below tol * Frobenius norm.
Eigh jacobi_eigh(const CMat& a, double tol = 1e-13);

/// max |a_ij - conj(a_ji)|
double hermitian_error(const CMat& a);

inline CMat hermitian_part(const CMat& a) { return (a + a.adjoint()) * 0.5; }

inline double real_det(const CMat& a) { return a.determinant().real(); }

/// Trace of g^{-1} a, i.e. g^{i jbar} a_{i jbar} in the index convention
/// a(i, j) = a_{i jbar}.
cplx trace_with(const CMat& g_inv, const CMat& a);

/// Positive definiteness by Cholesky.
bool is_positive(const CMat& a);

/// Eigenvalues of a relative to g (eigenvalues of g^{-1} a), ascending. g must be positive.
RVec relative_eigenvalues(const CMat& g, const CMat& a);

CMat identity(int n);

}  // namespace hermma
