#ifndef TKSMOOTH_BLOCK_TRIDIAG_HPP
#define TKSMOOTH_BLOCK_TRIDIAG_HPP

#include <vector>

#include "tksmooth/types.hpp"

namespace tks {

/// Symmetric block-tridiagonal matrix with n x n blocks.
///
/// Block row k holds diag[k] on the diagonal and sub[k-1] immediately below
/// it; the super-diagonal is the transpose of the sub-diagonal and is never
/// stored. All solver work in this project runs through this structure, so
/// factorization and solves cost O(n^3 N) rather than O((nN)^3).
struct BlockTridiagonalSystem {
    int n = 0;                 ///< block dimension
    int N = 0;                 ///< number of diagonal blocks
    std::vector<Matrix> diag;  ///< N symmetric n x n blocks
    std::vector<Matrix> sub;   ///< N-1 blocks; sub[k] couples block k and k+1

    static BlockTridiagonalSystem zero(int n, int N);

    /// Throws DimensionMismatch if block counts or shapes are inconsistent,
    /// or a diagonal block is not symmetric to 1e-12 relative.
    void validate() const;
};

/// Lower block-bidiagonal L (unit diagonal) and SPD block-diagonal D with
/// A = L D L^T. `pivot[k]` is D_k, `pivot_chol[k]` its lower Cholesky factor,
/// and `sub[k]` the L block at position (k+1, k).
struct BlockFactorization {
    int n = 0;
    int N = 0;
    std::vector<Matrix> pivot;
    std::vector<Matrix> pivot_chol;
    std::vector<Matrix> sub;
};

/// Block LDL^T factorization by the forward recursion
///   D_0 = diag_0,  L_k = sub_k D_k^{-1},  D_{k+1} = diag_{k+1} - L_k sub_k^T.
///
/// Each pivot block is factored by an unblocked dense Cholesky; a pivot is
/// rejected (NotPositiveDefinite, with the failing block index) when a scalar
/// pivot drops to 1e-14 times the block's largest diagonal entry or below.
BlockFactorization factor(const BlockTridiagonalSystem& sys);

/// Solves A y = rhs given A = L D L^T. rhs has length n*N.
Vector solve(const BlockFactorization& fac, const Vector& rhs);

/// Matrix-vector product with the represented matrix (no factorization).
Vector apply(const BlockTridiagonalSystem& sys, const Vector& x);

/// Dense (nN) x (nN) copy; intended for small systems and tests.
Matrix dense(const BlockTridiagonalSystem& sys);

/// Unblocked in-place Cholesky of a symmetric matrix, lower triangle.
/// Returns the 0-based row of the first unacceptable pivot, or -1 on success.
/// A pivot is unacceptable when it is <= rel_tol * max diagonal entry of the
/// input (and always when the matrix has a nonpositive leading pivot).
int cholesky_in_place(Matrix& a, double rel_tol = 1e-14);

} // namespace tks

#endif
