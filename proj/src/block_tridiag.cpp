#include "tksmooth/block_tridiag.hpp"

#include <cmath>
#include <string>

namespace tks {

BlockTridiagonalSystem BlockTridiagonalSystem::zero(int n, int N) {
    BlockTridiagonalSystem sys;
    sys.n = n;
    sys.N = N;
    sys.diag.assign(N, Matrix::Zero(n, n));
    sys.sub.assign(N > 0 ? N - 1 : 0, Matrix::Zero(n, n));
    return sys;
}

void BlockTridiagonalSystem::validate() const {
    if (n <= 0 || N <= 0)
        throw DimensionMismatch("block-tridiagonal system: n and N must be positive");
    if (static_cast<int>(diag.size()) != N)
        throw DimensionMismatch("block-tridiagonal system: expected " + std::to_string(N) +
                                " diagonal blocks, got " + std::to_string(diag.size()));
    if (static_cast<int>(sub.size()) != N - 1)
        throw DimensionMismatch("block-tridiagonal system: expected " + std::to_string(N - 1) +
                                " sub-diagonal blocks, got " + std::to_string(sub.size()));
    for (int k = 0; k < N; ++k) {
        if (diag[k].rows() != n || diag[k].cols() != n)
            throw DimensionMismatch("diagonal block " + std::to_string(k) + " is not " +
                                    std::to_string(n) + "x" + std::to_string(n));
        const double scale = diag[k].cwiseAbs().maxCoeff();
        if ((diag[k] - diag[k].transpose()).cwiseAbs().maxCoeff() > 1e-12 * std::max(1.0, scale))
            throw DimensionMismatch("diagonal block " + std::to_string(k) + " is not symmetric");
    }
    for (int k = 0; k + 1 < N; ++k)
        if (sub[k].rows() != n || sub[k].cols() != n)
            throw DimensionMismatch("sub-diagonal block " + std::to_string(k) + " is not " +
                                    std::to_string(n) + "x" + std::to_string(n));
}

int cholesky_in_place(Matrix& a, double rel_tol) {
    const int n = static_cast<int>(a.rows());
    const double threshold = rel_tol * std::max(a.diagonal().maxCoeff(), 0.0);
    for (int j = 0; j < n; ++j) {
        double d = a(j, j);
        for (int k = 0; k < j; ++k) d -= a(j, k) * a(j, k);
        if (!(d > threshold) || !std::isfinite(d)) return j;
        const double ljj = std::sqrt(d);
        a(j, j) = ljj;
        for (int i = j + 1; i < n; ++i) {
            double s = a(i, j);
            for (int k = 0; k < j; ++k) s -= a(i, k) * a(j, k);
            a(i, j) = s / ljj;
        }
    }
    // zero the strict upper triangle so the factor can be used directly
    for (int j = 1; j < n; ++j)
        for (int i = 0; i < j; ++i) a(i, j) = 0.0;
    return -1;
}

BlockFactorization factor(const BlockTridiagonalSystem& sys) {
    sys.validate();

    BlockFactorization fac;
    fac.n = sys.n;
    fac.N = sys.N;
    fac.pivot.resize(sys.N);
    fac.pivot_chol.resize(sys.N);
    fac.sub.resize(sys.N - 1);

    Matrix pivot = sys.diag[0];
    for (int k = 0; k < sys.N; ++k) {
        fac.pivot[k] = pivot;
        Matrix chol = pivot;
        const int bad = cholesky_in_place(chol);
        if (bad >= 0)
            throw NotPositiveDefinite("pivot block " + std::to_string(k) +
                                          " is not positive definite (pivot row " +
                                          std::to_string(bad) + ")",
                                      k);
        fac.pivot_chol[k] = chol;

        if (k + 1 < sys.N) {
            // L_k = sub_k D_k^{-1} via two triangular solves against chol chol^T
            Matrix tmp = sys.sub[k].transpose();
            chol.triangularView<Eigen::Lower>().solveInPlace(tmp);
            chol.transpose().triangularView<Eigen::Upper>().solveInPlace(tmp);
            fac.sub[k] = tmp.transpose();
            pivot = sys.diag[k + 1] - fac.sub[k] * sys.sub[k].transpose();
            pivot = ((pivot + pivot.transpose()) * 0.5).eval();  // keep the Schur complement symmetric
        }
    }
    return fac;
}

Vector solve(const BlockFactorization& fac, const Vector& rhs) {
    const int n = fac.n;
    const int N = fac.N;
    if (rhs.size() != static_cast<Eigen::Index>(n) * N)
        throw DimensionMismatch("solve: rhs has length " + std::to_string(rhs.size()) +
                                ", expected " + std::to_string(n * N));

    Vector y = rhs;
    // forward: L u = rhs
    for (int k = 0; k + 1 < N; ++k)
        y.segment((k + 1) * n, n) -= fac.sub[k] * y.segment(k * n, n);
    // diagonal: D v = u
    for (int k = 0; k < N; ++k) {
        auto seg = y.segment(k * n, n);
        fac.pivot_chol[k].triangularView<Eigen::Lower>().solveInPlace(seg);
        fac.pivot_chol[k].transpose().triangularView<Eigen::Upper>().solveInPlace(seg);
    }
    // backward: L^T y = v
    for (int k = N - 2; k >= 0; --k)
        y.segment(k * n, n) -= fac.sub[k].transpose() * y.segment((k + 1) * n, n);
    return y;
}

Vector apply(const BlockTridiagonalSystem& sys, const Vector& x) {
    const int n = sys.n;
    if (x.size() != static_cast<Eigen::Index>(n) * sys.N)
        throw DimensionMismatch("apply: vector has length " + std::to_string(x.size()) +
                                ", expected " + std::to_string(n * sys.N));
    Vector y(x.size());
    for (int k = 0; k < sys.N; ++k) {
        y.segment(k * n, n) = sys.diag[k] * x.segment(k * n, n);
        if (k > 0) y.segment(k * n, n) += sys.sub[k - 1] * x.segment((k - 1) * n, n);
        if (k + 1 < sys.N)
            y.segment(k * n, n) += sys.sub[k].transpose() * x.segment((k + 1) * n, n);
    }
    return y;
}

Matrix dense(const BlockTridiagonalSystem& sys) {
    const int n = sys.n;
    Matrix out = Matrix::Zero(static_cast<Eigen::Index>(n) * sys.N, static_cast<Eigen::Index>(n) * sys.N);
    for (int k = 0; k < sys.N; ++k) {
        out.block(k * n, k * n, n, n) = sys.diag[k];
        if (k + 1 < sys.N) {
            out.block((k + 1) * n, k * n, n, n) = sys.sub[k];
            out.block(k * n, (k + 1) * n, n, n) = sys.sub[k].transpose();
        }
    }
    return out;
}

} // namespace tks
