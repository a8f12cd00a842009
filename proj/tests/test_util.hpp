#ifndef TKSMOOTH_TEST_UTIL_HPP
#define TKSMOOTH_TEST_UTIL_HPP

#include <vector>

#include <Eigen/Dense>

#include "tksmooth/block_tridiag.hpp"
#include "tksmooth/model.hpp"
#include "tksmooth/rng.hpp"

namespace tkstest {

using tks::Matrix;
using tks::Vector;

inline Matrix random_matrix(tks::Rng& rng, int rows, int cols) {
    Matrix out(rows, cols);
    for (int i = 0; i < rows; ++i)
        for (int j = 0; j < cols; ++j) out(i, j) = rng.uniform(-1.0, 1.0);
    return out;
}

inline Vector random_vector(tks::Rng& rng, int len) {
    Vector out(len);
    for (int i = 0; i < len; ++i) out(i) = rng.uniform(-1.0, 1.0);
    return out;
}

/// Random SPD block-tridiagonal instance built as L D L^T with unit lower
/// block-bidiagonal L and SPD pivot blocks, assembled densely and re-cut
/// into blocks, so the structure is exact by construction.
inline tks::BlockTridiagonalSystem random_spd_system(tks::Rng& rng, int n, int N) {
    const int dim = n * N;
    Matrix lower = Matrix::Identity(dim, dim);
    Matrix pivots = Matrix::Zero(dim, dim);
    for (int k = 0; k < N; ++k) {
        const Matrix a = random_matrix(rng, n, n);
        pivots.block(k * n, k * n, n, n) = a * a.transpose() + 0.3 * Matrix::Identity(n, n);
        if (k + 1 < N) lower.block((k + 1) * n, k * n, n, n) = 0.7 * random_matrix(rng, n, n);
    }
    const Matrix full = lower * pivots * lower.transpose();

    tks::BlockTridiagonalSystem sys = tks::BlockTridiagonalSystem::zero(n, N);
    for (int k = 0; k < N; ++k) {
        sys.diag[k] = full.block(k * n, k * n, n, n);
        sys.diag[k] = 0.5 * (sys.diag[k] + sys.diag[k].transpose().eval());
        if (k + 1 < N) sys.sub[k] = full.block((k + 1) * n, k * n, n, n);
    }
    return sys;
}

/// Dense assembly independent of the library's own helpers.
inline Matrix to_dense(const tks::BlockTridiagonalSystem& sys) {
    const int n = sys.n;
    Matrix out = Matrix::Zero(n * sys.N, n * sys.N);
    for (int k = 0; k < sys.N; ++k) {
        out.block(k * n, k * n, n, n) = sys.diag[k];
        if (k + 1 < sys.N) {
            out.block((k + 1) * n, k * n, n, n) = sys.sub[k];
            out.block(k * n, (k + 1) * n, n, n) = sys.sub[k].transpose();
        }
    }
    return out;
}

inline tks::StateSequence random_states(tks::Rng& rng, int n, int N, double scale = 1.0) {
    tks::StateSequence x(n, N);
    for (Eigen::Index i = 0; i < x.stacked().size(); ++i) x.stacked()(i) = scale * rng.normal();
    return x;
}

/// Dense normal-equations solution of a stacked linear-Gaussian smoothing
/// problem (time-invariant G and H assumed). Minimizes
/// ||A x - b||^2_Qinv + ||z - H x||^2_Rinv with the block-bidiagonal process
/// matrix A; solved with Eigen's dense LDLT, independent of the smoother.
inline Vector dense_linear_smoother_oracle(const tks::ProblemSpec& spec) {
    const int n = spec.state_dim();
    const int m = spec.meas_dim();
    const int N = spec.steps();
    const Matrix g_mat = spec.process.g_jac(1, Vector::Zero(n));
    const Matrix h_mat = spec.measurement.h_jac(0, Vector::Zero(n));

    Matrix proc = Matrix::Zero(n * N, n * N);
    Vector offset = Vector::Zero(n * N);
    offset.head(n) = spec.process.g0;
    Matrix qinv = Matrix::Zero(n * N, n * N);
    Matrix meas = Matrix::Zero(m * N, n * N);
    Matrix rinv = Matrix::Zero(m * N, m * N);
    Vector z = Vector::Zero(m * N);
    for (int k = 0; k < N; ++k) {
        proc.block(k * n, k * n, n, n) = Matrix::Identity(n, n);
        if (k >= 1) proc.block(k * n, (k - 1) * n, n, n) = -g_mat;
        qinv.block(k * n, k * n, n, n) = spec.precisions.Qinv[k];
        meas.block(k * m, k * n, m, n) = h_mat;
        rinv.block(k * m, k * m, m, m) = spec.precisions.Rinv[k];
        z.segment(k * m, m) = spec.measurement.z[k];
    }
    const Matrix normal = proc.transpose() * qinv * proc + meas.transpose() * rinv * meas;
    const Vector rhs = proc.transpose() * qinv * offset + meas.transpose() * rinv * z;
    return normal.ldlt().solve(rhs);
}

} // namespace tkstest

#endif
