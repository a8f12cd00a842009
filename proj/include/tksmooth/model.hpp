#ifndef TKSMOOTH_MODEL_HPP
#define TKSMOOTH_MODEL_HPP

#include <functional>
#include <vector>

#include "tksmooth/types.hpp"

namespace tks {

/// The decision variable of the smoother: states x_0 .. x_{N-1}, each of
/// dimension n, stored stacked so solver updates are plain vector axpys.
class StateSequence {
public:
    StateSequence() = default;
    StateSequence(int state_dim, int steps)
        : n_(state_dim), data_(Vector::Zero(static_cast<Eigen::Index>(state_dim) * steps)) {}
    StateSequence(int state_dim, Vector stacked) : n_(state_dim), data_(std::move(stacked)) {
        if (n_ <= 0 || data_.size() % n_ != 0)
            throw DimensionMismatch("state sequence: stacked length is not a multiple of n");
    }

    int state_dim() const { return n_; }
    int steps() const { return n_ > 0 ? static_cast<int>(data_.size()) / n_ : 0; }

    auto at(int k) { return data_.segment(static_cast<Eigen::Index>(k) * n_, n_); }
    auto at(int k) const { return data_.segment(static_cast<Eigen::Index>(k) * n_, n_); }

    Vector& stacked() { return data_; }
    const Vector& stacked() const { return data_; }

    bool all_finite() const { return data_.allFinite(); }

private:
    int n_ = 0;
    Vector data_;
};

/// Process dynamics x_k = g(k, x_{k-1}) + w_k for k >= 1 (0-based time).
/// The first step is anchored by the known constant g0: w_0 = x_0 - g0.
/// g and g_jac are never called with k = 0. Both must be pure functions of
/// (k, x) so concurrent evaluation is safe.
struct ProcessModel {
    int n = 0;
    Vector g0;
    std::function<Vector(int k, const Vector& x_prev)> g;
    std::function<Matrix(int k, const Vector& x_prev)> g_jac;
};

/// Measurements z_k = h(k, x_k) + v_k with uniform dimension m. Steps with
/// fewer physical measurements are padded and disabled through zero rows in
/// the corresponding precision matrix.
struct MeasurementModel {
    int m = 0;
    std::function<Vector(int k, const Vector& x)> h;
    std::function<Matrix(int k, const Vector& x)> h_jac;
    std::vector<Vector> z;
};

/// Assignment of residual components to Student's t vs Gaussian modeling,
/// fixed across time. Indices are 0-based; the Gaussian sets are the
/// complements of the Student sets.
struct NoisePartition {
    std::vector<int> proc_student;  ///< subset of [0, n)
    std::vector<int> meas_student;  ///< subset of [0, m)
    double r = 4.0;                 ///< process degrees of freedom
    double s = 4.0;                 ///< measurement degrees of freedom

    std::vector<int> proc_gauss(int n) const;
    std::vector<int> meas_gauss(int m) const;
    void validate(int n, int m) const;
};

/// Per-step precision (inverse covariance) matrices. Each matrix must be
/// symmetric and block-diagonal across the Student/Gaussian index split;
/// Qinv restrictions must be positive definite, Rinv restrictions may be
/// positive semidefinite (zero rows/columns mark missing measurements).
struct PrecisionSpec {
    std::vector<Matrix> Qinv;  ///< N matrices, n x n
    std::vector<Matrix> Rinv;  ///< N matrices, m x m
};

struct ProblemSpec {
    ProcessModel process;
    MeasurementModel measurement;
    NoisePartition partition;
    PrecisionSpec precisions;

    int state_dim() const { return process.n; }
    int meas_dim() const { return measurement.m; }
    int steps() const { return static_cast<int>(measurement.z.size()); }

    /// Full consistency check: dimensions, partition validity, symmetry and
    /// cross-partition block-diagonality of every precision matrix, positive
    /// definiteness of the Qinv restrictions and positive semidefiniteness of
    /// the Rinv restrictions. Throws DimensionMismatch or NotPositiveDefinite.
    void validate() const;
};

struct Residuals {
    std::vector<Vector> w;  ///< process innovations, length n
    std::vector<Vector> v;  ///< measurement residuals, length m
};

/// w_0 = x_0 - g0, w_k = x_k - g(k, x_{k-1}), v_k = z_k - h(k, x_k).
Residuals residuals(const ProblemSpec& spec, const StateSequence& x);

/// Log of the multivariate Student's t density with mean mu, dof s and
/// matrix parameter R supplied as its inverse:
///   lgamma((s+m)/2) - lgamma(s/2) - (1/2) log det(pi s R)
///     - ((s+m)/2) log(1 + ||v - mu||^2_{Rinv} / s).
double student_log_density(const Vector& v, const Vector& mu, const Matrix& Rinv, double s);

/// Pr(|y| > 2t given |y| > t) for a standard Cauchy variate,
/// (pi/2 - arctan 2t) / (pi/2 - arctan t); tends to 1/2 as t grows.
double cauchy_tail_ratio(double t);

/// Max entrywise relative deviation |J_ij - FD_ij| / (1 + |J_ij|) between an
/// analytic Jacobian and central finite differences with step
/// 1e-6 * (1 + ||x||_inf). Reports the worst entry location.
struct JacobianCheck {
    double max_err = 0.0;
    int row = -1;
    int col = -1;
};
JacobianCheck jacobian_fd_check(const std::function<Vector(const Vector&)>& f,
                                const Matrix& analytic, const Vector& x);

} // namespace tks

#endif
