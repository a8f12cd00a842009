#include "tksmooth/model.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include <Eigen/Eigenvalues>

#include "tksmooth/block_tridiag.hpp"

namespace tks {

namespace {

std::vector<int> complement(const std::vector<int>& set, int dim) {
    std::vector<int> out;
    out.reserve(dim - set.size());
    auto it = set.begin();
    for (int i = 0; i < dim; ++i) {
        if (it != set.end() && *it == i)
            ++it;
        else
            out.push_back(i);
    }
    return out;
}

void check_index_set(const std::vector<int>& set, int dim, const char* what) {
    int prev = -1;
    for (int i : set) {
        if (i < 0 || i >= dim)
            throw DimensionMismatch(std::string(what) + ": index " + std::to_string(i) +
                                    " out of range [0, " + std::to_string(dim) + ")");
        if (i <= prev)
            throw DimensionMismatch(std::string(what) + ": indices must be strictly increasing");
        prev = i;
    }
}

// symmetric, and zero coupling between the student and gaussian index sets
void check_precision_structure(const Matrix& p, const std::vector<int>& student,
                               const std::vector<int>& gauss, int k, const char* name) {
    const double scale = std::max(1.0, p.cwiseAbs().maxCoeff());
    if ((p - p.transpose()).cwiseAbs().maxCoeff() > 1e-12 * scale)
        throw DimensionMismatch(std::string(name) + "[" + std::to_string(k) + "] is not symmetric");
    for (int i : student)
        for (int j : gauss)
            if (p(i, j) != 0.0 || p(j, i) != 0.0)
                throw DimensionMismatch(std::string(name) + "[" + std::to_string(k) +
                                        "] couples Student and Gaussian components (" +
                                        std::to_string(i) + "," + std::to_string(j) + ")");
}

void check_pd_restriction(const Matrix& p, const std::vector<int>& idx, int k, const char* name) {
    if (idx.empty()) return;
    Matrix block = p(idx, idx);
    if (cholesky_in_place(block) >= 0)
        throw NotPositiveDefinite(std::string(name) + "[" + std::to_string(k) +
                                      "] restriction is not positive definite",
                                  k);
}

void check_psd_restriction(const Matrix& p, const std::vector<int>& idx, int k, const char* name) {
    if (idx.empty()) return;
    Matrix block = p(idx, idx);
    Eigen::SelfAdjointEigenSolver<Matrix> eig(block);
    const double scale = std::max(1.0, block.cwiseAbs().maxCoeff());
    if (eig.eigenvalues().minCoeff() < -1e-10 * scale)
        throw NotPositiveDefinite(std::string(name) + "[" + std::to_string(k) +
                                      "] restriction is not positive semidefinite",
                                  k);
}

} // namespace

std::vector<int> NoisePartition::proc_gauss(int n) const { return complement(proc_student, n); }
std::vector<int> NoisePartition::meas_gauss(int m) const { return complement(meas_student, m); }

void NoisePartition::validate(int n, int m) const {
    check_index_set(proc_student, n, "proc_student");
    check_index_set(meas_student, m, "meas_student");
    if (!proc_student.empty() && !(r > 0.0))
        throw DimensionMismatch("process degrees of freedom must be positive");
    if (!meas_student.empty() && !(s > 0.0))
        throw DimensionMismatch("measurement degrees of freedom must be positive");
}

void ProblemSpec::validate() const {
    const int n = process.n;
    const int m = measurement.m;
    const int N = steps();
    if (n <= 0 || m <= 0 || N <= 0)
        throw DimensionMismatch("problem spec: n, m and N must be positive");
    if (!process.g || !process.g_jac || !measurement.h || !measurement.h_jac)
        throw DimensionMismatch("problem spec: model callbacks must be set");
    if (process.g0.size() != n)
        throw DimensionMismatch("problem spec: g0 has wrong length");
    for (int k = 0; k < N; ++k)
        if (measurement.z[k].size() != m)
            throw DimensionMismatch("problem spec: z[" + std::to_string(k) + "] has wrong length");
    if (static_cast<int>(precisions.Qinv.size()) != N || static_cast<int>(precisions.Rinv.size()) != N)
        throw DimensionMismatch("problem spec: need one Qinv and one Rinv per step");

    partition.validate(n, m);
    const auto ws = partition.proc_student;
    const auto wg = partition.proc_gauss(n);
    const auto vs = partition.meas_student;
    const auto vg = partition.meas_gauss(m);

    for (int k = 0; k < N; ++k) {
        if (precisions.Qinv[k].rows() != n || precisions.Qinv[k].cols() != n)
            throw DimensionMismatch("Qinv[" + std::to_string(k) + "] is not n x n");
        if (precisions.Rinv[k].rows() != m || precisions.Rinv[k].cols() != m)
            throw DimensionMismatch("Rinv[" + std::to_string(k) + "] is not m x m");
        check_precision_structure(precisions.Qinv[k], ws, wg, k, "Qinv");
        check_precision_structure(precisions.Rinv[k], vs, vg, k, "Rinv");
        check_pd_restriction(precisions.Qinv[k], ws, k, "Qinv");
        check_pd_restriction(precisions.Qinv[k], wg, k, "Qinv");
        check_psd_restriction(precisions.Rinv[k], vs, k, "Rinv");
        check_psd_restriction(precisions.Rinv[k], vg, k, "Rinv");
    }
}

Residuals residuals(const ProblemSpec& spec, const StateSequence& x) {
    const int n = spec.state_dim();
    const int m = spec.meas_dim();
    const int N = spec.steps();
    if (x.state_dim() != n || x.steps() != N)
        throw DimensionMismatch("residuals: state sequence does not match the spec");

    Residuals res;
    res.w.resize(N);
    res.v.resize(N);
    for (int k = 0; k < N; ++k) {
        if (k == 0)
            res.w[0] = x.at(0) - spec.process.g0;
        else
            res.w[k] = x.at(k) - spec.process.g(k, x.at(k - 1));
        Vector hx = spec.measurement.h(k, x.at(k));
        if (hx.size() != m)
            throw DimensionMismatch("residuals: h(k, x) has wrong length at k=" + std::to_string(k));
        res.v[k] = spec.measurement.z[k] - hx;
    }
    return res;
}

double student_log_density(const Vector& v, const Vector& mu, const Matrix& Rinv, double s) {
    const int m = static_cast<int>(v.size());
    if (mu.size() != m || Rinv.rows() != m || Rinv.cols() != m)
        throw DimensionMismatch("student_log_density: inconsistent dimensions");
    if (!(s > 0.0)) throw DimensionMismatch("student_log_density: dof must be positive");

    Matrix chol = Rinv;
    if (cholesky_in_place(chol) >= 0)
        throw NotPositiveDefinite("student_log_density: Rinv is not positive definite", 0);
    double log_det_rinv = 0.0;
    for (int i = 0; i < m; ++i) log_det_rinv += 2.0 * std::log(chol(i, i));

    const Vector d = v - mu;
    const double q = d.dot(Rinv * d);
    return std::lgamma(0.5 * (s + m)) - std::lgamma(0.5 * s) -
           0.5 * (m * std::log(std::numbers::pi * s) - log_det_rinv) -
           0.5 * (s + m) * std::log1p(q / s);
}

double cauchy_tail_ratio(double t) {
    if (!(t > 0.0)) throw DimensionMismatch("cauchy_tail_ratio: t must be positive");
    // pi/2 - arctan(u) == arctan(1/u) for u > 0; this form avoids cancellation
    return std::atan(1.0 / (2.0 * t)) / std::atan(1.0 / t);
}

JacobianCheck jacobian_fd_check(const std::function<Vector(const Vector&)>& f,
                                const Matrix& analytic, const Vector& x) {
    const double h = 1e-6 * (1.0 + x.cwiseAbs().maxCoeff());
    JacobianCheck out;
    Vector xp = x, xm = x;
    for (int j = 0; j < x.size(); ++j) {
        xp(j) = x(j) + h;
        xm(j) = x(j) - h;
        const Vector column = (f(xp) - f(xm)) / (2.0 * h);
        for (int i = 0; i < column.size(); ++i) {
            const double err = std::abs(column(i) - analytic(i, j)) / (1.0 + std::abs(analytic(i, j)));
            if (err > out.max_err) {
                out.max_err = err;
                out.row = i;
                out.col = j;
            }
        }
        xp(j) = x(j);
        xm(j) = x(j);
    }
    return out;
}

} // namespace tks
