#include "tksmooth/objective.hpp"

#include <cmath>
#include <string>

namespace tks {

namespace {

struct PartitionIndices {
    std::vector<int> ws, wg, vs, vg;
};

PartitionIndices indices_of(const ProblemSpec& spec) {
    return {spec.partition.proc_student, spec.partition.proc_gauss(spec.state_dim()),
            spec.partition.meas_student, spec.partition.meas_gauss(spec.meas_dim())};
}

double quad_form(const Matrix& p, const std::vector<int>& idx, const Vector& u) {
    if (idx.empty()) return 0.0;
    const Vector sub = u(idx);
    return sub.dot(p(idx, idx) * sub);
}

void check_dims(const ProblemSpec& spec, const StateSequence& x) {
    if (x.state_dim() != spec.state_dim() || x.steps() != spec.steps())
        throw DimensionMismatch("objective: state sequence does not match the spec");
}

void check_qinv_pd(const ProblemSpec& spec, const PartitionIndices& part) {
    for (int k = 0; k < spec.steps(); ++k) {
        for (const auto* idx : {&part.ws, &part.wg}) {
            if (idx->empty()) continue;
            Matrix block = spec.precisions.Qinv[k](*idx, *idx);
            if (cholesky_in_place(block) >= 0)
                throw NotPositiveDefinite("Qinv[" + std::to_string(k) +
                                              "] restriction is not positive definite",
                                          k);
        }
    }
}

} // namespace

ConvexCompositeSplit split_objective(const ProblemSpec& spec, const StateSequence& x) {
    check_dims(spec, x);
    const auto part = indices_of(spec);
    const Residuals res = residuals(spec, x);
    const double r = spec.partition.r;
    const double s = spec.partition.s;

    ConvexCompositeSplit out;
    for (int k = 0; k < spec.steps(); ++k) {
        const Matrix& qinv = spec.precisions.Qinv[k];
        const Matrix& rinv = spec.precisions.Rinv[k];
        if (!part.ws.empty()) out.f_value += 0.5 * r * std::log1p(quad_form(qinv, part.ws, res.w[k]) / r);
        if (!part.vs.empty()) out.f_value += 0.5 * s * std::log1p(quad_form(rinv, part.vs, res.v[k]) / s);
        out.gauss_quad += 0.5 * quad_form(qinv, part.wg, res.w[k]);
        out.gauss_quad += 0.5 * quad_form(rinv, part.vg, res.v[k]);
    }
    return out;
}

double objective_value(const ProblemSpec& spec, const StateSequence& x) {
    const auto split = split_objective(spec, x);
    return split.f_value + split.gauss_quad;
}

ObjectiveEval evaluate(const ProblemSpec& spec, const StateSequence& x) {
    check_dims(spec, x);
    const auto part = indices_of(spec);
    check_qinv_pd(spec, part);

    const int n = spec.state_dim();
    const int N = spec.steps();
    const double r = spec.partition.r;
    const double s = spec.partition.s;
    const Residuals res = residuals(spec, x);

    ObjectiveEval out;
    out.gradient = Vector::Zero(static_cast<Eigen::Index>(n) * N);
    out.hessian = BlockTridiagonalSystem::zero(n, N);
    out.omega.assign(N, 1.0);
    out.tau.assign(N, 1.0);

    // Per-step Jacobians, evaluated once. jac_g[k] is the derivative of
    // g(k, .) at x_{k-1}; unused for k = 0.
    std::vector<Matrix> jac_g(N), jac_h(N);
    for (int k = 1; k < N; ++k) {
        jac_g[k] = spec.process.g_jac(k, x.at(k - 1));
        if (jac_g[k].rows() != n || jac_g[k].cols() != n)
            throw DimensionMismatch("objective: g_jac has wrong shape at k=" + std::to_string(k));
    }
    for (int k = 0; k < N; ++k) {
        jac_h[k] = spec.measurement.h_jac(k, x.at(k));
        if (jac_h[k].rows() != spec.meas_dim() || jac_h[k].cols() != n)
            throw DimensionMismatch("objective: h_jac has wrong shape at k=" + std::to_string(k));
    }

    // Weighted residual images: what the chain rule maps back through the
    // residual Jacobians. Student components carry their weight, Gaussian
    // components weight 1.
    std::vector<Vector> w_hat(N), v_hat(N);

    for (int k = 0; k < N; ++k) {
        const Matrix& qinv = spec.precisions.Qinv[k];
        const Matrix& rinv = spec.precisions.Rinv[k];

        const double qw = quad_form(qinv, part.ws, res.w[k]);
        const double qv = quad_form(rinv, part.vs, res.v[k]);
        if (!part.ws.empty()) {
            out.value += 0.5 * r * std::log1p(qw / r);
            out.omega[k] = student_weight(qw, r);
        }
        if (!part.vs.empty()) {
            out.value += 0.5 * s * std::log1p(qv / s);
            out.tau[k] = student_weight(qv, s);
        }
        out.value += 0.5 * quad_form(qinv, part.wg, res.w[k]);
        out.value += 0.5 * quad_form(rinv, part.vg, res.v[k]);

        w_hat[k] = Vector::Zero(n);
        if (!part.ws.empty()) w_hat[k](part.ws) = out.omega[k] * (qinv(part.ws, part.ws) * res.w[k](part.ws));
        if (!part.wg.empty()) w_hat[k](part.wg) = qinv(part.wg, part.wg) * res.w[k](part.wg);

        v_hat[k] = Vector::Zero(spec.meas_dim());
        if (!part.vs.empty()) v_hat[k](part.vs) = out.tau[k] * (rinv(part.vs, part.vs) * res.v[k](part.vs));
        if (!part.vg.empty()) v_hat[k](part.vg) = rinv(part.vg, part.vg) * res.v[k](part.vg);
    }

    // Exact gradient. w_k touches steps k and k-1 (through -g_jac^T), v_k
    // touches step k through -h_jac^T.
    for (int k = 0; k < N; ++k) {
        auto grad_k = out.gradient.segment(static_cast<Eigen::Index>(k) * n, n);
        grad_k += w_hat[k];
        if (k + 1 < N) grad_k -= jac_g[k + 1].transpose() * w_hat[k + 1];
        grad_k -= jac_h[k].transpose() * v_hat[k];
    }

    // Curvature approximation: diagonal blocks C_k + H_k, sub-diagonal A_k.
    // Student and Gaussian index blocks are assembled separately from the
    // matching Jacobian sub-blocks; cross-partition entries of the process
    // terms stay zero.
    for (int k = 0; k < N; ++k) {
        Matrix diag = Matrix::Zero(n, n);
        const Matrix& qinv = spec.precisions.Qinv[k];

        if (!part.ws.empty()) {
            diag(part.ws, part.ws) = out.omega[k] * qinv(part.ws, part.ws);
            if (k + 1 < N) {
                const Matrix gss = jac_g[k + 1](part.ws, part.ws);
                diag(part.ws, part.ws) +=
                    out.omega[k + 1] *
                    (gss.transpose() * spec.precisions.Qinv[k + 1](part.ws, part.ws) * gss).eval();
            }
        }
        if (!part.wg.empty()) {
            diag(part.wg, part.wg) = qinv(part.wg, part.wg);
            if (k + 1 < N) {
                const Matrix ggg = jac_g[k + 1](part.wg, part.wg);
                diag(part.wg, part.wg) +=
                    (ggg.transpose() * spec.precisions.Qinv[k + 1](part.wg, part.wg) * ggg).eval();
            }
        }

        const Matrix& hj = jac_h[k];
        const Matrix& rinv = spec.precisions.Rinv[k];
        if (!part.vs.empty()) {
            const Matrix hs = hj(part.vs, Eigen::all);
            diag += out.tau[k] * (hs.transpose() * rinv(part.vs, part.vs) * hs).eval();
        }
        if (!part.vg.empty()) {
            const Matrix hg = hj(part.vg, Eigen::all);
            diag += (hg.transpose() * rinv(part.vg, part.vg) * hg).eval();
        }
        out.hessian.diag[k] = 0.5 * (diag + diag.transpose());

        if (k >= 1) {
            Matrix below = Matrix::Zero(n, n);
            if (!part.ws.empty())
                below(part.ws, part.ws) =
                    -out.omega[k] * (qinv(part.ws, part.ws) * jac_g[k](part.ws, part.ws)).eval();
            if (!part.wg.empty())
                below(part.wg, part.wg) = -(qinv(part.wg, part.wg) * jac_g[k](part.wg, part.wg)).eval();
            out.hessian.sub[k - 1] = below;
        }
    }
    return out;
}

double gradient_check(const ProblemSpec& spec, const StateSequence& x) {
    const ObjectiveEval eval = evaluate(spec, x);
    const double h = 1e-6 * (1.0 + x.stacked().cwiseAbs().maxCoeff());

    double worst = 0.0;
    StateSequence xp = x;
    for (Eigen::Index i = 0; i < x.stacked().size(); ++i) {
        const double orig = x.stacked()(i);
        xp.stacked()(i) = orig + h;
        const double up = objective_value(spec, xp);
        xp.stacked()(i) = orig - h;
        const double down = objective_value(spec, xp);
        xp.stacked()(i) = orig;
        const double fd = (up - down) / (2.0 * h);
        worst = std::max(worst, std::abs(eval.gradient(i) - fd) / (1.0 + std::abs(eval.gradient(i))));
    }
    return worst;
}

} // namespace tks
