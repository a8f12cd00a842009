#include "tksmooth/check.hpp"

#include "tksmooth/objective.hpp"
#include "tksmooth/rng.hpp"

namespace tks {

CheckReport check_problem(const ProblemSpec& spec, int num_states, std::uint64_t seed) {
    spec.validate();

    const int n = spec.state_dim();
    const int N = spec.steps();
    CheckReport report;
    Rng rng = Rng::substream(seed, 0x5eedULL);

    for (int sample = 0; sample < num_states; ++sample) {
        StateSequence x(n, N);
        for (Eigen::Index i = 0; i < x.stacked().size(); ++i) x.stacked()(i) = rng.normal();

        report.max_gradient_err = std::max(report.max_gradient_err, gradient_check(spec, x));

        for (int k = 1; k < N; ++k) {
            const Vector xp = x.at(k - 1);
            const auto chk = jacobian_fd_check(
                [&spec, k](const Vector& u) { return spec.process.g(k, u); },
                spec.process.g_jac(k, xp), xp);
            if (chk.max_err > report.max_g_jac_err) {
                report.max_g_jac_err = chk.max_err;
                report.g_jac_step = k;
                report.g_jac_row = chk.row;
                report.g_jac_col = chk.col;
            }
        }
        for (int k = 0; k < N; ++k) {
            const Vector xk = x.at(k);
            const auto chk = jacobian_fd_check(
                [&spec, k](const Vector& u) { return spec.measurement.h(k, u); },
                spec.measurement.h_jac(k, xk), xk);
            if (chk.max_err > report.max_h_jac_err) {
                report.max_h_jac_err = chk.max_err;
                report.h_jac_step = k;
                report.h_jac_row = chk.row;
                report.h_jac_col = chk.col;
            }
        }

        try {
            factor(evaluate(spec, x).hessian);
        } catch (const NotPositiveDefinite& e) {
            report.hessian_pd = false;
            report.hessian_fail_block = e.block_index();
        }
        ++report.states_checked;
    }
    return report;
}

} // namespace tks
