#ifndef TKSMOOTH_CHECK_HPP
#define TKSMOOTH_CHECK_HPP

#include <cstdint>

#include "tksmooth/model.hpp"

namespace tks {

/// Self-diagnostics for a configured problem, evaluated at random states:
/// analytic gradient vs central differences, model Jacobians vs central
/// differences, and factorability of the curvature approximation.
struct CheckReport {
    int states_checked = 0;
    double max_gradient_err = 0.0;

    double max_g_jac_err = 0.0;
    int g_jac_step = -1;  ///< step of the worst process-Jacobian entry
    int g_jac_row = -1;
    int g_jac_col = -1;

    double max_h_jac_err = 0.0;
    int h_jac_step = -1;
    int h_jac_row = -1;
    int h_jac_col = -1;

    bool hessian_pd = true;
    int hessian_fail_block = -1;

    bool pass(double tol = 1e-5) const {
        return hessian_pd && max_gradient_err < tol && max_g_jac_err < tol && max_h_jac_err < tol;
    }
};

CheckReport check_problem(const ProblemSpec& spec, int num_states = 20, std::uint64_t seed = 0);

} // namespace tks

#endif
