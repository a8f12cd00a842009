#ifndef TKSMOOTH_OBJECTIVE_HPP
#define TKSMOOTH_OBJECTIVE_HPP

#include <vector>

#include "tksmooth/block_tridiag.hpp"
#include "tksmooth/model.hpp"

namespace tks {

/// One full evaluation of the mixed Gaussian/Student negative log likelihood
///
///   K(x) = (1/2) sum_k [ s ln(1 + ||v_k^S||^2 / s) + ||v_k^G||^2
///                      + r ln(1 + ||w_k^S||^2 / r) + ||w_k^G||^2 ]
///
/// (all norms weighted by the matching precision restriction), together with
/// its exact gradient and the positive-definite block-tridiagonal curvature
/// approximation used for Gauss-Newton steps. The curvature downweights each
/// Student block's Gaussian-form term by omega_k = r / (r + ||w_k^S||^2) or
/// tau_k = s / (s + ||v_k^S||^2), which is what keeps outliers from steering
/// the step.
struct ObjectiveEval {
    double value = 0.0;
    Vector gradient;
    BlockTridiagonalSystem hessian;
    std::vector<double> omega;  ///< per-step process weight, 1 when no Student block
    std::vector<double> tau;    ///< per-step measurement weight
};

/// The objective split into its smooth convex-composite pieces: the Student
/// log-sum part f and the Gaussian quadratic; value == f_value + gauss_quad.
struct ConvexCompositeSplit {
    double f_value = 0.0;
    double gauss_quad = 0.0;
};

ObjectiveEval evaluate(const ProblemSpec& spec, const StateSequence& x);

ConvexCompositeSplit split_objective(const ProblemSpec& spec, const StateSequence& x);

/// Objective value only; the cheap path used inside the line search.
double objective_value(const ProblemSpec& spec, const StateSequence& x);

/// Max over stacked coordinates of
///   |analytic_i - central_difference_i| / (1 + |analytic_i|).
double gradient_check(const ProblemSpec& spec, const StateSequence& x);

/// dof / (dof + q): the curvature weight applied to a Student block with
/// squared Mahalanobis residual q.
inline double student_weight(double q, double dof) { return dof / (dof + q); }

} // namespace tks

#endif
