#ifndef TKSMOOTH_GAUSS_NEWTON_HPP
#define TKSMOOTH_GAUSS_NEWTON_HPP

#include <vector>

#include "tksmooth/objective.hpp"

namespace tks {

struct SmootherConfig {
    /// Termination tolerance: stop once delta >= -epsilon. A negative value
    /// selects the scale-relative default 1e-5 * (1 + K(x0)).
    double epsilon = -1.0;
    double beta = 1e-4;   ///< sufficient-decrease fraction of the model decrease
    double gamma = 0.5;   ///< backtracking factor
    /// Direction-quality parameter of the underlying theory. The subproblem
    /// here is solved exactly, so any eta in (0,1) is satisfied and the value
    /// never affects the iteration; it is kept so configs round-trip.
    double eta = 0.5;
    int max_iter = 100;
    int max_backtrack = 50;

    void validate() const;
};

struct IterationRecord {
    int iter = 0;
    double objective = 0.0;  ///< K at the iterate, before stepping
    double delta = 0.0;      ///< model decrease of the computed direction
    double step = 0.0;       ///< accepted step size t (0 for terminal records)
    double grad_norm = 0.0;  ///< infinity norm of the gradient
    int backtracks = 0;
};

enum class SmootherStatus { ConvergedDelta, MaxIterations, LineSearchStalled };

const char* to_string(SmootherStatus status);

struct SmootherResult {
    StateSequence x_hat;
    SmootherStatus status = SmootherStatus::ConvergedDelta;
    std::vector<IterationRecord> trace;

    double final_objective() const { return trace.empty() ? 0.0 : trace.back().objective; }
    /// Number of accepted steps.
    int iterations() const;
};

/// A positive-definiteness failure inside a smoother run, with the iterate
/// that produced it attached for diagnosis.
class SmootherAbort : public std::runtime_error {
public:
    SmootherAbort(const std::string& what, StateSequence iterate, int iteration, int block_index)
        : std::runtime_error(what),
          iterate(std::move(iterate)),
          iteration(iteration),
          block_index(block_index) {}

    StateSequence iterate;
    int iteration;
    int block_index;
};

struct DirectionResult {
    Vector d;
    double delta;  ///< a^T d + (1/2) d^T C d; <= 0, zero only at stationarity
};

/// Solves C d = -a through the block-tridiagonal factorization and evaluates
/// the quadratic model decrease.
DirectionResult direction(const ObjectiveEval& eval);

struct LineSearchResult {
    double t = 0.0;
    StateSequence x_new;
    int backtracks = 0;
    bool stalled = false;
    double objective_at_x = 0.0;
    double objective_new = 0.0;
};

/// Backtracking line search: the largest t = gamma^i, i = 0..max_backtrack,
/// with K(x + t d) <= K(x) + beta t delta. When no trial passes, the best
/// trial seen is returned with `stalled` set.
LineSearchResult line_search(const ProblemSpec& spec, const StateSequence& x, const Vector& d,
                             double delta, const SmootherConfig& config);

/// Full Gauss-Newton iteration: evaluate, exact direction solve, terminate
/// when delta >= -epsilon, otherwise line-search and step. The trace records
/// every visited iterate; objectives are non-increasing by construction.
SmootherResult run_smoother(const ProblemSpec& spec, const StateSequence& x0,
                            const SmootherConfig& config = {});

} // namespace tks

#endif
