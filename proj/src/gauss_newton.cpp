#include "tksmooth/gauss_newton.hpp"

#include <cmath>
#include <limits>
#include <string>

namespace tks {

void SmootherConfig::validate() const {
    if (!(beta > 0.0 && beta < 1.0))
        throw DimensionMismatch("smoother config: beta must lie in (0, 1)");
    if (!(gamma > 0.0 && gamma < 1.0))
        throw DimensionMismatch("smoother config: gamma must lie in (0, 1)");
    if (!(eta > 0.0 && eta < 1.0))
        throw DimensionMismatch("smoother config: eta must lie in (0, 1)");
    if (max_iter < 0 || max_backtrack < 0)
        throw DimensionMismatch("smoother config: iteration caps must be nonnegative");
}

const char* to_string(SmootherStatus status) {
    switch (status) {
        case SmootherStatus::ConvergedDelta: return "converged";
        case SmootherStatus::MaxIterations: return "max-iterations";
        case SmootherStatus::LineSearchStalled: return "line-search-stalled";
    }
    return "unknown";
}

int SmootherResult::iterations() const {
    int steps = 0;
    for (const auto& rec : trace)
        if (rec.step > 0.0) ++steps;
    return steps;
}

DirectionResult direction(const ObjectiveEval& eval) {
    const BlockFactorization fac = factor(eval.hessian);
    DirectionResult out;
    out.d = solve(fac, -eval.gradient);
    out.delta = eval.gradient.dot(out.d) + 0.5 * out.d.dot(apply(eval.hessian, out.d));
    return out;
}

LineSearchResult line_search(const ProblemSpec& spec, const StateSequence& x, const Vector& d,
                             double delta, const SmootherConfig& config) {
    if (!(delta < 0.0))
        throw std::invalid_argument("line_search: requires a strict model decrease (delta < 0)");

    LineSearchResult out;
    out.objective_at_x = objective_value(spec, x);

    double t = 1.0;
    double best_t = 1.0;
    double best_value = std::numeric_limits<double>::infinity();
    StateSequence best_x = x;

    for (int i = 0; i <= config.max_backtrack; ++i) {
        StateSequence trial(x.state_dim(), x.stacked() + t * d);
        const double value = objective_value(spec, trial);
        if (value <= out.objective_at_x + config.beta * t * delta) {
            out.t = t;
            out.x_new = std::move(trial);
            out.backtracks = i;
            out.objective_new = value;
            return out;
        }
        if (value < best_value) {
            best_value = value;
            best_t = t;
            best_x = std::move(trial);
        }
        t *= config.gamma;
    }

    out.stalled = true;
    out.t = best_t;
    out.x_new = std::move(best_x);
    out.backtracks = config.max_backtrack + 1;
    out.objective_new = best_value;
    return out;
}

SmootherResult run_smoother(const ProblemSpec& spec, const StateSequence& x0,
                            const SmootherConfig& config) {
    spec.validate();
    config.validate();

    StateSequence x = x0.steps() == 0 ? StateSequence(spec.state_dim(), spec.steps()) : x0;
    ObjectiveEval eval = evaluate(spec, x);
    if (!std::isfinite(eval.value))
        throw DimensionMismatch("run_smoother: objective is not finite at the initial point");

    const double epsilon = config.epsilon >= 0.0 ? config.epsilon : 1e-5 * (1.0 + eval.value);

    SmootherResult result;
    int nu = 0;
    while (true) {
        DirectionResult dir;
        try {
            dir = direction(eval);
        } catch (const NotPositiveDefinite& e) {
            throw SmootherAbort(std::string("curvature approximation lost positive definiteness: ") +
                                    e.what(),
                                x, nu, e.block_index());
        }

        IterationRecord rec;
        rec.iter = nu;
        rec.objective = eval.value;
        rec.delta = dir.delta;
        rec.grad_norm = eval.gradient.size() > 0 ? eval.gradient.cwiseAbs().maxCoeff() : 0.0;

        if (dir.delta >= -epsilon) {
            result.trace.push_back(rec);
            result.status = SmootherStatus::ConvergedDelta;
            break;
        }
        if (nu >= config.max_iter) {
            result.trace.push_back(rec);
            result.status = SmootherStatus::MaxIterations;
            break;
        }

        const LineSearchResult ls = line_search(spec, x, dir.d, dir.delta, config);
        if (ls.stalled) {
            // Non-convexity can flatten the objective along the direction;
            // keep the best point seen and report the stall instead of
            // raising. The incumbent wins if no trial improved on it.
            if (ls.objective_new < eval.value) {
                rec.step = ls.t;
                x = ls.x_new;
            }
            rec.backtracks = ls.backtracks;
            result.trace.push_back(rec);
            result.status = SmootherStatus::LineSearchStalled;
            break;
        }

        rec.step = ls.t;
        rec.backtracks = ls.backtracks;
        result.trace.push_back(rec);
        x = ls.x_new;
        eval = evaluate(spec, x);
        ++nu;
    }

    result.x_hat = std::move(x);
    return result;
}

} // namespace tks
