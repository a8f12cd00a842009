// Python interface: linear-model smoothing plus the built-in Monte Carlo
// experiments, with numpy arrays on both sides of the fence.

#include <cmath>
#include <optional>

#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "tksmooth/check.hpp"
#include "tksmooth/experiments.hpp"
#include "tksmooth/io.hpp"

namespace py = pybind11;

namespace {

tks::Matrix states_to_array(const tks::StateSequence& x) {
    tks::Matrix out(x.steps(), x.state_dim());
    for (int k = 0; k < x.steps(); ++k) out.row(k) = x.at(k).transpose();
    return out;
}

tks::StateSequence array_to_states(const tks::Matrix& arr) {
    tks::StateSequence x(static_cast<int>(arr.cols()), static_cast<int>(arr.rows()));
    for (int k = 0; k < x.steps(); ++k) x.at(k) = arr.row(k).transpose();
    return x;
}

tks::NoisePartition resolve_partition(const std::string& preset,
                                      const std::optional<std::vector<int>>& proc_student,
                                      const std::optional<std::vector<int>>& meas_student, int n,
                                      int m, double r, double s) {
    if (proc_student || meas_student) {
        return tks::make_custom(proc_student.value_or(std::vector<int>{}),
                                meas_student.value_or(std::vector<int>{}), n, m, r, s);
    }
    return tks::make_preset(tks::preset_from_name(preset), n, m, r, s);
}

py::dict trace_to_dict(const std::vector<tks::IterationRecord>& trace) {
    const auto size = static_cast<Eigen::Index>(trace.size());
    tks::Vector objective(size), delta(size), step(size), grad_norm(size);
    std::vector<int> backtracks(trace.size());
    for (Eigen::Index i = 0; i < size; ++i) {
        objective(i) = trace[i].objective;
        delta(i) = trace[i].delta;
        step(i) = trace[i].step;
        grad_norm(i) = trace[i].grad_norm;
        backtracks[i] = trace[i].backtracks;
    }
    py::dict out;
    out["objective"] = objective;
    out["delta"] = delta;
    out["step"] = step;
    out["grad_norm"] = grad_norm;
    out["backtracks"] = backtracks;
    return out;
}

py::dict smooth_linear(const tks::Matrix& G, const tks::Matrix& H, const tks::Matrix& Qinv,
                       const tks::Matrix& Rinv, const tks::Vector& g0, const tks::Matrix& z,
                       const std::string& preset, std::optional<std::vector<int>> proc_student,
                       std::optional<std::vector<int>> meas_student, double r, double s,
                       double epsilon, double beta, double gamma, int max_iter, int max_backtrack,
                       std::optional<tks::Matrix> x0) {
    const int n = static_cast<int>(G.rows());
    const int m = static_cast<int>(H.rows());
    const int N = static_cast<int>(z.rows());
    if (z.cols() != m) throw tks::DimensionMismatch("z must be an (N, m) array");

    tks::ProblemSpec spec;
    spec.process.n = n;
    spec.process.g0 = g0;
    spec.process.g = [G](int, const tks::Vector& x) { return (G * x).eval(); };
    spec.process.g_jac = [G](int, const tks::Vector&) { return G; };
    spec.measurement.m = m;
    spec.measurement.h = [H](int, const tks::Vector& x) { return (H * x).eval(); };
    spec.measurement.h_jac = [H](int, const tks::Vector&) { return H; };
    spec.precisions.Qinv.assign(N, Qinv);
    spec.precisions.Rinv.assign(N, Rinv);
    spec.partition = resolve_partition(preset, proc_student, meas_student, n, m, r, s);

    // NaN entries mark missing measurements: value zeroed, precision row cut
    spec.measurement.z.resize(N);
    for (int k = 0; k < N; ++k) {
        tks::Vector row = z.row(k).transpose();
        for (int j = 0; j < m; ++j) {
            if (std::isnan(row(j))) {
                row(j) = 0.0;
                spec.precisions.Rinv[k].row(j).setZero();
                spec.precisions.Rinv[k].col(j).setZero();
            }
        }
        spec.measurement.z[k] = row;
    }

    tks::SmootherConfig config;
    config.epsilon = epsilon;
    config.beta = beta;
    config.gamma = gamma;
    config.max_iter = max_iter;
    config.max_backtrack = max_backtrack;

    tks::StateSequence start;
    if (x0) {
        if (x0->rows() != N || x0->cols() != n)
            throw tks::DimensionMismatch("x0 must be an (N, n) array");
        start = array_to_states(*x0);
    }

    const tks::SmootherResult result = tks::run_smoother(spec, start, config);
    const tks::ObjectiveEval final_eval = tks::evaluate(spec, result.x_hat);

    py::dict out;
    out["x"] = states_to_array(result.x_hat);
    out["status"] = std::string(tks::to_string(result.status));
    out["iterations"] = result.iterations();
    out["objective"] = result.final_objective();
    out["trace"] = trace_to_dict(result.trace);
    out["omega"] = tks::Vector(Eigen::Map<const tks::Vector>(final_eval.omega.data(), N));
    out["tau"] = tks::Vector(Eigen::Map<const tks::Vector>(final_eval.tau.data(), N));
    return out;
}

py::dict run_experiment_py(const std::string& name, int runs, std::uint64_t seed,
                           const std::string& scheme, std::optional<double> p,
                           std::optional<double> phi, std::optional<double> a,
                           std::optional<double> b, std::optional<double> base_var,
                           std::optional<std::vector<std::string>> smoothers, double jump_size,
                           int steps, double r, double s) {
    tks::ExperimentSpec spec = tks::default_experiment(tks::experiment_from_name(name));
    spec.runs = runs;
    spec.seed = seed;
    spec.r = r;
    spec.s = s;
    if (jump_size >= 0.0) spec.jump_size = jump_size;
    if (steps > 0) spec.N = steps;

    const double base = base_var.value_or(spec.scheme.base_var);
    if (scheme == "nominal")
        spec.scheme = tks::ContaminationScheme::nominal(base);
    else if (scheme == "gauss")
        spec.scheme = tks::ContaminationScheme::gauss_mix(p.value_or(0.1), phi.value_or(100.0), base);
    else if (scheme == "uniform")
        spec.scheme = tks::ContaminationScheme::uniform_mix(p.value_or(0.1), a.value_or(-10.0),
                                                            b.value_or(10.0), base);
    else
        throw std::invalid_argument("scheme must be nominal, gauss or uniform");

    if (smoothers) {
        std::vector<tks::SmootherChoice> chosen;
        for (const auto& label : *smoothers) {
            if (label == "custom") {
                bool found = false;
                for (const auto& choice : spec.smoothers)
                    if (choice.kind == tks::PresetKind::Custom) {
                        chosen.push_back(choice);
                        found = true;
                    }
                if (!found)
                    throw std::invalid_argument(
                        "'custom' is only defined for the jump-two-sensor experiment");
            } else {
                tks::SmootherChoice choice;
                choice.kind = tks::preset_from_name(label);
                chosen.push_back(choice);
            }
        }
        spec.smoothers = std::move(chosen);
    }

    const tks::RunStats stats = tks::run_experiment(spec);
    py::dict out;
    out["runs"] = stats.runs;
    out["seed"] = stats.seed;
    py::list smoother_list;
    for (const auto& agg : stats.smoothers) {
        py::dict item;
        item["label"] = agg.label;
        item["median_mse"] = agg.median;
        item["q025_mse"] = agg.q025;
        item["q975_mse"] = agg.q975;
        item["mean_iterations"] = agg.mean_iterations;
        item["failures"] = agg.failures;
        item["mse"] = tks::Vector(Eigen::Map<const tks::Vector>(
            agg.mse_runs.data(), static_cast<Eigen::Index>(agg.mse_runs.size())));
        item["max_delta"] = agg.max_delta;
        item["monotone"] = agg.monotone;
        smoother_list.append(std::move(item));
    }
    out["smoothers"] = std::move(smoother_list);
    return out;
}

tks::Vector block_tridiag_solve(const std::vector<tks::Matrix>& diag,
                                const std::vector<tks::Matrix>& sub, const tks::Vector& rhs) {
    tks::BlockTridiagonalSystem sys;
    sys.N = static_cast<int>(diag.size());
    sys.n = sys.N > 0 ? static_cast<int>(diag[0].rows()) : 0;
    sys.diag = diag;
    sys.sub = sub;
    return tks::solve(tks::factor(sys), rhs);
}

} // namespace

PYBIND11_MODULE(tksmooth, mod) {
    mod.doc() = "Kalman smoothing with Student's t noise on selected residual components";

    mod.def("cauchy_tail_ratio", &tks::cauchy_tail_ratio, py::arg("t"),
            "Pr(|y| > 2t | |y| > t) for a standard Cauchy variate");
    mod.def("student_weight", &tks::student_weight, py::arg("q"), py::arg("dof"),
            "Curvature weight dof / (dof + q)");
    mod.def(
        "student_log_density",
        [](const tks::Vector& v, const tks::Vector& mu, const tks::Matrix& rinv, double s) {
            return tks::student_log_density(v, mu, rinv, s);
        },
        py::arg("v"), py::arg("mu"), py::arg("Rinv"), py::arg("s"),
        "Log density of the multivariate Student's t with precision Rinv");
    mod.def(
        "mse",
        [](const tks::Matrix& truth, const tks::Matrix& estimate) {
            return tks::mse(array_to_states(truth), array_to_states(estimate));
        },
        py::arg("truth"), py::arg("estimate"),
        "Mean over time of the squared state error, summed over components");
    mod.def("block_tridiag_solve", &block_tridiag_solve, py::arg("diag"), py::arg("sub"),
            py::arg("rhs"),
            "Solve a symmetric positive-definite block-tridiagonal system");

    mod.def("smooth_linear", &smooth_linear, py::arg("G"), py::arg("H"), py::arg("Qinv"),
            py::arg("Rinv"), py::arg("g0"), py::arg("z"), py::kw_only(), py::arg("preset") = "l2",
            py::arg("proc_student") = py::none(), py::arg("meas_student") = py::none(),
            py::arg("r") = 4.0, py::arg("s") = 4.0, py::arg("epsilon") = -1.0,
            py::arg("beta") = 1e-4, py::arg("gamma") = 0.5, py::arg("max_iter") = 100,
            py::arg("max_backtrack") = 50, py::arg("x0") = py::none(),
            "Smooth measurements z (N x m; NaN = missing) against a linear time-invariant model");

    mod.def("run_experiment", &run_experiment_py, py::arg("name"), py::kw_only(),
            py::arg("runs") = 200, py::arg("seed") = 1, py::arg("scheme") = "nominal",
            py::arg("p") = py::none(), py::arg("phi") = py::none(), py::arg("a") = py::none(),
            py::arg("b") = py::none(), py::arg("base_var") = py::none(),
            py::arg("smoothers") = py::none(), py::arg("jump_size") = -1.0, py::arg("steps") = 0,
            py::arg("r") = 4.0, py::arg("s") = 4.0,
            "Run a built-in Monte Carlo study and return summary statistics");

    py::register_exception<tks::NotPositiveDefinite>(mod, "NotPositiveDefinite");
}
