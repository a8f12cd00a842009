// Command-line front end: run the built-in Monte Carlo experiments, smooth
// user-supplied CSV data against a configured model, or self-check a model
// configuration. Exit codes: 0 success, 1 numerical abort or failed check,
// 2 usage/config error.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "tksmooth/check.hpp"
#include "tksmooth/io.hpp"

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

std::string default_out_dir() {
    const char* env = std::getenv("TKSMOOTH_OUT");
    return env != nullptr && *env != '\0' ? env : ".";
}

std::ofstream open_output(const fs::path& path) {
    std::ofstream out(path);
    if (!out) throw tks::ConfigError("cannot write '" + path.string() + "'");
    return out;
}

std::vector<std::string> split(const std::string& text, char sep) {
    std::vector<std::string> parts;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, sep)) parts.push_back(item);
    return parts;
}

double parse_num(const std::string& text, const std::string& what) {
    try {
        std::size_t pos = 0;
        const double v = std::stod(text, &pos);
        if (pos != text.size()) throw std::invalid_argument(text);
        return v;
    } catch (const std::exception&) {
        throw tks::ConfigError(what + ": cannot parse number '" + text + "'");
    }
}

tks::ContaminationScheme parse_scheme(const std::string& text, double default_base_var) {
    const auto parts = split(text, ':');
    tks::ContaminationScheme scheme;
    if (parts.empty()) throw tks::ConfigError("scheme: empty specification");
    if (parts[0] == "nominal") {
        if (parts.size() > 2) throw tks::ConfigError("scheme: nominal takes at most one parameter");
        scheme = tks::ContaminationScheme::nominal(
            parts.size() == 2 ? parse_num(parts[1], "scheme") : default_base_var);
    } else if (parts[0] == "gauss") {
        if (parts.size() != 3 && parts.size() != 4)
            throw tks::ConfigError("scheme: expected gauss:p:phi[:base_var]");
        scheme = tks::ContaminationScheme::gauss_mix(
            parse_num(parts[1], "scheme p"), parse_num(parts[2], "scheme phi"),
            parts.size() == 4 ? parse_num(parts[3], "scheme base_var") : default_base_var);
    } else if (parts[0] == "uniform") {
        if (parts.size() != 4 && parts.size() != 5)
            throw tks::ConfigError("scheme: expected uniform:p:a:b[:base_var]");
        scheme = tks::ContaminationScheme::uniform_mix(
            parse_num(parts[1], "scheme p"), parse_num(parts[2], "scheme a"),
            parse_num(parts[3], "scheme b"),
            parts.size() == 5 ? parse_num(parts[4], "scheme base_var") : default_base_var);
    } else {
        throw tks::ConfigError("scheme: unknown kind '" + parts[0] +
                               "' (expected nominal, gauss or uniform)");
    }
    try {
        scheme.validate();
    } catch (const std::exception& e) {
        throw tks::ConfigError(std::string("scheme: ") + e.what());
    }
    return scheme;
}

std::vector<tks::SmootherChoice> parse_smoothers(const std::string& text,
                                                 const tks::ExperimentSpec& defaults) {
    std::vector<tks::SmootherChoice> out;
    for (const auto& name : split(text, ',')) {
        if (name == "custom") {
            bool found = false;
            for (const auto& choice : defaults.smoothers)
                if (choice.kind == tks::PresetKind::Custom) {
                    out.push_back(choice);
                    found = true;
                    break;
                }
            if (!found)
                throw tks::ConfigError(
                    "smoothers: 'custom' is only defined for the jump-two-sensor experiment");
        } else {
            tks::SmootherChoice choice;
            try {
                choice.kind = tks::preset_from_name(name);
            } catch (const tks::InvalidPreset& e) {
                throw tks::ConfigError(std::string("smoothers: ") + e.what());
            }
            out.push_back(choice);
        }
    }
    if (out.empty()) throw tks::ConfigError("smoothers: empty list");
    return out;
}

struct SolverFlags {
    double epsilon = -1.0;
    double beta = -1.0;
    double gamma = -1.0;
    int max_iter = -1;
    int max_backtrack = -1;

    void add_to(CLI::App& app) {
        app.add_option("--epsilon", epsilon, "Termination tolerance (default: scale-relative)");
        app.add_option("--beta", beta, "Sufficient-decrease parameter in (0,1)");
        app.add_option("--gamma", gamma, "Backtracking factor in (0,1)");
        app.add_option("--max-iter", max_iter, "Iteration cap");
        app.add_option("--max-backtrack", max_backtrack, "Line-search trial cap");
    }

    tks::SmootherConfig apply(tks::SmootherConfig config) const {
        if (epsilon >= 0.0) config.epsilon = epsilon;
        if (beta > 0.0) config.beta = beta;
        if (gamma > 0.0) config.gamma = gamma;
        if (max_iter >= 0) config.max_iter = max_iter;
        if (max_backtrack >= 0) config.max_backtrack = max_backtrack;
        return config;
    }
};

int cmd_experiment(const std::string& name, int runs, std::uint64_t seed,
                   const std::string& scheme_text, const std::string& smoothers_text, double dof_r,
                   double dof_s, double jump_size, int steps, const std::string& out_dir,
                   bool dump_trajectories, const SolverFlags& solver) {
    tks::ExperimentSpec spec = tks::default_experiment(tks::experiment_from_name(name));
    spec.runs = runs;
    spec.seed = seed;
    spec.r = dof_r;
    spec.s = dof_s;
    if (jump_size >= 0.0) spec.jump_size = jump_size;
    if (steps > 0) spec.N = steps;
    if (!scheme_text.empty()) spec.scheme = parse_scheme(scheme_text, spec.scheme.base_var);
    if (!smoothers_text.empty()) spec.smoothers = parse_smoothers(smoothers_text, spec);
    spec.solver = solver.apply(spec.solver);

    const fs::path dir(out_dir);
    fs::create_directories(dir);
    if (dump_trajectories) {
        spec.on_estimate = [&dir](int run, const std::string& label,
                                  const std::vector<double>& times, const tks::StateSequence& truth,
                                  const tks::StateSequence& estimate) {
            char run_tag[16];
            std::snprintf(run_tag, sizeof(run_tag), "%04d", run);
            auto out = open_output(dir / ("traj_run" + std::string(run_tag) + "_" + label + ".csv"));
            tks::write_trajectory_csv(out, times, truth, estimate);
        };
    }

    const tks::RunStats stats = tks::run_experiment(spec);

    {
        auto out = open_output(dir / "stats.csv");
        tks::write_stats_csv(out, stats);
    }
    {
        json doc = tks::stats_to_json(stats);
        doc["experiment"] = name;
        doc["scheme"] = spec.scheme.describe();
        auto out = open_output(dir / "stats.json");
        out << doc.dump(2) << "\n";
    }

    std::ostringstream table;
    tks::write_stats_csv(table, stats);
    std::cout << table.str();

    int failures = 0;
    for (const auto& s : stats.smoothers) failures += s.failures;
    if (failures > 0) {
        std::cerr << "warning: " << failures << " smoother run(s) aborted\n";
        return 1;
    }
    return 0;
}

int cmd_smooth(const std::string& model_path, const std::string& data_path,
               const std::string& out_dir, const std::string& preset_override,
               const SolverFlags& solver) {
    // the config fixes m, which the CSV reader needs up front
    json config;
    {
        std::ifstream in(model_path);
        if (!in) throw tks::ConfigError("cannot open '" + model_path + "'");
        try {
            in >> config;
        } catch (const json::exception& e) {
            throw tks::ConfigError("config '" + model_path + "': " + e.what());
        }
    }
    const tks::MeasurementData data =
        tks::read_measurement_csv_file(data_path, tks::config_meas_dim(config));

    tks::LoadedModel model = tks::load_model_config(config, data.times);
    model.spec.measurement.z = data.z;
    tks::apply_missing(model.spec, data.missing);
    if (!preset_override.empty()) {
        try {
            model.spec.partition =
                tks::make_preset(tks::preset_from_name(preset_override), model.spec.state_dim(),
                                 model.spec.meas_dim(), model.spec.partition.r,
                                 model.spec.partition.s);
        } catch (const tks::InvalidPreset& e) {
            throw tks::ConfigError(std::string("--preset: ") + e.what());
        }
    }
    try {
        model.spec.validate();
    } catch (const tks::DimensionMismatch& e) {
        throw tks::ConfigError(std::string("model: ") + e.what());
    }

    const tks::SmootherConfig config_solver = solver.apply(model.solver);
    const tks::SmootherResult result =
        tks::run_smoother(model.spec, tks::StateSequence(), config_solver);
    const tks::ObjectiveEval final_eval = tks::evaluate(model.spec, result.x_hat);

    const fs::path dir(out_dir);
    fs::create_directories(dir);
    {
        auto out = open_output(dir / "states.csv");
        tks::write_states_csv(out, data.times, result.x_hat);
    }
    {
        auto out = open_output(dir / "trace.csv");
        tks::write_trace_csv(out, result.trace);
    }
    {
        auto out = open_output(dir / "weights.csv");
        tks::write_weights_csv(out, data.times, final_eval.omega, final_eval.tau);
    }

    std::cout << "status: " << tks::to_string(result.status)
              << "  iterations: " << result.iterations()
              << "  objective: " << tks::format_double(result.final_objective()) << "\n";
    return result.status == tks::SmootherStatus::LineSearchStalled ? 1 : 0;
}

int cmd_check(const std::string& model_path, int states, std::uint64_t seed) {
    tks::LoadedModel model = tks::load_model_config_file(model_path);

    // synthetic measurements from a perturbed trajectory keep the objective
    // generic (all residual terms active) without needing a data file
    tks::Rng rng = tks::Rng::substream(seed, 0xda7aULL);
    tks::StateSequence x(model.spec.state_dim(), model.spec.steps());
    for (Eigen::Index i = 0; i < x.stacked().size(); ++i) x.stacked()(i) = rng.normal();
    for (int k = 0; k < model.spec.steps(); ++k) {
        tks::Vector z = model.spec.measurement.h(k, x.at(k));
        for (Eigen::Index j = 0; j < z.size(); ++j) z(j) += 0.1 * rng.normal();
        model.spec.measurement.z[k] = z;
    }

    const tks::CheckReport report = tks::check_problem(model.spec, states, seed);

    std::cout << "gradient check:  max err " << tks::format_double(report.max_gradient_err)
              << (report.max_gradient_err < 1e-5 ? "  [ok]" : "  [FAIL]") << "\n";
    std::cout << "process jacobian: max err " << tks::format_double(report.max_g_jac_err);
    if (report.g_jac_step >= 0)
        std::cout << " (k=" << report.g_jac_step << ", entry " << report.g_jac_row << ","
                  << report.g_jac_col << ")";
    std::cout << (report.max_g_jac_err < 1e-5 ? "  [ok]" : "  [FAIL]") << "\n";
    std::cout << "measurement jacobian: max err " << tks::format_double(report.max_h_jac_err);
    if (report.h_jac_step >= 0)
        std::cout << " (k=" << report.h_jac_step << ", entry " << report.h_jac_row << ","
                  << report.h_jac_col << ")";
    std::cout << (report.max_h_jac_err < 1e-5 ? "  [ok]" : "  [FAIL]") << "\n";
    std::cout << "curvature factorization: "
              << (report.hessian_pd
                      ? "positive definite at all sampled states  [ok]"
                      : "FAILED at block " + std::to_string(report.hessian_fail_block))
              << "\n";
    return report.pass() ? 0 : 1;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Generalized Student's t Kalman smoothing toolkit"};
    app.require_subcommand(1);

    // experiment
    auto* experiment = app.add_subcommand("experiment", "Run a built-in Monte Carlo study");
    std::string exp_name;
    experiment->add_option("name", exp_name, "spline | vdp | jump | jump-two-sensor")->required();
    int runs = 200;
    std::uint64_t seed = 1;
    std::string scheme_text, smoothers_text;
    double dof_r = 4.0, dof_s = 4.0, jump_size = -1.0;
    int steps = 0;
    std::string out_dir = default_out_dir();
    bool dump_trajectories = false;
    SolverFlags exp_solver;
    experiment->add_option("--runs", runs, "Monte Carlo runs")->check(CLI::PositiveNumber);
    experiment->add_option("--seed", seed, "Base RNG seed");
    experiment->add_option("--scheme", scheme_text,
                           "nominal[:var] | gauss:p:phi[:var] | uniform:p:a:b[:var]");
    experiment->add_option("--smoothers", smoothers_text,
                           "Comma list of l2,t-robust,t-trend,double-t,custom");
    experiment->add_option("--dof-r", dof_r, "Process degrees of freedom");
    experiment->add_option("--dof-s", dof_s, "Measurement degrees of freedom");
    experiment->add_option("--jump-size", jump_size, "Jump height (jump experiments)");
    experiment->add_option("--steps", steps, "Override the number of time steps");
    experiment->add_option("-o,--out", out_dir, "Output directory (default $TKSMOOTH_OUT or .)");
    experiment->add_flag("--dump-trajectories", dump_trajectories,
                         "Write per-run trajectory CSV files");
    exp_solver.add_to(*experiment);

    // smooth
    auto* smooth = app.add_subcommand("smooth", "Smooth a measurement CSV against a model config");
    std::string model_path, data_path, preset_override;
    std::string smooth_out = default_out_dir();
    SolverFlags smooth_solver;
    smooth->add_option("--model", model_path, "Model config (JSON)")->required();
    smooth->add_option("--data", data_path, "Measurement CSV (t,z_1..z_m)")->required();
    smooth->add_option("--preset", preset_override, "Partition preset override");
    smooth->add_option("-o,--out", smooth_out, "Output directory (default $TKSMOOTH_OUT or .)");
    smooth_solver.add_to(*smooth);

    // check
    auto* check = app.add_subcommand("check", "Self-check a model config");
    std::string check_model;
    int check_states = 20;
    std::uint64_t check_seed = 0;
    check->add_option("--model", check_model, "Model config (JSON)")->required();
    check->add_option("--states", check_states, "Random states per check")
        ->check(CLI::PositiveNumber);
    check->add_option("--seed", check_seed, "RNG seed");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (experiment->parsed())
            return cmd_experiment(exp_name, runs, seed, scheme_text, smoothers_text, dof_r, dof_s,
                                  jump_size, steps, out_dir, dump_trajectories, exp_solver);
        if (smooth->parsed())
            return cmd_smooth(model_path, data_path, smooth_out, preset_override, smooth_solver);
        if (check->parsed()) return cmd_check(check_model, check_states, check_seed);
    } catch (const tks::SmootherAbort& e) {
        std::cerr << "error: " << e.what() << " (iteration " << e.iteration << ")\n";
        return 1;
    } catch (const tks::NotPositiveDefinite& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const tks::ConfigError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 2;
}
