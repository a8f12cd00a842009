#include "tksmooth/io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <numbers>
#include <ostream>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

namespace tks {

using nlohmann::json;

std::string format_double(double value) {
    char buf[32];
    const auto res = std::to_chars(buf, buf + sizeof(buf), value);
    return std::string(buf, res.ptr);
}

// ---------------------------------------------------------------------------
// CSV reading
// ---------------------------------------------------------------------------

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> cells;
    std::string cell;
    std::stringstream ss(line);
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (!line.empty() && line.back() == ',') cells.emplace_back();
    return cells;
}

std::string trim(const std::string& s) {
    const auto begin = s.find_first_not_of(" \t\r\n");
    if (begin == std::string::npos) return "";
    const auto end = s.find_last_not_of(" \t\r\n");
    return s.substr(begin, end - begin + 1);
}

double parse_double(const std::string& cell, int line_no) {
    const std::string t = trim(cell);
    double value = 0.0;
    const auto res = std::from_chars(t.data(), t.data() + t.size(), value);
    if (res.ec != std::errc{} || res.ptr != t.data() + t.size())
        throw ConfigError("csv line " + std::to_string(line_no) + ": cannot parse number '" + cell +
                          "'");
    return value;
}

} // namespace

MeasurementData read_measurement_csv(std::istream& in, int m) {
    if (m <= 0) throw ConfigError("csv: measurement dimension must be positive");

    std::string line;
    if (!std::getline(in, line)) throw ConfigError("csv: empty file");
    const auto header = split_csv_line(line);
    if (static_cast<int>(header.size()) != m + 1)
        throw ConfigError("csv: header has " + std::to_string(header.size()) + " columns, expected " +
                          std::to_string(m + 1) + " (t,z_1..z_" + std::to_string(m) + ")");
    if (trim(header[0]) != "t") throw ConfigError("csv: first column must be 't'");

    MeasurementData data;
    int line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty()) continue;
        const auto cells = split_csv_line(line);
        if (static_cast<int>(cells.size()) != m + 1)
            throw ConfigError("csv line " + std::to_string(line_no) + ": has " +
                              std::to_string(cells.size()) + " columns, expected " +
                              std::to_string(m + 1));
        const double t = parse_double(cells[0], line_no);
        if (!data.times.empty() && !(t > data.times.back()))
            throw ConfigError("csv line " + std::to_string(line_no) +
                              ": time column must be strictly increasing");
        data.times.push_back(t);
        Vector z = Vector::Zero(m);
        std::vector<bool> missing(m, false);
        for (int j = 0; j < m; ++j) {
            if (trim(cells[j + 1]).empty())
                missing[j] = true;
            else
                z(j) = parse_double(cells[j + 1], line_no);
        }
        data.z.push_back(std::move(z));
        data.missing.push_back(std::move(missing));
    }
    if (data.times.size() < 2) throw ConfigError("csv: need at least two measurement rows");
    return data;
}

MeasurementData read_measurement_csv_file(const std::string& path, int m) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open '" + path + "'");
    return read_measurement_csv(in, m);
}

void apply_missing(ProblemSpec& spec, const std::vector<std::vector<bool>>& missing) {
    for (std::size_t k = 0; k < missing.size() && k < spec.precisions.Rinv.size(); ++k)
        for (std::size_t j = 0; j < missing[k].size(); ++j)
            if (missing[k][j]) {
                spec.precisions.Rinv[k].row(static_cast<Eigen::Index>(j)).setZero();
                spec.precisions.Rinv[k].col(static_cast<Eigen::Index>(j)).setZero();
            }
}

// ---------------------------------------------------------------------------
// Model config
// ---------------------------------------------------------------------------

namespace {

void reject_unknown_keys(const json& obj, const std::set<std::string>& allowed,
                         const std::string& where) {
    for (const auto& item : obj.items())
        if (!allowed.count(item.key()))
            throw ConfigError(where + ": unknown key '" + item.key() + "'");
}

Matrix parse_matrix(const json& node, int rows, int cols, const std::string& what) {
    if (!node.is_array() || static_cast<int>(node.size()) != rows)
        throw ConfigError(what + ": expected " + std::to_string(rows) + " rows");
    Matrix out(rows, cols);
    for (int i = 0; i < rows; ++i) {
        const auto& row = node[i];
        if (!row.is_array() || static_cast<int>(row.size()) != cols)
            throw ConfigError(what + ": row " + std::to_string(i) + " must have " +
                              std::to_string(cols) + " entries");
        for (int j = 0; j < cols; ++j) {
            if (!row[j].is_number()) throw ConfigError(what + ": entries must be numbers");
            out(i, j) = row[j].get<double>();
        }
    }
    return out;
}

Vector parse_vector(const json& node, int len, const std::string& what) {
    if (!node.is_array() || static_cast<int>(node.size()) != len)
        throw ConfigError(what + ": expected " + std::to_string(len) + " entries");
    Vector out(len);
    for (int i = 0; i < len; ++i) {
        if (!node[i].is_number()) throw ConfigError(what + ": entries must be numbers");
        out(i) = node[i].get<double>();
    }
    return out;
}

/// Shared matrix, or a list of N matrices.
std::vector<Matrix> parse_precisions(const json& node, int dim, int N, const std::string& what) {
    const bool per_step = node.is_array() && !node.empty() && node[0].is_array() &&
                          !node[0].empty() && node[0][0].is_array();
    if (!per_step) return std::vector<Matrix>(N, parse_matrix(node, dim, dim, what));
    if (static_cast<int>(node.size()) != N)
        throw ConfigError(what + ": per-step list must have N = " + std::to_string(N) + " entries");
    std::vector<Matrix> out;
    out.reserve(N);
    for (int k = 0; k < N; ++k)
        out.push_back(parse_matrix(node[k], dim, dim, what + "[" + std::to_string(k) + "]"));
    return out;
}

std::vector<int> parse_index_set(const json& node, const std::string& what) {
    if (!node.is_array()) throw ConfigError(what + ": expected an array of indices");
    std::vector<int> out;
    for (const auto& v : node) {
        if (!v.is_number_integer()) throw ConfigError(what + ": indices must be integers");
        out.push_back(v.get<int>());
    }
    return out;
}

NoisePartition parse_partition(const json& node, int n, int m) {
    reject_unknown_keys(node, {"preset", "proc_student", "meas_student", "r", "s"}, "partition");
    const double r = node.value("r", 4.0);
    const double s = node.value("s", 4.0);
    if (node.contains("preset")) {
        if (node.contains("proc_student") || node.contains("meas_student"))
            throw ConfigError("partition: give either 'preset' or explicit index sets, not both");
        try {
            return make_preset(preset_from_name(node["preset"].get<std::string>()), n, m, r, s);
        } catch (const InvalidPreset& e) {
            throw ConfigError(std::string("partition: ") + e.what());
        }
    }
    try {
        return make_custom(node.contains("proc_student") ? parse_index_set(node["proc_student"],
                                                                           "partition.proc_student")
                                                         : std::vector<int>{},
                           node.contains("meas_student") ? parse_index_set(node["meas_student"],
                                                                           "partition.meas_student")
                                                         : std::vector<int>{},
                           n, m, r, s);
    } catch (const InvalidPreset& e) {
        throw ConfigError(std::string("partition: ") + e.what());
    }
}

SmootherConfig parse_solver(const json& node) {
    reject_unknown_keys(node, {"epsilon", "beta", "gamma", "eta", "max_iter", "max_backtrack"},
                        "solver");
    SmootherConfig config;
    config.epsilon = node.value("epsilon", config.epsilon);
    config.beta = node.value("beta", config.beta);
    config.gamma = node.value("gamma", config.gamma);
    config.eta = node.value("eta", config.eta);
    config.max_iter = node.value("max_iter", config.max_iter);
    config.max_backtrack = node.value("max_backtrack", config.max_backtrack);
    try {
        config.validate();
    } catch (const std::exception& e) {
        throw ConfigError(std::string("solver: ") + e.what());
    }
    return config;
}

std::vector<double> resolve_times(const json& config, const std::vector<double>& times,
                                  double default_dt) {
    if (!times.empty()) {
        if (config.contains("N") && config["N"].get<int>() != static_cast<int>(times.size()))
            throw ConfigError("config N = " + std::to_string(config["N"].get<int>()) +
                              " does not match the data (" + std::to_string(times.size()) +
                              " rows)");
        return times;
    }
    const int N = config.value("N", 0);
    if (N < 2) throw ConfigError("config: 'N' (>= 2) is required without a data file");
    const double dt = config.value("dt", default_dt);
    if (!(dt > 0.0)) throw ConfigError("config: 'dt' must be positive");
    std::vector<double> grid(N);
    for (int k = 0; k < N; ++k) grid[k] = dt * (k + 1);
    return grid;
}

LoadedModel load_matrix_model(const json& config, const std::vector<double>& times) {
    reject_unknown_keys(config,
                        {"model", "name", "n", "m", "N", "dt", "G", "H", "Qinv", "Rinv", "g0",
                         "partition", "solver"},
                        "config");
    for (const char* key : {"n", "m", "G", "H", "Qinv", "Rinv", "g0"})
        if (!config.contains(key))
            throw ConfigError(std::string("config: missing required key '") + key + "'");

    const int n = config["n"].get<int>();
    const int m = config["m"].get<int>();
    if (n <= 0 || m <= 0) throw ConfigError("config: n and m must be positive");
    const auto grid = resolve_times(config, times, 1.0);
    const int N = static_cast<int>(grid.size());

    const Matrix g_mat = parse_matrix(config["G"], n, n, "G");
    const Matrix h_mat = parse_matrix(config["H"], m, n, "H");

    LoadedModel out;
    out.kind = "matrix";
    out.spec.process.n = n;
    out.spec.process.g0 = parse_vector(config["g0"], n, "g0");
    out.spec.process.g = [g_mat](int, const Vector& x) { return (g_mat * x).eval(); };
    out.spec.process.g_jac = [g_mat](int, const Vector&) { return g_mat; };
    out.spec.measurement.m = m;
    out.spec.measurement.h = [h_mat](int, const Vector& x) { return (h_mat * x).eval(); };
    out.spec.measurement.h_jac = [h_mat](int, const Vector&) { return h_mat; };
    out.spec.measurement.z.assign(N, Vector::Zero(m));
    out.spec.precisions.Qinv = parse_precisions(config["Qinv"], n, N, "Qinv");
    out.spec.precisions.Rinv = parse_precisions(config["Rinv"], m, N, "Rinv");
    out.spec.partition =
        config.contains("partition") ? parse_partition(config["partition"], n, m) : NoisePartition{};
    out.solver = config.contains("solver") ? parse_solver(config["solver"]) : SmootherConfig{};
    return out;
}

LoadedModel load_spline_model(const json& config, const std::vector<double>& times) {
    reject_unknown_keys(config,
                        {"model", "name", "N", "dt", "meas_var", "g0", "partition", "solver"},
                        "config");
    const auto grid = resolve_times(config, times, 0.04 * std::numbers::pi);
    const int N = static_cast<int>(grid.size());
    const double meas_var = config.value("meas_var", 0.25);
    if (!(meas_var > 0.0)) throw ConfigError("config: 'meas_var' must be positive");

    // per-step spacing; the first step reuses the first observed gap
    std::vector<double> dts(N);
    dts[0] = grid[1] - grid[0];
    for (int k = 1; k < N; ++k) dts[k] = grid[k] - grid[k - 1];
    for (double dt : dts)
        if (!(dt > 0.0)) throw ConfigError("config: time grid must be strictly increasing");

    std::vector<Matrix> trans(N);
    LoadedModel out;
    out.kind = "spline";
    out.spec.precisions.Qinv.resize(N);
    for (int k = 0; k < N; ++k) {
        Matrix g(2, 2);
        g << 1.0, 0.0, dts[k], 1.0;
        trans[k] = g;
        Matrix qinv(2, 2);
        const double dt = dts[k];
        qinv << 4.0 / dt, -6.0 / (dt * dt), -6.0 / (dt * dt), 12.0 / (dt * dt * dt);
        out.spec.precisions.Qinv[k] = qinv;
    }

    out.spec.process.n = 2;
    out.spec.process.g = [trans](int k, const Vector& x) { return (trans[k] * x).eval(); };
    out.spec.process.g_jac = [trans](int k, const Vector&) { return trans[k]; };
    if (config.contains("g0")) {
        out.spec.process.g0 = parse_vector(config["g0"], 2, "g0");
    } else {
        // no anchor supplied: damp the first-step precision so the start of
        // the trajectory is set by the data rather than by a made-up prior
        out.spec.process.g0 = Vector::Zero(2);
        out.spec.precisions.Qinv[0] *= 1e-8;
    }

    Matrix h_mat(1, 2);
    h_mat << 0.0, 1.0;
    out.spec.measurement.m = 1;
    out.spec.measurement.h = [h_mat](int, const Vector& x) { return (h_mat * x).eval(); };
    out.spec.measurement.h_jac = [h_mat](int, const Vector&) { return h_mat; };
    out.spec.measurement.z.assign(N, Vector::Zero(1));
    out.spec.precisions.Rinv.assign(N, Matrix::Constant(1, 1, 1.0 / meas_var));
    out.spec.partition =
        config.contains("partition") ? parse_partition(config["partition"], 2, 1) : NoisePartition{};
    out.solver = config.contains("solver") ? parse_solver(config["solver"]) : SmootherConfig{};
    return out;
}

LoadedModel load_vdp_model(const json& config, const std::vector<double>& times) {
    reject_unknown_keys(
        config, {"model", "name", "N", "dt", "mu", "q_var", "meas_var", "x0", "partition", "solver"},
        "config");
    const auto grid = resolve_times(config, times, 16.0 / 164.0);
    const int N = static_cast<int>(grid.size());
    const double mu = config.value("mu", 2.0);
    const double q_var = config.value("q_var", 0.01);
    const double meas_var = config.value("meas_var", 1.0);
    if (!(q_var > 0.0) || !(meas_var > 0.0))
        throw ConfigError("config: 'q_var' and 'meas_var' must be positive");

    std::vector<double> dts(N);
    dts[0] = grid[1] - grid[0];
    for (int k = 1; k < N; ++k) dts[k] = grid[k] - grid[k - 1];
    for (double dt : dts)
        if (!(dt > 0.0)) throw ConfigError("config: time grid must be strictly increasing");

    LoadedModel out;
    out.kind = "vdp";
    out.spec.process.n = 2;
    out.spec.process.g = [mu, dts](int k, const Vector& x) {
        const double dt = dts[k];
        Vector next(2);
        next(0) = x(0) + x(1) * dt;
        next(1) = x(1) + (mu * (1.0 - x(0) * x(0)) * x(1) - x(0)) * dt;
        return next;
    };
    out.spec.process.g_jac = [mu, dts](int k, const Vector& x) {
        const double dt = dts[k];
        Matrix jac(2, 2);
        jac << 1.0, dt, (-2.0 * mu * x(0) * x(1) - 1.0) * dt, 1.0 + mu * (1.0 - x(0) * x(0)) * dt;
        return jac;
    };
    Vector x0(2);
    x0 << 0.0, -0.5;
    if (config.contains("x0")) x0 = parse_vector(config["x0"], 2, "x0");
    {
        // anchor is one Euler step from the supplied initial state
        const double dt = dts[0];
        Vector g0(2);
        g0(0) = x0(0) + x0(1) * dt;
        g0(1) = x0(1) + (mu * (1.0 - x0(0) * x0(0)) * x0(1) - x0(0)) * dt;
        out.spec.process.g0 = g0;
    }

    Matrix h_mat(1, 2);
    h_mat << 1.0, 0.0;
    out.spec.measurement.m = 1;
    out.spec.measurement.h = [h_mat](int, const Vector& x) { return (h_mat * x).eval(); };
    out.spec.measurement.h_jac = [h_mat](int, const Vector&) { return h_mat; };
    out.spec.measurement.z.assign(N, Vector::Zero(1));
    out.spec.precisions.Qinv.assign(N, Matrix::Identity(2, 2) / q_var);
    out.spec.precisions.Rinv.assign(N, Matrix::Constant(1, 1, 1.0 / meas_var));
    out.spec.partition =
        config.contains("partition") ? parse_partition(config["partition"], 2, 1) : NoisePartition{};
    out.solver = config.contains("solver") ? parse_solver(config["solver"]) : SmootherConfig{};
    return out;
}

} // namespace

LoadedModel load_model_config(const json& config, const std::vector<double>& times) {
    if (!config.is_object()) throw ConfigError("config: expected a JSON object");
    if (!times.empty() && times.size() < 2) throw ConfigError("config: need at least two steps");
    const std::string model = config.value("model", "matrix");
    if (model == "matrix") return load_matrix_model(config, times);
    if (model == "spline") return load_spline_model(config, times);
    if (model == "vdp") return load_vdp_model(config, times);
    throw ConfigError("config: unknown model '" + model + "' (expected matrix, spline or vdp)");
}

int config_meas_dim(const nlohmann::json& config) {
    if (!config.is_object()) throw ConfigError("config: expected a JSON object");
    const std::string model = config.value("model", "matrix");
    if (model == "spline" || model == "vdp") return 1;
    if (model != "matrix")
        throw ConfigError("config: unknown model '" + model + "' (expected matrix, spline or vdp)");
    if (!config.contains("m")) throw ConfigError("config: missing required key 'm'");
    const int m = config["m"].get<int>();
    if (m <= 0) throw ConfigError("config: m must be positive");
    return m;
}

LoadedModel load_model_config_file(const std::string& path, const std::vector<double>& times) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open '" + path + "'");
    json config;
    try {
        in >> config;
    } catch (const json::exception& e) {
        throw ConfigError("config '" + path + "': " + e.what());
    }
    return load_model_config(config, times);
}

// ---------------------------------------------------------------------------
// Writers
// ---------------------------------------------------------------------------

void write_states_csv(std::ostream& out, const std::vector<double>& times, const StateSequence& x) {
    out << "t";
    for (int i = 1; i <= x.state_dim(); ++i) out << ",x_" << i;
    out << "\n";
    for (int k = 0; k < x.steps(); ++k) {
        out << format_double(times[k]);
        for (int i = 0; i < x.state_dim(); ++i) out << "," << format_double(x.at(k)(i));
        out << "\n";
    }
}

void write_trace_csv(std::ostream& out, const std::vector<IterationRecord>& trace) {
    out << "iter,objective,delta,step,grad_norm,backtracks\n";
    for (const auto& rec : trace)
        out << rec.iter << "," << format_double(rec.objective) << "," << format_double(rec.delta)
            << "," << format_double(rec.step) << "," << format_double(rec.grad_norm) << ","
            << rec.backtracks << "\n";
}

void write_weights_csv(std::ostream& out, const std::vector<double>& times,
                       const std::vector<double>& omega, const std::vector<double>& tau) {
    out << "t,omega,tau\n";
    for (std::size_t k = 0; k < omega.size(); ++k)
        out << format_double(times[k]) << "," << format_double(omega[k]) << ","
            << format_double(tau[k]) << "\n";
}

void write_trajectory_csv(std::ostream& out, const std::vector<double>& times,
                          const StateSequence& truth, const StateSequence& estimate) {
    out << "t";
    for (int i = 1; i <= truth.state_dim(); ++i) out << ",truth_" << i;
    for (int i = 1; i <= estimate.state_dim(); ++i) out << ",x_" << i;
    out << "\n";
    for (int k = 0; k < truth.steps(); ++k) {
        out << format_double(times[k]);
        for (int i = 0; i < truth.state_dim(); ++i) out << "," << format_double(truth.at(k)(i));
        for (int i = 0; i < estimate.state_dim(); ++i)
            out << "," << format_double(estimate.at(k)(i));
        out << "\n";
    }
}

void write_stats_csv(std::ostream& out, const RunStats& stats) {
    out << "smoother,runs,failures,median_mse,q025_mse,q975_mse,mean_iterations\n";
    for (const auto& s : stats.smoothers)
        out << s.label << "," << stats.runs << "," << s.failures << "," << format_double(s.median)
            << "," << format_double(s.q025) << "," << format_double(s.q975) << ","
            << format_double(s.mean_iterations) << "\n";
}

json stats_to_json(const RunStats& stats) {
    json out;
    out["runs"] = stats.runs;
    out["seed"] = stats.seed;
    out["smoothers"] = json::array();
    for (const auto& s : stats.smoothers) {
        json item;
        item["label"] = s.label;
        item["median_mse"] = s.median;
        item["q025_mse"] = s.q025;
        item["q975_mse"] = s.q975;
        item["mean_iterations"] = s.mean_iterations;
        item["failures"] = s.failures;
        json runs = json::array();
        for (double v : s.mse_runs) {
            if (std::isfinite(v))
                runs.push_back(v);
            else
                runs.push_back(nullptr);
        }
        item["mse"] = std::move(runs);
        out["smoothers"].push_back(std::move(item));
    }
    return out;
}

} // namespace tks
