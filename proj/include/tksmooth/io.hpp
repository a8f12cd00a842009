#ifndef TKSMOOTH_IO_HPP
#define TKSMOOTH_IO_HPP

#include <iosfwd>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "tksmooth/experiments.hpp"

namespace tks {

/// Malformed configuration or data file. CLI maps this to exit code 2.
class ConfigError : public std::runtime_error {
public:
    explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

/// Shortest decimal representation that parses back to the same double.
std::string format_double(double value);

// ---------------------------------------------------------------------------
// Measurement CSV: header "t,z_1,..,z_m"; a blank cell marks a missing
// measurement for that step and component.
// ---------------------------------------------------------------------------

struct MeasurementData {
    std::vector<double> times;
    std::vector<Vector> z;                    ///< blanks stored as 0
    std::vector<std::vector<bool>> missing;   ///< [step][component]

    int steps() const { return static_cast<int>(times.size()); }
};

MeasurementData read_measurement_csv(std::istream& in, int m);
MeasurementData read_measurement_csv_file(const std::string& path, int m);

/// Zeroes the precision row/column of every missing component so the padded
/// entries contribute nothing.
void apply_missing(ProblemSpec& spec, const std::vector<std::vector<bool>>& missing);

// ---------------------------------------------------------------------------
// Model configuration (JSON). Either an explicit linear time-invariant model
//   { "model": "matrix", "n", "m", "G", "H", "Qinv", "Rinv", "g0",
//     "N"?, "partition"?, "solver"? }
// (Qinv/Rinv shared or one per step), or a built-in family
//   { "model": "spline" | "vdp", ... }
// instantiated on a time grid. Unknown keys are rejected.
// ---------------------------------------------------------------------------

struct LoadedModel {
    ProblemSpec spec;       ///< measurements zeroed; N resolved
    SmootherConfig solver;  ///< defaults unless the config overrides them
    std::string kind;
};

/// Instantiates the model on the given time grid (normally the CSV's t
/// column). Pass an empty grid to use the config's own N and dt.
LoadedModel load_model_config(const nlohmann::json& config, const std::vector<double>& times = {});
LoadedModel load_model_config_file(const std::string& path, const std::vector<double>& times = {});

/// Measurement dimension implied by a config, without instantiating it
/// (the CSV reader needs m before the time grid exists).
int config_meas_dim(const nlohmann::json& config);

// ---------------------------------------------------------------------------
// Writers. All numeric output goes through format_double, so files are
// byte-stable across runs and locales.
// ---------------------------------------------------------------------------

void write_states_csv(std::ostream& out, const std::vector<double>& times, const StateSequence& x);
void write_trace_csv(std::ostream& out, const std::vector<IterationRecord>& trace);
void write_weights_csv(std::ostream& out, const std::vector<double>& times,
                       const std::vector<double>& omega, const std::vector<double>& tau);
void write_trajectory_csv(std::ostream& out, const std::vector<double>& times,
                          const StateSequence& truth, const StateSequence& estimate);

void write_stats_csv(std::ostream& out, const RunStats& stats);
nlohmann::json stats_to_json(const RunStats& stats);

} // namespace tks

#endif
