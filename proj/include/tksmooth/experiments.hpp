#ifndef TKSMOOTH_EXPERIMENTS_HPP
#define TKSMOOTH_EXPERIMENTS_HPP

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "tksmooth/gauss_newton.hpp"
#include "tksmooth/presets.hpp"
#include "tksmooth/rng.hpp"

namespace tks {

enum class SchemeKind { Nominal, GaussMix, UniformMix };

/// Measurement-noise generator: a nominal Gaussian, optionally mixed with a
/// large-variance Gaussian or a uniform contaminant with probability p.
struct ContaminationScheme {
    SchemeKind kind = SchemeKind::Nominal;
    double base_var = 0.25;
    double p = 0.0;
    double phi = 1.0;              ///< contaminating variance (GaussMix)
    double a = -10.0, b = 10.0;    ///< contaminating support (UniformMix)

    static ContaminationScheme nominal(double base_var);
    static ContaminationScheme gauss_mix(double p, double phi, double base_var = 0.25);
    static ContaminationScheme uniform_mix(double p, double a, double b, double base_var = 0.25);
    void validate() const;
    std::string describe() const;
};

/// One draw: with probability p the contaminant, otherwise N(0, base_var).
double sample_noise(const ContaminationScheme& scheme, Rng& rng);

/// A model template plus its ground truth. `spec` carries noiseless
/// measurements and an all-Gaussian partition; experiment runners overwrite
/// both per run / per smoother.
struct ModelInstance {
    ProblemSpec spec;
    StateSequence truth;
    std::vector<double> times;
};

/// Function reconstruction via the integrated-white-noise (cubic spline)
/// model: states (velocity, position), position measured, truth
/// (-cos t, -sin t) sampled at t_k = 0.04*pi*k for k = 1..N.
ModelInstance build_spline(int N = 100);

/// Same dynamics on N steps spanning (0, 2*pi], with a sudden trend break at
/// t = pi: the velocity truth steps by jump_size there, so the position ramps
/// away from the sinusoid. jump_size < 0 selects the default of 4 (roughly
/// seven per-step velocity noise standard deviations); 0 gives the plain
/// sinusoid. two_sensor installs two direct position sensors; sensor 1
/// reports only every 10th step (zero precision elsewhere) while sensor 2
/// reports always.
ModelInstance build_jump(int N = 20, double jump_size = -1.0, bool two_sensor = false);

/// Van der Pol oscillator discretized by the Euler map; truth is simulated
/// per run by driving the map with Gaussian process noise of variance q_var.
struct VdpModel {
    ProblemSpec spec;
    Vector x0;
    double mu = 2.0;
    double dt = 16.0 / 164.0;
    double q_var = 0.01;
    std::vector<double> times;

    StateSequence simulate_truth(Rng& rng) const;
};
VdpModel build_vdp(int N = 164, double mu = 2.0, double dt = 16.0 / 164.0, double q_var = 0.01);

/// (1/N) sum_k ||truth_k - estimate_k||^2 over all state components.
double mse(const StateSequence& truth, const StateSequence& estimate);

/// Empirical quantile by linear interpolation of order statistics.
double quantile(std::vector<double> values, double q);

enum class ExperimentName { Spline, VanDerPol, Jump, JumpTwoSensor };
ExperimentName experiment_from_name(const std::string& name);
const char* experiment_name(ExperimentName name);

struct SmootherChoice {
    PresetKind kind = PresetKind::L2;
    NoisePartition custom;  ///< used when kind == Custom
    std::string label;      ///< defaults to the preset name

    std::string display_label() const { return label.empty() ? preset_name(kind) : label; }
    NoisePartition resolve(int n, int m, double r, double s) const;
};

struct ExperimentSpec {
    ExperimentName name = ExperimentName::Spline;
    int runs = 200;
    std::uint64_t seed = 1;
    std::vector<SmootherChoice> smoothers;
    ContaminationScheme scheme;
    double r = 4.0;          ///< process dof handed to the presets
    double s = 4.0;          ///< measurement dof handed to the presets
    double jump_size = -1.0; ///< jump experiments; < 0 = default
    int N = 0;               ///< 0 = per-experiment default
    SmootherConfig solver;

    /// Optional per-estimate hook (trajectory dumps, plots).
    std::function<void(int run, const std::string& label, const std::vector<double>& times,
                       const StateSequence& truth, const StateSequence& estimate)>
        on_estimate;
};

/// Experiment spec with the conventional smoother set and noise scheme for
/// the named study.
ExperimentSpec default_experiment(ExperimentName name);

struct SmootherStats {
    std::string label;
    std::vector<double> mse_runs;  ///< per-run MSE, NaN where the run failed
    double median = 0.0;
    double q025 = 0.0;  ///< 2.5% quantile
    double q975 = 0.0;  ///< 97.5% quantile
    double mean_iterations = 0.0;
    int failures = 0;
    double max_delta = 0.0;  ///< largest recorded model decrease (QA: must stay <= 0)
    bool monotone = true;    ///< every objective trace non-increasing
};

struct RunStats {
    std::vector<SmootherStats> smoothers;
    int runs = 0;
    std::uint64_t seed = 0;
};

/// Monte Carlo sweep. Each run draws its own RNG substream from (seed, run),
/// simulates truth and measurements once, and hands the identical data to
/// every smoother starting from the null state sequence. Individual smoother
/// failures are counted, never fatal.
RunStats run_experiment(const ExperimentSpec& spec);

} // namespace tks

#endif
