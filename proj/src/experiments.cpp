#include "tksmooth/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

namespace tks {

namespace {

constexpr double kPi = std::numbers::pi;

/// Spline process block for step size dt: position integrates velocity.
Matrix spline_transition(double dt) {
    Matrix g(2, 2);
    g << 1.0, 0.0, dt, 1.0;
    return g;
}

/// Closed-form inverse of the integrated-white-noise covariance
/// [[dt, dt^2/2], [dt^2/2, dt^3/3]].
Matrix spline_qinv(double dt) {
    Matrix qinv(2, 2);
    qinv << 4.0 / dt, -6.0 / (dt * dt), -6.0 / (dt * dt), 12.0 / (dt * dt * dt);
    return qinv;
}

ProcessModel linear_process(const Matrix& g_mat, Vector g0) {
    ProcessModel process;
    process.n = static_cast<int>(g_mat.rows());
    process.g0 = std::move(g0);
    process.g = [g_mat](int, const Vector& x) { return (g_mat * x).eval(); };
    process.g_jac = [g_mat](int, const Vector&) { return g_mat; };
    return process;
}

MeasurementModel linear_measurement(const Matrix& h_mat, int N) {
    MeasurementModel meas;
    meas.m = static_cast<int>(h_mat.rows());
    meas.h = [h_mat](int, const Vector& x) { return (h_mat * x).eval(); };
    meas.h_jac = [h_mat](int, const Vector&) { return h_mat; };
    meas.z.assign(N, Vector::Zero(meas.m));
    return meas;
}

} // namespace

ContaminationScheme ContaminationScheme::nominal(double base_var) {
    ContaminationScheme s;
    s.kind = SchemeKind::Nominal;
    s.base_var = base_var;
    return s;
}

ContaminationScheme ContaminationScheme::gauss_mix(double p, double phi, double base_var) {
    ContaminationScheme s;
    s.kind = SchemeKind::GaussMix;
    s.base_var = base_var;
    s.p = p;
    s.phi = phi;
    return s;
}

ContaminationScheme ContaminationScheme::uniform_mix(double p, double a, double b, double base_var) {
    ContaminationScheme s;
    s.kind = SchemeKind::UniformMix;
    s.base_var = base_var;
    s.p = p;
    s.a = a;
    s.b = b;
    return s;
}

void ContaminationScheme::validate() const {
    if (!(base_var >= 0.0)) throw DimensionMismatch("scheme: base variance must be nonnegative");
    if (kind == SchemeKind::Nominal) return;
    if (!(p >= 0.0 && p <= 1.0)) throw DimensionMismatch("scheme: p must lie in [0, 1]");
    if (kind == SchemeKind::GaussMix && !(phi > 0.0))
        throw DimensionMismatch("scheme: contaminating variance must be positive");
    if (kind == SchemeKind::UniformMix && !(a < b))
        throw DimensionMismatch("scheme: uniform support needs a < b");
}

std::string ContaminationScheme::describe() const {
    switch (kind) {
        case SchemeKind::Nominal: return "nominal";
        case SchemeKind::GaussMix:
            return "gauss:" + std::to_string(p) + ":" + std::to_string(phi);
        case SchemeKind::UniformMix:
            return "uniform:" + std::to_string(p) + ":" + std::to_string(a) + ":" +
                   std::to_string(b);
    }
    return "unknown";
}

double sample_noise(const ContaminationScheme& scheme, Rng& rng) {
    switch (scheme.kind) {
        case SchemeKind::Nominal: return rng.normal(0.0, std::sqrt(scheme.base_var));
        case SchemeKind::GaussMix: {
            const bool contaminated = rng.uniform01() < scheme.p;
            return rng.normal(0.0, std::sqrt(contaminated ? scheme.phi : scheme.base_var));
        }
        case SchemeKind::UniformMix: {
            const bool contaminated = rng.uniform01() < scheme.p;
            if (contaminated) return rng.uniform(scheme.a, scheme.b);
            return rng.normal(0.0, std::sqrt(scheme.base_var));
        }
    }
    return 0.0;
}

ModelInstance build_spline(int N) {
    if (N < 2) throw DimensionMismatch("build_spline: N must be at least 2");
    const double dt = 0.04 * kPi;

    ModelInstance inst;
    const Matrix g_mat = spline_transition(dt);
    Matrix h_mat(1, 2);
    h_mat << 0.0, 1.0;

    Vector x_start(2);
    x_start << -1.0, 0.0;  // truth at t = 0
    inst.spec.process = linear_process(g_mat, g_mat * x_start);
    inst.spec.measurement = linear_measurement(h_mat, N);
    inst.spec.precisions.Qinv.assign(N, spline_qinv(dt));
    inst.spec.precisions.Rinv.assign(N, Matrix::Constant(1, 1, 1.0 / 0.25));
    inst.spec.partition = make_preset(PresetKind::L2, 2, 1);

    inst.truth = StateSequence(2, N);
    inst.times.resize(N);
    for (int k = 0; k < N; ++k) {
        const double t = dt * (k + 1);
        inst.times[k] = t;
        inst.truth.at(k) << -std::cos(t), -std::sin(t);
        inst.spec.measurement.z[k](0) = -std::sin(t);
    }
    return inst;
}

ModelInstance build_jump(int N, double jump_size, bool two_sensor) {
    if (N < 2) throw DimensionMismatch("build_jump: N must be at least 2");
    const double dt = 2.0 * kPi / N;
    const double meas_var = two_sensor ? 0.25 : 0.05;
    // The break enters through the velocity: from t = pi the first state
    // component steps by jump_size, so the position ramps away from the
    // sinusoid. The default step dwarfs the per-step velocity diffusion
    // (sqrt(dt) ~ 0.56), which is what makes the L2 smoother lag.
    if (jump_size < 0.0) jump_size = 4.0;

    ModelInstance inst;
    const Matrix g_mat = spline_transition(dt);
    Matrix h_mat(two_sensor ? 2 : 1, 2);
    if (two_sensor)
        h_mat << 0.0, 1.0, 0.0, 1.0;
    else
        h_mat << 0.0, 1.0;

    Vector x_start(2);
    x_start << -1.0, 0.0;
    inst.spec.process = linear_process(g_mat, g_mat * x_start);
    inst.spec.measurement = linear_measurement(h_mat, N);
    inst.spec.precisions.Qinv.assign(N, spline_qinv(dt));

    if (two_sensor) {
        // sensor 1 (row 0) is live every 10th step only; elsewhere its
        // precision row/column is zero, which disables the phantom reading
        Matrix rinv_active = Matrix::Zero(2, 2);
        rinv_active(0, 0) = 1.0 / meas_var;
        rinv_active(1, 1) = 1.0 / meas_var;
        Matrix rinv_idle = Matrix::Zero(2, 2);
        rinv_idle(1, 1) = 1.0 / meas_var;
        inst.spec.precisions.Rinv.resize(N);
        for (int k = 0; k < N; ++k)
            inst.spec.precisions.Rinv[k] = ((k + 1) % 10 == 0) ? rinv_active : rinv_idle;
    } else {
        inst.spec.precisions.Rinv.assign(N, Matrix::Constant(1, 1, 1.0 / meas_var));
    }
    inst.spec.partition = make_preset(PresetKind::L2, 2, static_cast<int>(h_mat.rows()));

    inst.truth = StateSequence(2, N);
    inst.times.resize(N);
    for (int k = 0; k < N; ++k) {
        const double t = dt * (k + 1);
        inst.times[k] = t;
        const bool broken = t >= kPi * (1.0 - 1e-12);
        inst.truth.at(k) << -std::cos(t) + (broken ? jump_size : 0.0),
            -std::sin(t) + (broken ? jump_size * (t - kPi) : 0.0);
        for (int j = 0; j < inst.spec.measurement.m; ++j)
            inst.spec.measurement.z[k](j) = inst.truth.at(k)(1);
    }
    return inst;
}

VdpModel build_vdp(int N, double mu, double dt, double q_var) {
    if (N < 2) throw DimensionMismatch("build_vdp: N must be at least 2");
    if (!(dt > 0.0) || !(q_var > 0.0))
        throw DimensionMismatch("build_vdp: dt and q_var must be positive");

    VdpModel model;
    model.mu = mu;
    model.dt = dt;
    model.q_var = q_var;
    model.x0 = Vector(2);
    model.x0 << 0.0, -0.5;

    ProcessModel process;
    process.n = 2;
    process.g = [mu, dt](int, const Vector& x) {
        Vector out(2);
        out(0) = x(0) + x(1) * dt;
        out(1) = x(1) + (mu * (1.0 - x(0) * x(0)) * x(1) - x(0)) * dt;
        return out;
    };
    process.g_jac = [mu, dt](int, const Vector& x) {
        Matrix jac(2, 2);
        jac << 1.0, dt, (-2.0 * mu * x(0) * x(1) - 1.0) * dt, 1.0 + mu * (1.0 - x(0) * x(0)) * dt;
        return jac;
    };
    process.g0 = process.g(1, model.x0);
    model.spec.process = std::move(process);

    Matrix h_mat(1, 2);
    h_mat << 1.0, 0.0;  // the first state component is observed
    model.spec.measurement = linear_measurement(h_mat, N);
    model.spec.precisions.Qinv.assign(N, Matrix::Identity(2, 2) / q_var);
    model.spec.precisions.Rinv.assign(N, Matrix::Identity(1, 1));
    model.spec.partition = make_preset(PresetKind::L2, 2, 1);

    model.times.resize(N);
    for (int k = 0; k < N; ++k) model.times[k] = dt * (k + 1);
    return model;
}

StateSequence VdpModel::simulate_truth(Rng& rng) const {
    const int N = spec.steps();
    const double sd = std::sqrt(q_var);
    StateSequence truth(2, N);
    Vector prev = x0;
    for (int k = 0; k < N; ++k) {
        Vector next = spec.process.g(k == 0 ? 1 : k, prev);
        next(0) += rng.normal(0.0, sd);
        next(1) += rng.normal(0.0, sd);
        truth.at(k) = next;
        prev = next;
    }
    return truth;
}

double mse(const StateSequence& truth, const StateSequence& estimate) {
    if (truth.state_dim() != estimate.state_dim() || truth.steps() != estimate.steps())
        throw DimensionMismatch("mse: sequences have different shapes");
    if (truth.steps() == 0) throw DimensionMismatch("mse: empty sequences");
    return (truth.stacked() - estimate.stacked()).squaredNorm() / truth.steps();
}

double quantile(std::vector<double> values, double q) {
    if (values.empty()) return std::numeric_limits<double>::quiet_NaN();
    std::sort(values.begin(), values.end());
    q = std::clamp(q, 0.0, 1.0);
    const double pos = q * (values.size() - 1);
    const auto lo = static_cast<std::size_t>(pos);
    if (lo + 1 >= values.size()) return values.back();
    const double frac = pos - static_cast<double>(lo);
    return values[lo] + frac * (values[lo + 1] - values[lo]);
}

ExperimentName experiment_from_name(const std::string& name) {
    if (name == "spline") return ExperimentName::Spline;
    if (name == "vdp") return ExperimentName::VanDerPol;
    if (name == "jump") return ExperimentName::Jump;
    if (name == "jump-two-sensor") return ExperimentName::JumpTwoSensor;
    throw std::invalid_argument("unknown experiment '" + name + "'");
}

const char* experiment_name(ExperimentName name) {
    switch (name) {
        case ExperimentName::Spline: return "spline";
        case ExperimentName::VanDerPol: return "vdp";
        case ExperimentName::Jump: return "jump";
        case ExperimentName::JumpTwoSensor: return "jump-two-sensor";
    }
    return "unknown";
}

NoisePartition SmootherChoice::resolve(int n, int m, double r, double s) const {
    if (kind == PresetKind::Custom) {
        NoisePartition part = custom;
        part.validate(n, m);
        return part;
    }
    return make_preset(kind, n, m, r, s);
}

ExperimentSpec default_experiment(ExperimentName name) {
    ExperimentSpec spec;
    spec.name = name;
    switch (name) {
        case ExperimentName::Spline:
            spec.scheme = ContaminationScheme::nominal(0.25);
            spec.smoothers = {{PresetKind::L2, {}, ""}, {PresetKind::TRobust, {}, ""}};
            break;
        case ExperimentName::VanDerPol:
            spec.scheme = ContaminationScheme::nominal(1.0);
            spec.smoothers = {{PresetKind::L2, {}, ""}, {PresetKind::TRobust, {}, ""}};
            break;
        case ExperimentName::Jump:
            spec.scheme = ContaminationScheme::nominal(0.05);
            spec.smoothers = {{PresetKind::L2, {}, ""}, {PresetKind::TTrend, {}, ""}};
            break;
        case ExperimentName::JumpTwoSensor: {
            spec.scheme = ContaminationScheme::gauss_mix(0.2, 100.0, 0.25);
            SmootherChoice custom;
            custom.kind = PresetKind::Custom;
            custom.custom = make_custom({0, 1}, {1}, 2, 2);  // trust sensor 1, suspect everything else
            spec.smoothers = {{PresetKind::L2, {}, ""},
                              {PresetKind::TRobust, {}, ""},
                              {PresetKind::DoubleT, {}, ""},
                              custom};
            break;
        }
    }
    return spec;
}

namespace {

struct RunData {
    StateSequence truth;
    std::vector<Vector> z;
};

RunData generate_run_data(const ExperimentSpec& spec, const ModelInstance* inst,
                          const VdpModel* vdp, Rng& rng) {
    RunData data;
    if (vdp != nullptr) {
        data.truth = vdp->simulate_truth(rng);
        const int N = vdp->spec.steps();
        data.z.resize(N);
        for (int k = 0; k < N; ++k) {
            data.z[k] = Vector(1);
            data.z[k](0) = data.truth.at(k)(0) + sample_noise(spec.scheme, rng);
        }
        return data;
    }

    data.truth = inst->truth;
    const int N = inst->spec.steps();
    const int m = inst->spec.meas_dim();
    data.z.resize(N);
    for (int k = 0; k < N; ++k) {
        data.z[k] = Vector::Zero(m);
        if (spec.name == ExperimentName::JumpTwoSensor) {
            // sensor 2 (row 1) reports every step through the contaminated
            // channel; sensor 1 (row 0) reports clean nominal noise on its
            // sparse schedule and stays at the disabled placeholder elsewhere
            data.z[k](1) = data.truth.at(k)(1) + sample_noise(spec.scheme, rng);
            if ((k + 1) % 10 == 0)
                data.z[k](0) =
                    data.truth.at(k)(1) + rng.normal(0.0, std::sqrt(spec.scheme.base_var));
        } else {
            data.z[k](0) = data.truth.at(k)(1) + sample_noise(spec.scheme, rng);
        }
    }
    return data;
}

} // namespace

RunStats run_experiment(const ExperimentSpec& spec) {
    if (spec.runs < 1) throw DimensionMismatch("run_experiment: need at least one run");
    if (spec.smoothers.empty()) throw DimensionMismatch("run_experiment: no smoothers requested");
    spec.scheme.validate();

    ModelInstance inst;
    VdpModel vdp;
    const bool is_vdp = spec.name == ExperimentName::VanDerPol;
    switch (spec.name) {
        case ExperimentName::Spline: inst = build_spline(spec.N > 0 ? spec.N : 100); break;
        case ExperimentName::Jump: inst = build_jump(spec.N > 0 ? spec.N : 20, spec.jump_size); break;
        case ExperimentName::JumpTwoSensor:
            inst = build_jump(spec.N > 0 ? spec.N : 20, spec.jump_size, true);
            break;
        case ExperimentName::VanDerPol: vdp = build_vdp(spec.N > 0 ? spec.N : 164); break;
    }
    ProblemSpec& base = is_vdp ? vdp.spec : inst.spec;
    const std::vector<double>& times = is_vdp ? vdp.times : inst.times;
    const int n = base.state_dim();
    const int m = base.meas_dim();

    RunStats stats;
    stats.runs = spec.runs;
    stats.seed = spec.seed;
    stats.smoothers.resize(spec.smoothers.size());
    for (std::size_t i = 0; i < spec.smoothers.size(); ++i) {
        stats.smoothers[i].label = spec.smoothers[i].display_label();
        stats.smoothers[i].mse_runs.assign(spec.runs, std::numeric_limits<double>::quiet_NaN());
        stats.smoothers[i].max_delta = -std::numeric_limits<double>::infinity();
    }

    std::vector<long long> iteration_totals(spec.smoothers.size(), 0);

    for (int run = 0; run < spec.runs; ++run) {
        Rng rng = Rng::substream(spec.seed, static_cast<std::uint64_t>(run));
        const RunData data = generate_run_data(spec, &inst, is_vdp ? &vdp : nullptr, rng);

        for (std::size_t i = 0; i < spec.smoothers.size(); ++i) {
            ProblemSpec problem = base;
            problem.partition = spec.smoothers[i].resolve(n, m, spec.r, spec.s);
            problem.measurement.z = data.z;

            SmootherStats& agg = stats.smoothers[i];
            try {
                const SmootherResult result =
                    run_smoother(problem, StateSequence(), spec.solver);
                agg.mse_runs[run] = mse(data.truth, result.x_hat);
                iteration_totals[i] += result.iterations();
                for (std::size_t t = 0; t < result.trace.size(); ++t) {
                    agg.max_delta = std::max(agg.max_delta, result.trace[t].delta);
                    if (t > 0 && result.trace[t].objective > result.trace[t - 1].objective)
                        agg.monotone = false;
                }
                if (spec.on_estimate)
                    spec.on_estimate(run, agg.label, times, data.truth, result.x_hat);
            } catch (const SmootherAbort&) {
                ++agg.failures;
            }
        }
    }

    for (std::size_t i = 0; i < stats.smoothers.size(); ++i) {
        SmootherStats& agg = stats.smoothers[i];
        std::vector<double> ok;
        ok.reserve(agg.mse_runs.size());
        for (double v : agg.mse_runs)
            if (std::isfinite(v)) ok.push_back(v);
        agg.median = quantile(ok, 0.5);
        agg.q025 = quantile(ok, 0.025);
        agg.q975 = quantile(ok, 0.975);
        const int successes = static_cast<int>(ok.size());
        agg.mean_iterations =
            successes > 0 ? static_cast<double>(iteration_totals[i]) / successes : 0.0;
    }
    return stats;
}

} // namespace tks
