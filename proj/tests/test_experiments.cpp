#include <doctest.h>

#include <cmath>
#include <numbers>

#include "tksmooth/experiments.hpp"
#include "test_util.hpp"

using namespace tks;

TEST_SUITE_BEGIN("experiments");

TEST_CASE("spline instance matches its construction") {
    const auto inst = build_spline(100);
    const double dt = 0.04 * std::numbers::pi;

    CHECK(inst.times.back() == doctest::Approx(4.0 * std::numbers::pi).epsilon(1e-12));
    for (int k = 0; k < 100; ++k)
        CHECK(inst.spec.measurement.h(k, inst.truth.at(k))(0) ==
              doctest::Approx(-std::sin(inst.times[k])).epsilon(1e-12));

    // Qinv must invert the displayed covariance (det Q = dt^4 / 12 > 0)
    Matrix q(2, 2);
    q << dt, dt * dt / 2.0, dt * dt / 2.0, dt * dt * dt / 3.0;
    CHECK(q.determinant() == doctest::Approx(std::pow(dt, 4) / 12.0).epsilon(1e-10));
    CHECK((inst.spec.precisions.Qinv[0] * q - Matrix::Identity(2, 2)).cwiseAbs().maxCoeff() <
          1e-10);
    CHECK(inst.spec.precisions.Rinv[0](0, 0) == doctest::Approx(4.0));
}

TEST_CASE("vdp defaults and the noiseless mu=0 orbit") {
    const auto model = build_vdp();
    CHECK(model.mu == 2.0);
    CHECK(model.spec.steps() == 164);
    CHECK(model.dt == doctest::Approx(16.0 / 164.0));
    CHECK(model.q_var == 0.01);
    CHECK(model.x0(0) == 0.0);
    CHECK(model.x0(1) == -0.5);

    // with mu = 0 and no noise the map is the Euler harmonic oscillator;
    // compare against a separate scripted integration
    const auto harmonic = build_vdp(50, 0.0, 0.1, 0.01);
    Vector state = harmonic.x0;
    for (int k = 0; k < 50; ++k) {
        const Vector prev = state;
        state(0) = prev(0) + 0.1 * prev(1);
        state(1) = prev(1) - 0.1 * prev(0);
        const Vector mapped = harmonic.spec.process.g(std::max(k, 1), prev);
        CHECK((mapped - state).cwiseAbs().maxCoeff() == 0.0);
    }

    const auto chk = jacobian_fd_check(
        [&model](const Vector& u) { return model.spec.process.g(1, u); },
        model.spec.process.g_jac(1, (Vector(2) << 0.7, -1.2).finished()),
        (Vector(2) << 0.7, -1.2).finished());
    CHECK(chk.max_err < 1e-5);
}

TEST_CASE("vdp truth simulation is seed-deterministic") {
    const auto model = build_vdp(30);
    Rng rng1 = Rng::substream(5, 0);
    Rng rng2 = Rng::substream(5, 0);
    const auto t1 = model.simulate_truth(rng1);
    const auto t2 = model.simulate_truth(rng2);
    CHECK(t1.stacked() == t2.stacked());

    Rng rng3 = Rng::substream(5, 1);
    const auto t3 = model.simulate_truth(rng3);
    CHECK(t1.stacked() != t3.stacked());
}

TEST_CASE("jump instance: truth, sensors and defaults") {
    const auto plain = build_jump(20, 0.0);
    for (int k = 0; k < 20; ++k)
        CHECK(plain.truth.at(k)(1) ==
              doctest::Approx(-std::sin(plain.times[k])).epsilon(1e-12));

    const auto jumped = build_jump(20);  // default trend break of 4
    int broken_steps = 0;
    for (int k = 0; k < 20; ++k) {
        const double t = jumped.times[k];
        const double velocity_offset = jumped.truth.at(k)(0) - plain.truth.at(k)(0);
        const double position_offset = jumped.truth.at(k)(1) - plain.truth.at(k)(1);
        if (velocity_offset != 0.0) {
            CHECK(velocity_offset == doctest::Approx(4.0).epsilon(1e-12));
            CHECK(position_offset ==
                  doctest::Approx(4.0 * (t - std::numbers::pi)).epsilon(1e-9));
            ++broken_steps;
        } else {
            CHECK(position_offset == 0.0);
        }
    }
    CHECK(broken_steps == 11);  // t = pi .. 2 pi inclusive on the 20-point grid
    CHECK(jumped.spec.precisions.Rinv[0](0, 0) == doctest::Approx(1.0 / 0.05));

    const auto two = build_jump(20, -1.0, true);
    CHECK(two.spec.meas_dim() == 2);
    int live = 0;
    for (int k = 0; k < 20; ++k) {
        const Matrix& rinv = two.spec.precisions.Rinv[k];
        CHECK(rinv(1, 1) == doctest::Approx(4.0));  // sensor 2 always on
        if (rinv(0, 0) != 0.0) ++live;
    }
    CHECK(live == 2);  // floor(N/10) sensor-1 readings
}

TEST_CASE("noise schemes have the right second moments") {
    Rng rng(500);
    auto sample_var = [&rng](const ContaminationScheme& scheme, int draws) {
        double sum = 0.0, sumsq = 0.0;
        for (int i = 0; i < draws; ++i) {
            const double v = sample_noise(scheme, rng);
            sum += v;
            sumsq += v * v;
        }
        const double mean = sum / draws;
        return sumsq / draws - mean * mean;
    };

    CHECK(std::abs(sample_var(ContaminationScheme::nominal(0.25), 1'000'000) - 0.25) < 0.002);

    const double mix_var = sample_var(ContaminationScheme::gauss_mix(0.1, 100.0), 1'000'000);
    CHECK(std::abs(mix_var - 10.225) / 10.225 < 0.02);

    const double unif_var =
        sample_var(ContaminationScheme::uniform_mix(0.5, -10.0, 10.0), 1'000'000);
    const double expected = 0.5 * 0.25 + 0.5 * (100.0 / 3.0);
    CHECK(std::abs(unif_var - expected) / expected < 0.02);
}

TEST_CASE("mse") {
    StateSequence truth(1, 2), est(1, 2);
    CHECK(mse(truth, est) == 0.0);
    est.at(0)(0) = 1.0;
    est.at(1)(0) = 1.0;
    CHECK(mse(truth, est) == doctest::Approx(1.0));

    // constant offset delta in every coordinate gives n * delta^2
    StateSequence t3(3, 7), e3(3, 7);
    for (int k = 0; k < 7; ++k) e3.at(k).array() += 0.25;
    CHECK(mse(t3, e3) == doctest::Approx(3 * 0.25 * 0.25));

    CHECK_THROWS_AS(mse(truth, e3), DimensionMismatch);
}

TEST_CASE("quantiles interpolate order statistics") {
    CHECK(quantile({5.0, 5.0, 5.0}, 0.5) == 5.0);
    CHECK(quantile({1.0, 2.0, 3.0, 4.0}, 0.5) == doctest::Approx(2.5));
    CHECK(quantile({4.0, 1.0, 3.0, 2.0}, 0.0) == 1.0);
    CHECK(quantile({4.0, 1.0, 3.0, 2.0}, 1.0) == 4.0);
    CHECK(quantile({1.0, 2.0, 3.0, 4.0, 5.0}, 0.25) == doctest::Approx(2.0));
}

TEST_CASE("single seeded run is deterministic and repeatable") {
    ExperimentSpec spec = default_experiment(ExperimentName::Spline);
    spec.runs = 1;
    spec.seed = 7;
    const auto a = run_experiment(spec);
    const auto b = run_experiment(spec);
    REQUIRE(a.smoothers.size() == b.smoothers.size());
    for (std::size_t i = 0; i < a.smoothers.size(); ++i)
        CHECK(a.smoothers[i].mse_runs[0] == b.smoothers[i].mse_runs[0]);
}

TEST_CASE("every smoother sees identical data within a run") {
    ExperimentSpec solo = default_experiment(ExperimentName::Spline);
    solo.runs = 3;
    solo.seed = 11;
    solo.smoothers = {{PresetKind::L2, {}, ""}};
    const auto only_l2 = run_experiment(solo);

    ExperimentSpec both = solo;
    both.smoothers = {{PresetKind::L2, {}, ""}, {PresetKind::TRobust, {}, ""}};
    const auto with_robust = run_experiment(both);

    for (int run = 0; run < 3; ++run)
        CHECK(only_l2.smoothers[0].mse_runs[run] == with_robust.smoothers[0].mse_runs[run]);
}

TEST_CASE("nominal spline study lands in the expected band") {
    ExperimentSpec spec = default_experiment(ExperimentName::Spline);
    spec.runs = 40;
    spec.seed = 3;
    const auto stats = run_experiment(spec);
    for (const auto& agg : stats.smoothers) {
        CHECK(agg.failures == 0);
        CHECK(agg.monotone);
        CHECK(agg.max_delta <= 0.0);
        CHECK(agg.median > 0.005);
        CHECK(agg.median < 0.2);
        CHECK(agg.q025 <= agg.median);
        CHECK(agg.median <= agg.q975);
    }
}

TEST_CASE("experiment names round-trip") {
    for (ExperimentName name : {ExperimentName::Spline, ExperimentName::VanDerPol,
                                ExperimentName::Jump, ExperimentName::JumpTwoSensor})
        CHECK(experiment_from_name(experiment_name(name)) == name);
    CHECK_THROWS(experiment_from_name("pendulum"));
}

TEST_SUITE_END();
