#include <doctest.h>

#include "tksmooth/experiments.hpp"
#include "tksmooth/presets.hpp"
#include "test_util.hpp"

using namespace tks;

TEST_SUITE_BEGIN("presets");

TEST_CASE("preset index sets") {
    const auto robust = make_preset(PresetKind::TRobust, 2, 1);
    CHECK(robust.proc_student.empty());
    CHECK(robust.meas_student == std::vector<int>{0});

    const auto trend = make_preset(PresetKind::TTrend, 2, 1);
    CHECK(trend.proc_student == std::vector<int>{0, 1});
    CHECK(trend.meas_student.empty());

    const auto both = make_preset(PresetKind::DoubleT, 3, 2);
    CHECK(both.proc_student == std::vector<int>{0, 1, 2});
    CHECK(both.meas_student == std::vector<int>{0, 1});

    const auto l2 = make_preset(PresetKind::L2, 2, 1);
    CHECK(l2.proc_student.empty());
    CHECK(l2.meas_student.empty());
}

TEST_CASE("L2 preset yields a pure quadratic objective") {
    Rng rng(101);
    ProblemSpec spec = build_spline(15).spec;
    spec.partition = make_preset(PresetKind::L2, 2, 1);
    for (auto& z : spec.measurement.z) z(0) += rng.normal();

    // a quadratic's split has no Student part, and halving the residuals
    // quarters the value
    const auto x = tkstest::random_states(rng, 2, 15);
    const auto split = split_objective(spec, x);
    CHECK(split.f_value == 0.0);
}

TEST_CASE("invalid preset requests") {
    CHECK_THROWS_AS(make_preset(PresetKind::TRobust, 0, 1), InvalidPreset);
    CHECK_THROWS_AS(make_preset(PresetKind::TRobust, 2, 1, 4.0, 0.0), InvalidPreset);
    CHECK_THROWS_AS(make_preset(PresetKind::Custom, 2, 1), InvalidPreset);
    CHECK_THROWS_AS(make_custom({0, 5}, {}, 2, 1), InvalidPreset);
    CHECK_NOTHROW(make_preset(PresetKind::L2, 2, 1, 0.0, 0.0));  // dof unused
}

TEST_CASE("preset names round-trip") {
    for (PresetKind kind :
         {PresetKind::L2, PresetKind::TRobust, PresetKind::TTrend, PresetKind::DoubleT}) {
        CHECK(preset_from_name(preset_name(kind)) == kind);
    }
    CHECK_THROWS_AS(preset_from_name("huber"), InvalidPreset);
}

TEST_CASE("L2 preset reproduces the classical smoother on a random linear model") {
    Rng rng(103);
    const int n = 2, m = 1, N = 12;

    ProblemSpec spec;
    const Matrix g_mat = 0.6 * tkstest::random_matrix(rng, n, n);
    const Matrix h_mat = tkstest::random_matrix(rng, m, n);
    spec.process.n = n;
    spec.process.g0 = tkstest::random_vector(rng, n);
    spec.process.g = [g_mat](int, const Vector& x) { return (g_mat * x).eval(); };
    spec.process.g_jac = [g_mat](int, const Vector&) { return g_mat; };
    spec.measurement.m = m;
    spec.measurement.h = [h_mat](int, const Vector& x) { return (h_mat * x).eval(); };
    spec.measurement.h_jac = [h_mat](int, const Vector&) { return h_mat; };
    spec.measurement.z.resize(N);
    for (int k = 0; k < N; ++k) spec.measurement.z[k] = tkstest::random_vector(rng, m);
    const Matrix a = tkstest::random_matrix(rng, n, n);
    spec.precisions.Qinv.assign(N, a * a.transpose() + 0.5 * Matrix::Identity(n, n));
    spec.precisions.Rinv.assign(N, Matrix::Identity(m, m) * 2.0);
    spec.partition = make_preset(PresetKind::L2, n, m);

    const auto result = run_smoother(spec, StateSequence());
    CHECK(result.iterations() == 1);

    const Vector oracle = tkstest::dense_linear_smoother_oracle(spec);
    CHECK((result.x_hat.stacked() - oracle).norm() / oracle.norm() < 1e-8);
}

TEST_SUITE_END();
