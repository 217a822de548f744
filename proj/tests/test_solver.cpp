#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <random>
#include <sstream>

#include "frontlab/nonlinearity.hpp"
#include "frontlab/solver.hpp"

using namespace frontlab;

namespace {

Field constant_field(double value, std::size_t n = 50) {
    Field f;
    f.grid = Grid{GeometryMode::line, 0.0, 0.01, n, 0.0, 1};
    f.values.assign(n, value);
    return f;
}

// Max error of one run of the travelling-wave oracle at dx = eps/rule.
double wave_oracle_error(const WaveProfile& p, double eps, double rule, double tau) {
    const double dx = eps / rule;
    const double x0 = 0.4;
    Field f;
    // Far enough from both ends that the Neumann walls see a flat profile.
    f.grid = Grid{GeometryMode::line, -0.6, dx, static_cast<std::size_t>(std::llround(2.2 / dx)) + 1, 0.0, 1};
    f.values.resize(f.grid.nx);
    for (std::size_t i = 0; i < f.grid.nx; ++i) f.values[i] = p.eval((f.grid.node(i).x - x0) / eps).u;
    SimConfig cfg;
    cfg.epsilon = eps;
    cfg.dx_rule = rule;
    Solver solver(cfg);
    advance_to(solver, f, tau, cfg.dt());
    double worst = 0.0;
    for (std::size_t i = 0; i < f.grid.nx; ++i) {
        const double exact = p.eval((f.grid.node(i).x - x0 - p.speed() * tau) / eps).u;
        worst = std::max(worst, std::abs(f.values[i] - exact));
    }
    return worst;
}

SimConfig small_line(double eps = 0.05) {
    SimConfig c;
    c.epsilon = eps;
    c.lambda = 0.5;
    c.horizon = 0.2;
    return c;
}

} // namespace

TEST(SimConfig, DerivedQuantities) {
    SimConfig c;
    c.epsilon = 0.01;
    c.lambda = 0.5;
    EXPECT_DOUBLE_EQ(c.speed(), 2.5);
    EXPECT_NEAR(c.eta(), 0.350781, 1e-6);
    EXPECT_DOUBLE_EQ(c.dx(), 0.0005);
    EXPECT_NEAR(c.epsilon * c.dt() / (c.dx() * c.dx()), 0.2, 1e-14);
    EXPECT_DOUBLE_EQ(c.xi_bound(), 4.0);
}

TEST(InitialData, Examples) {
    SimConfig c;
    c.epsilon = 0.01;
    c.lambda = 0.5;
    c.m = 1.0;
    EXPECT_DOUBLE_EQ(initial_value(c, {1.0, 0.0}), 1.0);
    EXPECT_NEAR(initial_value(c, {0.0, 0.0}), 1.0 + std::exp(-0.5 / 0.01), 1e-15);
    const double far = 1.0 + 10.0 * c.epsilon / c.lambda;
    EXPECT_NEAR(initial_value(c, {far, 0.0}), std::exp(-10.0), 1e-15);
    EXPECT_NEAR(initial_value(c, {far, 0.0}), 4.54e-5, 1e-7);
    EXPECT_DOUBLE_EQ(bump_boundary_slope(c), 2.0);
}

TEST(InitialData, EnvelopeBoundsOnGrid) {
    SimConfig c = small_line();
    c.m = 0.5;
    c.M = 2.0;
    c.h_multiplier = 3.0;
    const Field f = initial_data(c);
    for (std::size_t k = 0; k < f.values.size(); ++k) {
        const Point x = f.grid.node_at(k);
        const double tail = std::exp(-c.lambda * std::abs(signed_distance(c.shape, x)) / c.epsilon);
        const double h = f.values[k] - bump(c, x);
        EXPECT_GE(h, c.m * tail * (1 - 1e-14));
        EXPECT_LE(h, c.M * tail * (1 + 1e-14));
    }
}

TEST(InitialData, DiskBumpIsQuadraticInRadius) {
    SimConfig c;
    c.epsilon = 0.05;
    c.shape = Disk{0.5};
    c.mode = GeometryMode::radial;
    c.g_amplitude = 2.0;
    EXPECT_NEAR(bump(c, {0.25, 0.0}), 2.0 * 0.75, 1e-15);
    EXPECT_DOUBLE_EQ(bump(c, {0.6, 0.0}), 0.0);
    EXPECT_DOUBLE_EQ(bump_boundary_slope(c), 8.0);
}

TEST(Validation, CollectsAllProblems) {
    SimConfig c;
    c.epsilon = 0.3;
    c.m = 3.0;
    c.M = 2.0;
    c.dt_rule = 0.5;
    const auto errs = validate_config(c);
    EXPECT_GE(errs.size(), 3u);
    EXPECT_THROW(require_valid(c), ValidationError);
    try {
        require_valid(c);
    } catch (const ValidationError& e) {
        EXPECT_EQ(e.problems().size(), errs.size());
        EXPECT_EQ(e.code(), ErrorCode::config_invalid);
    }
}

TEST(Validation, ModeShapeAndBox) {
    SimConfig c = small_line();
    c.mode = GeometryMode::radial;
    EXPECT_FALSE(validate_config(c).empty());
    c.mode = GeometryMode::line;
    c.box = Box{-0.5, 0.5};
    EXPECT_FALSE(validate_config(c).empty()); // box smaller than the offset region
    c.box = Box{0.0, 10.0};
    EXPECT_TRUE(validate_config(c).empty());
    c.box_margin = 5.0;
    EXPECT_FALSE(validate_config(c).empty());
}

TEST(Step, ConstantFields) {
    SimConfig cfg;
    cfg.epsilon = 0.05;
    for (double dt : {1e-4, 1e-3}) {
        const double kappa = cfg.epsilon * dt / (0.01 * 0.01);
        if (kappa > 0.25) continue;
        const Field half = step(constant_field(0.5), dt, cfg);
        const double e = std::exp(dt / cfg.epsilon);
        for (double v : half.values) EXPECT_NEAR(v, 0.5 * e / (1 + 0.5 * (e - 1)), 1e-15);
        for (double v : step(constant_field(0.0), dt, cfg).values) EXPECT_EQ(v, 0.0);
        for (double v : step(constant_field(1.0), dt, cfg).values) EXPECT_DOUBLE_EQ(v, 1.0);
    }
}

TEST(Step, StabilityRule) {
    SimConfig cfg;
    cfg.epsilon = 0.05;
    // kappa = 0.05 dt / 1e-4 > 0.25 for dt > 5e-4.
    EXPECT_THROW(step(constant_field(0.5), 6e-4, cfg), Error);
    try {
        step(constant_field(0.5), 6e-4, cfg);
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::stability);
    }
    EXPECT_NO_THROW(step(constant_field(0.5), 5e-4, cfg));
}

TEST(Step, TravellingWaveOracle) {
    const auto p = compute_profile(2.5);
    EXPECT_LT(wave_oracle_error(p, 0.01, 20, 0.1), 1e-3);
}

TEST(Step, SecondOrderConvergence) {
    const auto p = compute_profile(2.5);
    const double eps = 0.02, tau = 0.1;
    const double e1 = wave_oracle_error(p, eps, 10, tau);
    const double e2 = wave_oracle_error(p, eps, 20, tau);
    const double e3 = wave_oracle_error(p, eps, 40, tau);
    const double o1 = std::log2(e1 / e2), o2 = std::log2(e2 / e3);
    EXPECT_GE(o1, 1.8) << e1 << " " << e2;
    EXPECT_GE(o2, 1.8) << e2 << " " << e3;
}

TEST(Step, RadialMatchesPlane) {
    SimConfig radial;
    radial.epsilon = 0.05;
    radial.lambda = 0.5;
    radial.shape = Disk{0.5};
    radial.mode = GeometryMode::radial;
    radial.horizon = 0.06;
    radial.dx_rule = 10;
    radial.snapshot_times = {radial.horizon};
    SimConfig plane = radial;
    plane.mode = GeometryMode::plane;
    const auto a = simulate(radial), b = simulate(plane);
    const Field& fr = a.snapshots.back();
    const Field& fp = b.snapshots.back();
    ASSERT_EQ(fr.grid.nx, fp.grid.nx);
    double worst = 0.0;
    for (std::size_t i = 0; i < fr.grid.nx; ++i) worst = std::max(worst, std::abs(fr.values[i] - fp.values[i]));
    EXPECT_LT(worst, 0.02);
}

TEST(Simulate, ZeroHorizonSnapshot) {
    SimConfig c = small_line();
    c.horizon = 0.0;
    const auto traj = simulate(c);
    ASSERT_EQ(traj.snapshots.size(), 1u);
    const Field init = initial_data(c);
    EXPECT_EQ(traj.snapshots[0].values, init.values);
    EXPECT_EQ(traj.snapshots[0].time, 0.0);
}

TEST(Simulate, DeterministicAndScheduled) {
    SimConfig c = small_line();
    const auto a = simulate(c), b = simulate(c);
    ASSERT_EQ(a.snapshots.size(), snapshot_schedule(c).size());
    for (std::size_t s = 0; s < a.snapshots.size(); ++s) {
        EXPECT_EQ(a.snapshots[s].values, b.snapshots[s].values);
        EXPECT_DOUBLE_EQ(a.snapshots[s].time, snapshot_schedule(c)[s]);
    }
}

TEST(Simulate, BoundedAfterGeneration) {
    SimConfig c;
    c.epsilon = 0.01;
    c.lambda = 0.5;
    c.horizon = 0.3;
    const double list[] = {c.epsilon};
    const double alpha = calibrate_generation(list, c.xi_bound()).alpha;
    const double t_eps = alpha * c.layer_scale();
    const auto traj = simulate(c);
    for (const Field& f : traj.snapshots) {
        EXPECT_GE(f.min(), 0.0);
        if (f.time >= t_eps) {
            EXPECT_LE(f.max(), 1.0 + c.epsilon) << "t=" << f.time;
        }
    }
}

TEST(Simulate, ComparisonPrinciple) {
    SimConfig lo = small_line();
    lo.box = Box{0.0, 3.0};
    SimConfig hi = lo;
    hi.h_multiplier = 1.8;
    hi.g_amplitude = 1.3;
    const auto a = simulate(lo), b = simulate(hi);
    ASSERT_EQ(a.snapshots.size(), b.snapshots.size());
    for (std::size_t s = 0; s < a.snapshots.size(); ++s)
        for (std::size_t k = 0; k < a.snapshots[s].values.size(); ++k)
            ASSERT_LE(a.snapshots[s].values[k], b.snapshots[s].values[k]) << "snap " << s << " node " << k;
}

TEST(Simulate, MemoryGuard) {
    SimConfig c = small_line();
    EXPECT_THROW(simulate(c, 1e3), Error);
}

TEST(Snapshots, FileRoundTrip) {
    SimConfig c = small_line();
    c.snapshot_times = {0.0, 0.1};
    const auto traj = simulate(c);
    const auto dir = std::filesystem::temp_directory_path() / "frontlab_snap_test";
    std::filesystem::remove_all(dir);
    write_trajectory(traj, dir);
    EXPECT_TRUE(std::filesystem::exists(dir / "snap_t0.100000.csv"));
    const auto back = read_trajectory(c, dir);
    ASSERT_EQ(back.snapshots.size(), 2u);
    for (std::size_t k = 0; k < traj.snapshots[1].values.size(); ++k)
        EXPECT_NEAR(back.snapshots[1].values[k], traj.snapshots[1].values[k],
                    1e-11 * std::max(1.0, traj.snapshots[1].values[k]));
    std::filesystem::remove_all(dir);
    EXPECT_THROW(read_trajectory(c, dir), Error);
}

TEST(Snapshots, DefaultScheduleResolvesGenerationWindow) {
    SimConfig c;
    c.epsilon = 0.01;
    const auto ts = default_snapshot_times(c);
    EXPECT_EQ(ts.front(), 0.0);
    EXPECT_DOUBLE_EQ(ts.back(), c.horizon);
    for (std::size_t i = 1; i < ts.size(); ++i) {
        EXPECT_GT(ts[i], ts[i - 1]);
        if (ts[i] <= 10 * c.layer_scale()) {
            EXPECT_LE(ts[i] - ts[i - 1], 0.1 * c.layer_scale() * (1 + 1e-9));
        }
    }
}
