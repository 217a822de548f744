#pragma once

// Measurements on simulated trajectories: level sets, front speed, layer
// thickness, generation time, the three-region classification and
// parameter sweeps.

#include <atomic>
#include <cmath>
#include <functional>
#include <iomanip>
#include <limits>
#include <mutex>
#include <optional>
#include <ostream>
#include <string>
#include <thread>
#include <vector>

#include "frontlab/bounds.hpp"
#include "frontlab/error.hpp"
#include "frontlab/geometry.hpp"
#include "frontlab/nonlinearity.hpp"
#include "frontlab/solver.hpp"
#include "frontlab/waves.hpp"

namespace frontlab {

/// Direction of the scan in plane mode, in degrees from the positive x-axis.
struct Ray {
    double angle_deg = 0.0;
};

namespace detail {

/// Values along the scan direction from the origin outward, with their
/// abscissas. Line and radial fields are already one-dimensional.
inline std::pair<std::vector<double>, std::vector<double>> scan_profile(const Field& f, Ray ray) {
    const Grid& g = f.grid;
    std::vector<double> s, u;
    if (g.mode != GeometryMode::plane) {
        for (std::size_t i = 0; i < g.nx; ++i) {
            s.push_back(g.node(i).x);
            u.push_back(f.values[i]);
        }
        return {s, u};
    }
    const double th = ray.angle_deg * M_PI / 180.0;
    const double ex = std::cos(th), ey = std::sin(th);
    auto sample = [&](double x, double y) -> std::optional<double> {
        const double px = (x - g.x0) / g.dx, py = (y - g.y0) / g.dx;
        if (px < -1e-9 || py < -1e-9 || px > g.nx - 1 + 1e-9 || py > g.ny - 1 + 1e-9) return std::nullopt;
        auto i = static_cast<std::size_t>(std::clamp(std::floor(px), 0.0, double(g.nx - 2)));
        auto j = static_cast<std::size_t>(std::clamp(std::floor(py), 0.0, double(g.ny - 2)));
        const double a = std::clamp(px - i, 0.0, 1.0), b = std::clamp(py - j, 0.0, 1.0);
        const double* v = f.values.data();
        return (1 - a) * (1 - b) * v[g.index(i, j)] + a * (1 - b) * v[g.index(i + 1, j)] +
               (1 - a) * b * v[g.index(i, j + 1)] + a * b * v[g.index(i + 1, j + 1)];
    };
    for (std::size_t k = 0;; ++k) {
        const double r = g.dx * static_cast<double>(k);
        const auto val = sample(r * ex, r * ey);
        if (!val) break;
        s.push_back(r);
        u.push_back(*val);
    }
    return {s, u};
}

} // namespace detail

/// Outermost crossing of `level` along the scan, by linear interpolation
/// between the bracketing nodes.
inline double extract_level(const Field& f, double level, Ray ray = {}) {
    if (!(level > 0.0 && level < 1.0)) fail(ErrorCode::domain, "extract_level: level must lie in (0,1)");
    const auto [s, u] = detail::scan_profile(f, ray);
    for (std::size_t i = u.size(); i-- > 1;) {
        const double inner = u[i - 1], outer = u[i];
        if (inner >= level && outer < level) {
            const double t = (inner - level) / (inner - outer);
            return s[i - 1] + t * (s[i] - s[i - 1]);
        }
    }
    fail(ErrorCode::no_crossing, "front not yet generated: level " + std::to_string(level) +
                                     " not crossed at t=" + std::to_string(f.time));
}

struct FrontTrack {
    double level = 0.5;
    std::vector<std::pair<double, double>> entries; // (t, position)
};

/// Level positions at every snapshot where the level is crossed.
inline FrontTrack track_front(const Trajectory& traj, double level, Ray ray = {}) {
    FrontTrack tr{level, {}};
    for (const Field& f : traj.snapshots) {
        try {
            const double x = extract_level(f, level, ray);
            if (tr.entries.empty() || f.time > tr.entries.back().first) tr.entries.emplace_back(f.time, x);
        } catch (const Error& e) {
            if (e.code() != ErrorCode::no_crossing) throw;
        }
    }
    return tr;
}

struct SpeedFit {
    double speed;
    double stderr_;
    std::size_t points;
};

/// Least-squares slope of position against time on [t_lo, t_hi].
inline SpeedFit front_speed(const FrontTrack& track, std::pair<double, double> window) {
    std::vector<std::pair<double, double>> pts;
    for (const auto& e : track.entries)
        if (e.first >= window.first - 1e-12 && e.first <= window.second + 1e-12) pts.push_back(e);
    const std::size_t n = pts.size();
    if (n < 5) fail(ErrorCode::insufficient_data, "front_speed: fewer than 5 entries in the window");
    double tm = 0, xm = 0;
    for (const auto& [t, x] : pts) {
        tm += t;
        xm += x;
    }
    tm /= n;
    xm /= n;
    double stt = 0, stx = 0;
    for (const auto& [t, x] : pts) {
        stt += (t - tm) * (t - tm);
        stx += (t - tm) * (x - xm);
    }
    if (!(stt > 0.0)) fail(ErrorCode::insufficient_data, "front_speed: window has no time spread");
    const double slope = stx / stt;
    double sse = 0;
    for (const auto& [t, x] : pts) {
        const double r = x - xm - slope * (t - tm);
        sse += r * r;
    }
    const double se = std::sqrt(sse / static_cast<double>(n - 2) / stt);
    return {slope, se, n};
}

inline double layer_thickness(const Field& f, double low, double high, Ray ray = {}) {
    if (!(low > 0.0 && low <= high && high < 1.0))
        fail(ErrorCode::domain, "layer_thickness: need 0 < low <= high < 1");
    return std::abs(extract_level(f, low, ray) - extract_level(f, high, ray));
}

/// First snapshot time at which u >= 1 - eps on {d0 <= -k eps|ln eps|}.
inline double generation_time(const Trajectory& traj, double k) {
    const SimConfig& c = traj.config;
    const double l = c.layer_scale();
    const double eps = c.epsilon;
    if (traj.snapshots.empty()) fail(ErrorCode::insufficient_data, "generation_time: empty trajectory");
    for (std::size_t i = 1; i < traj.snapshots.size(); ++i) {
        const double t0 = traj.snapshots[i - 1].time, t1 = traj.snapshots[i].time;
        if (t1 > 10.0 * l * (1.0 + 1e-9)) break;
        if (t1 - t0 > 0.1 * l * (1.0 + 1e-9))
            fail(ErrorCode::insufficient_data, "generation_time: snapshots too sparse in the early window");
    }
    const Grid& g = traj.snapshots.front().grid;
    std::vector<std::size_t> region;
    for (std::size_t n = 0; n < g.size(); ++n)
        if (signed_distance(c.shape, g.node_at(n)) <= -k * l) region.push_back(n);
    if (region.empty()) fail(ErrorCode::insufficient_data, "generation_time: the region d0 <= -k eps|ln eps| is empty");
    for (const Field& f : traj.snapshots) {
        if (f.time > 10.0 * l + 1e-12) break;
        double mn = std::numeric_limits<double>::infinity();
        for (std::size_t n : region) mn = std::min(mn, f.values[n]);
        if (mn >= 1.0 - eps) return f.time;
    }
    fail(ErrorCode::not_reached, "generation_time: 1-eps not reached within 10 eps|ln eps|");
}

// ---------------------------------------------------------------------------
// Three-region classification

struct RegionVerdict {
    double time;
    Region region;
    std::size_t nodes = 0;
    std::size_t violations = 0;
    double worst_excess = 0.0; // largest distance outside the band, 0 when none
};

struct Classification {
    double radius = 0.0;
    double tol = 0.0;
    std::vector<RegionVerdict> rows;

    std::size_t violations() const {
        std::size_t v = 0;
        for (const auto& r : rows) v += r.violations;
        return v;
    }
    std::size_t nodes(Region reg) const {
        std::size_t n = 0;
        for (const auto& r : rows)
            if (r.region == reg) n += r.nodes;
        return n;
    }
};

/// Checks, for t >= t_eps, u in [1-2eps, 1+eps] far inside, u in [0, eps]
/// far outside and u in [0, 1+eps] in the tube of radius C eps|ln eps|,
/// each band widened by tol = 10 dx^2.
inline Classification classify_run(const Trajectory& traj, double C_const, double t_eps) {
    const SimConfig& c = traj.config;
    const double eps = c.epsilon;
    Classification out;
    out.radius = C_const * c.layer_scale();
    out.tol = 10.0 * c.dx() * c.dx();
    const LimitInterface iface{c.shape, c.speed()};
    for (const Field& f : traj.snapshots) {
        if (f.time < t_eps - 1e-12) continue;
        RegionVerdict rows[3] = {{f.time, Region::near_interface}, {f.time, Region::inside_far},
                                 {f.time, Region::outside_far}};
        for (std::size_t n = 0; n < f.values.size(); ++n) {
            const Region reg = classify_region(iface, f.time, f.grid.node_at(n), out.radius);
            double lo = 0.0, hi = 1.0 + eps;
            if (reg == Region::inside_far) lo = 1.0 - 2.0 * eps;
            if (reg == Region::outside_far) hi = eps;
            const double u = f.values[n];
            const double excess = std::max(lo - out.tol - u, u - hi - out.tol);
            RegionVerdict& row = rows[static_cast<int>(reg)];
            ++row.nodes;
            if (excess > 0.0) {
                ++row.violations;
                row.worst_excess = std::max(row.worst_excess, excess);
            }
        }
        for (auto& r : rows) out.rows.push_back(r);
    }
    return out;
}

inline void write_classification_csv(std::ostream& out, const Classification& c) {
    out << std::setprecision(12) << "snapshot_time,region,nodes,violations,worst_excess\n";
    for (const auto& r : c.rows)
        out << r.time << ',' << to_string(r.region) << ',' << r.nodes << ',' << r.violations << ','
            << r.worst_excess << '\n';
}

// ---------------------------------------------------------------------------
// Scaling sweeps

struct MeasureOptions {
    double speed_level = 0.5;
    std::pair<double, double> thickness_levels{0.1, 0.9};
    std::pair<double, double> speed_window_fraction{0.3, 1.0};
    std::optional<double> generation_k; // defaults to 6/delta
    std::optional<double> alpha;        // for the transient cut 2 t_eps of the speed window
    Ray ray{};
};

/// Speed window: [max(lo T, 2 alpha eps|ln eps|), hi T].
inline std::pair<double, double> speed_window(const SimConfig& c, const MeasureOptions& opt) {
    double lo = opt.speed_window_fraction.first * c.horizon;
    if (opt.alpha) lo = std::max(lo, 2.0 * *opt.alpha * c.layer_scale());
    return {lo, opt.speed_window_fraction.second * c.horizon};
}

struct ScalingRow {
    double epsilon = 0, lambda = 0;
    double fitted_speed = std::numeric_limits<double>::quiet_NaN();
    double speed_stderr = std::numeric_limits<double>::quiet_NaN();
    double speed_error_vs_c_lambda = std::numeric_limits<double>::quiet_NaN();
    double thickness_at_T = std::numeric_limits<double>::quiet_NaN();
    double thickness_ratio = std::numeric_limits<double>::quiet_NaN();
    double generation_time = std::numeric_limits<double>::quiet_NaN();
    double generation_ratio = std::numeric_limits<double>::quiet_NaN();
    std::string status = "ok";
};

struct ScalingReport {
    std::vector<ScalingRow> rows;
};

inline ScalingRow measure(const Trajectory& traj, const MeasureOptions& opt = {}) {
    const SimConfig& c = traj.config;
    ScalingRow row;
    row.epsilon = c.epsilon;
    row.lambda = c.lambda;
    std::vector<std::string> problems;
    try {
        const auto fit = front_speed(track_front(traj, opt.speed_level, opt.ray), speed_window(c, opt));
        row.fitted_speed = fit.speed;
        row.speed_stderr = fit.stderr_;
        row.speed_error_vs_c_lambda = std::abs(fit.speed - c.speed());
    } catch (const Error& e) {
        problems.push_back(std::string("speed: ") + e.what());
    }
    try {
        row.thickness_at_T = layer_thickness(traj.snapshots.back(), opt.thickness_levels.first,
                                             opt.thickness_levels.second, opt.ray);
        row.thickness_ratio = row.thickness_at_T / c.layer_scale();
    } catch (const Error& e) {
        problems.push_back(std::string("thickness: ") + e.what());
    }
    try {
        const double k = opt.generation_k.value_or(6.0 / bump_boundary_slope(c));
        row.generation_time = generation_time(traj, k);
        row.generation_ratio = row.generation_time / c.layer_scale();
    } catch (const Error& e) {
        problems.push_back(std::string("generation: ") + e.what());
    }
    if (!problems.empty()) {
        row.status.clear();
        for (const auto& p : problems) row.status += (row.status.empty() ? "" : "; ") + p;
    }
    return row;
}

/// Runs every configuration (up to `jobs` at once) and measures it. A
/// failing row records its reason and leaves the others untouched.
inline ScalingReport sweep(const std::vector<SimConfig>& configs, const MeasureOptions& opt,
                           unsigned jobs = 1,
                           const std::function<void(const Trajectory&, std::size_t)>& on_done = {}) {
    ScalingReport rep;
    rep.rows.resize(configs.size());
    std::atomic<std::size_t> next{0};
    std::mutex cb_mutex;
    auto worker = [&] {
        for (std::size_t i = next++; i < configs.size(); i = next++) {
            ScalingRow& row = rep.rows[i];
            try {
                const Trajectory traj = simulate(configs[i]);
                row = measure(traj, opt);
                if (on_done) {
                    std::lock_guard<std::mutex> lock(cb_mutex);
                    on_done(traj, i);
                }
            } catch (const std::exception& e) {
                row.epsilon = configs[i].epsilon;
                row.lambda = configs[i].lambda;
                row.status = std::string("failed: ") + e.what();
            }
        }
    };
    jobs = std::max(1u, std::min<unsigned>(jobs, static_cast<unsigned>(configs.size())));
    std::vector<std::thread> pool;
    for (unsigned j = 1; j < jobs; ++j) pool.emplace_back(worker);
    worker();
    for (auto& t : pool) t.join();
    return rep;
}

inline void write_scaling_csv(std::ostream& out, const ScalingReport& rep) {
    out << "epsilon,lambda,fitted_speed,speed_error_vs_c_lambda,thickness_at_T,thickness_ratio,"
           "generation_time,generation_ratio,status\n";
    out << std::setprecision(10);
    for (const auto& r : rep.rows) {
        std::string status = r.status;
        std::replace(status.begin(), status.end(), ',', ';');
        out << r.epsilon << ',' << r.lambda << ',' << r.fitted_speed << ',' << r.speed_error_vs_c_lambda << ','
            << r.thickness_at_T << ',' << r.thickness_ratio << ',' << r.generation_time << ','
            << r.generation_ratio << ',' << status << '\n';
    }
}

} // namespace frontlab
