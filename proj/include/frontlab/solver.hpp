#pragma once

// Direct integration of  u_t = eps Lap u + u(1-u)/eps  with initial data
// g + h where g = g0 (1 - rho^2)_+ and h = m e^{-lambda |dist(0,x)|/eps}.
//
// Strang splitting: half diffusion step (explicit, second-order stencil,
// zero flux), exact logistic flow for the full step, half diffusion step.
// Both substeps are monotone under eps dt / dx^2 <= 1/4, so the scheme
// preserves order and positivity.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "frontlab/error.hpp"
#include "frontlab/geometry.hpp"
#include "frontlab/waves.hpp"

namespace frontlab {

enum class GeometryMode { line, radial, plane };

inline std::string_view to_string(GeometryMode m) {
    switch (m) {
    case GeometryMode::line: return "line";
    case GeometryMode::radial: return "radial";
    case GeometryMode::plane: return "plane";
    }
    return "";
}

struct Box {
    double x_lo, x_hi;
    double y_lo = 0.0, y_hi = 0.0;
};

struct SimConfig {
    double epsilon = 0.01;
    double lambda = 0.5;
    double m = 1.0;
    double M = 2.0;
    ConvexShape shape = Interval{1.0};
    double g_amplitude = 1.0;
    double horizon = 1.0;
    GeometryMode mode = GeometryMode::line;
    std::optional<Box> box;       // derived from the margin rule when empty
    double dx_rule = 20.0;        // dx = eps / dx_rule
    double dt_rule = 0.2;         // dt = dt_rule dx^2 / eps
    double box_margin = 25.0;     // margin in units of max(eps/lambda, eps/eta)
    double h_multiplier = 1.0;    // h = h_multiplier * m e^{...}; must stay in [1, M/m]
    std::vector<double> snapshot_times; // default schedule when empty

    double speed() const { return selected_speed(lambda); }
    double eta() const { return decay_exponents(speed() > 2.0 ? speed() : 2.0 + 1e-12).eta; }
    double layer_scale() const { return epsilon * std::abs(std::log(epsilon)); }
    double dx() const { return epsilon / dx_rule; }
    double dt() const { return dt_rule * dx() * dx() / epsilon; }
    double g_sup() const { return g_amplitude; }
    /// Upper end of the semiflow working range, ||g|| + M + 1.
    double xi_bound() const { return g_amplitude + M + 1.0; }
    double margin() const {
        return box_margin * std::max(epsilon / std::min(lambda, 1.0), epsilon / eta());
    }
};

/// Canonical one-line description used for equality and manifests.
inline std::string describe(const SimConfig& c) {
    std::ostringstream os;
    os << std::setprecision(17) << "eps=" << c.epsilon << " lambda=" << c.lambda << " m=" << c.m
       << " M=" << c.M << " shape=" << shape_name(c.shape);
    std::visit(
        [&](const auto& s) {
            using S = std::decay_t<decltype(s)>;
            if constexpr (std::is_same_v<S, Interval>) os << "(" << s.half_length << ")";
            else if constexpr (std::is_same_v<S, Disk>) os << "(" << s.radius << ")";
            else
                for (const Point& p : s.vertices) os << "(" << p.x << "," << p.y << ")";
        },
        c.shape);
    os << " g0=" << c.g_amplitude << " T=" << c.horizon << " mode=" << to_string(c.mode);
    if (c.box) os << " box=" << c.box->x_lo << "," << c.box->x_hi << "," << c.box->y_lo << "," << c.box->y_hi;
    os << " dx_rule=" << c.dx_rule << " dt_rule=" << c.dt_rule << " margin=" << c.box_margin
       << " hmul=" << c.h_multiplier << " snaps=";
    for (double t : c.snapshot_times) os << t << ";";
    return os.str();
}

inline bool same_config(const SimConfig& a, const SimConfig& b) { return describe(a) == describe(b); }

// ---------------------------------------------------------------------------
// Initial data pieces

/// Normalised shape coordinate: 0 at the centre, 1 on the boundary.
inline double shape_coordinate(const ConvexShape& shape, Point x) {
    if (const auto* s = std::get_if<Interval>(&shape)) return std::abs(x.x) / s->half_length;
    if (const auto* s = std::get_if<Disk>(&shape)) return norm(x) / s->radius;
    // Gauge function about the origin.
    const auto& v = std::get<ConvexPolygon>(shape).vertices;
    double rho = 0.0;
    for (std::size_t i = 0; i < v.size(); ++i) {
        const Point a = v[i], b = v[(i + 1) % v.size()];
        const double len = std::hypot(b.x - a.x, b.y - a.y);
        const Point n{(b.y - a.y) / len, -(b.x - a.x) / len};
        const double support = a.x * n.x + a.y * n.y;
        rho = std::max(rho, (x.x * n.x + x.y * n.y) / support);
    }
    return rho;
}

/// Compactly supported part g = g0 (1 - rho^2)_+.
inline double bump(const SimConfig& c, Point x) {
    const double rho = shape_coordinate(c.shape, x);
    return rho >= 1.0 ? 0.0 : c.g_amplitude * (1.0 - rho * rho);
}

/// Minimal outward boundary slope |dg/dn| of the bump.
inline double bump_boundary_slope(const SimConfig& c) {
    if (const auto* s = std::get_if<Interval>(&c.shape)) return 2.0 * c.g_amplitude / s->half_length;
    if (const auto* s = std::get_if<Disk>(&c.shape)) return 2.0 * c.g_amplitude / s->radius;
    const auto& v = std::get<ConvexPolygon>(c.shape).vertices;
    double support_max = 0.0;
    for (std::size_t i = 0; i < v.size(); ++i) {
        const Point a = v[i], b = v[(i + 1) % v.size()];
        const double len = std::hypot(b.x - a.x, b.y - a.y);
        support_max = std::max(support_max, (a.x * (b.y - a.y) - a.y * (b.x - a.x)) / len);
    }
    return 2.0 * c.g_amplitude / support_max;
}

/// Sup of |grad g|^2 and of |Lap g| over the support.
inline std::pair<double, double> bump_derivative_bounds(const SimConfig& c) {
    const double g0 = c.g_amplitude;
    if (const auto* s = std::get_if<Interval>(&c.shape)) {
        const double L = s->half_length;
        return {4.0 * g0 * g0 / (L * L), 2.0 * g0 / (L * L)};
    }
    if (const auto* s = std::get_if<Disk>(&c.shape)) {
        const double R = s->radius;
        return {4.0 * g0 * g0 / (R * R), 4.0 * g0 / (R * R)};
    }
    // Piecewise quadratic in the gauge: rho = n_i.x / h_i on each cone.
    const auto& v = std::get<ConvexPolygon>(c.shape).vertices;
    double h_min = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < v.size(); ++i) {
        const Point a = v[i], b = v[(i + 1) % v.size()];
        const double len = std::hypot(b.x - a.x, b.y - a.y);
        h_min = std::min(h_min, (a.x * (b.y - a.y) - a.y * (b.x - a.x)) / len);
    }
    return {4.0 * g0 * g0 / (h_min * h_min), 2.0 * g0 / (h_min * h_min)};
}

inline double initial_value(const SimConfig& c, Point x) {
    const double d = signed_distance(c.shape, x);
    return bump(c, x) + c.h_multiplier * c.m * std::exp(-c.lambda * std::abs(d) / c.epsilon);
}

// ---------------------------------------------------------------------------
// Grid and fields

struct Grid {
    GeometryMode mode = GeometryMode::line;
    double x0 = 0.0, dx = 0.0;
    std::size_t nx = 0;
    double y0 = 0.0;
    std::size_t ny = 1;

    std::size_t size() const { return nx * ny; }
    std::size_t index(std::size_t i, std::size_t j) const { return j * nx + i; }
    Point node(std::size_t i, std::size_t j = 0) const {
        return {x0 + dx * static_cast<double>(i), mode == GeometryMode::plane ? y0 + dx * static_cast<double>(j) : 0.0};
    }
    Point node_at(std::size_t k) const { return node(k % nx, k / nx); }
    double x_end() const { return x0 + dx * static_cast<double>(nx - 1); }
    double y_end() const { return y0 + dx * static_cast<double>(ny - 1); }
};

struct Field {
    Grid grid;
    std::vector<double> values;
    double time = 0.0;

    double max() const { return *std::max_element(values.begin(), values.end()); }
    double min() const { return *std::min_element(values.begin(), values.end()); }
};

struct Trajectory {
    SimConfig config;
    std::vector<Field> snapshots;
};

/// Bounding box used for a configuration: the user box, or the c T offset of
/// the shape plus the tail margin. Symmetric shapes are reduced to the
/// non-negative quadrant; the cut planes become zero-flux symmetry planes.
inline Box resolved_box(const SimConfig& c) {
    if (c.box) return *c.box;
    const double reach = outer_extent(c.shape) + c.speed() * c.horizon + c.margin();
    switch (c.mode) {
    case GeometryMode::line:
    case GeometryMode::radial: return {0.0, reach, 0.0, 0.0};
    case GeometryMode::plane:
        if (std::holds_alternative<Disk>(c.shape)) return {0.0, reach, 0.0, reach};
        return {-reach, reach, -reach, reach};
    }
    return {0.0, reach};
}

inline std::vector<std::string> validate_config(const SimConfig& c) {
    std::vector<std::string> errs;
    if (!(c.epsilon > 0.0 && c.epsilon < 0.2)) errs.push_back("epsilon must lie in (0, 0.2)");
    if (!(c.lambda > 0.0)) errs.push_back("lambda must be positive");
    if (!(c.m > 0.0)) errs.push_back("m must be positive");
    if (!(c.m <= c.M)) errs.push_back("m must not exceed M (tail envelope requires 0 < m <= M)");
    if (!(c.g_amplitude > 0.0)) errs.push_back("g_amplitude must be positive");
    if (!(c.horizon >= 0.0)) errs.push_back("horizon must be non-negative");
    if (!(c.dx_rule > 0.0)) errs.push_back("dx_rule must be positive");
    if (!(c.dt_rule > 0.0 && c.dt_rule <= 0.25)) errs.push_back("dt_rule must lie in (0, 0.25]");
    if (!(c.box_margin >= 10.0)) errs.push_back("box_margin must be at least 10");
    if (!(c.h_multiplier >= 1.0 && c.h_multiplier * c.m <= c.M * (1.0 + 1e-12)))
        errs.push_back("h_multiplier must keep h between the m and M envelopes");
    try {
        validate_shape(c.shape);
    } catch (const Error& e) {
        errs.push_back(e.what());
    }
    const bool interval = std::holds_alternative<Interval>(c.shape);
    const bool disk = std::holds_alternative<Disk>(c.shape);
    if (c.mode == GeometryMode::line && !interval) errs.push_back("line mode requires an interval shape");
    if (c.mode == GeometryMode::radial && !disk) errs.push_back("radial mode requires a disk shape");
    if (c.mode == GeometryMode::plane && interval) errs.push_back("plane mode requires a disk or polygon");
    if (const auto* poly = std::get_if<ConvexPolygon>(&c.shape); poly && errs.empty()) {
        if (!(signed_distance(c.shape, {0.0, 0.0}) < 0.0))
            errs.push_back("polygon must contain the origin strictly");
    }
    for (std::size_t i = 0; i < c.snapshot_times.size(); ++i) {
        const double t = c.snapshot_times[i];
        if (!(t >= 0.0 && t <= c.horizon)) errs.push_back("snapshot times must lie in [0, T]");
        if (i > 0 && !(t > c.snapshot_times[i - 1])) errs.push_back("snapshot times must be strictly increasing");
    }
    if (!errs.empty()) return errs;

    // Margin rule: the box must contain the c T offset plus the tail margin.
    const Box b = resolved_box(c);
    const double need = outer_extent(c.shape) + c.speed() * c.horizon +
                        10.0 * std::max(c.epsilon / std::min(c.lambda, 1.0), c.epsilon / c.eta());
    auto side_ok = [&](double lo, double hi) {
        const bool sym = disk || interval;
        const bool lo_ok = lo <= -need || (sym && lo == 0.0);
        return lo_ok && hi >= need;
    };
    if (!side_ok(b.x_lo, b.x_hi)) errs.push_back("box does not contain the offset region plus margin");
    if (c.mode == GeometryMode::plane && !side_ok(b.y_lo, b.y_hi))
        errs.push_back("box does not contain the offset region plus margin in y");
    if (c.mode == GeometryMode::radial && b.x_lo != 0.0) errs.push_back("radial box must start at r=0");
    return errs;
}

inline void require_valid(const SimConfig& c) {
    auto errs = validate_config(c);
    if (!errs.empty()) throw ValidationError(std::move(errs));
}

inline Grid make_grid(const SimConfig& c) {
    const Box b = resolved_box(c);
    Grid g;
    g.mode = c.mode;
    g.dx = c.dx();
    g.x0 = b.x_lo;
    g.nx = static_cast<std::size_t>(std::ceil((b.x_hi - b.x_lo) / g.dx - 1e-9)) + 1;
    if (c.mode == GeometryMode::plane) {
        g.y0 = b.y_lo;
        g.ny = static_cast<std::size_t>(std::ceil((b.y_hi - b.y_lo) / g.dx - 1e-9)) + 1;
    }
    return g;
}

/// Default snapshot schedule: every 0.1 eps|ln eps| up to 10 eps|ln eps|
/// (generation window), then T/50 up to T.
inline std::vector<double> default_snapshot_times(const SimConfig& c) {
    std::vector<double> ts;
    const double T = c.horizon;
    const double early = 0.1 * c.layer_scale();
    for (int k = 0; k <= 100; ++k) {
        const double t = k * early;
        if (t > T) break;
        ts.push_back(t);
    }
    for (int k = 1; k <= 50; ++k) ts.push_back(T * k / 50.0);
    std::sort(ts.begin(), ts.end());
    std::vector<double> out;
    for (double t : ts)
        if (out.empty() || t - out.back() > 1e-12 * std::max(1.0, T)) out.push_back(t);
    if (T == 0.0) out = {0.0};
    return out;
}

inline std::vector<double> snapshot_schedule(const SimConfig& c) {
    return c.snapshot_times.empty() ? default_snapshot_times(c) : c.snapshot_times;
}

inline Field initial_data(const SimConfig& c) {
    require_valid(c);
    Field f;
    f.grid = make_grid(c);
    f.values.resize(f.grid.size());
    for (std::size_t k = 0; k < f.values.size(); ++k) f.values[k] = initial_value(c, f.grid.node_at(k));
    return f;
}

// ---------------------------------------------------------------------------
// Time stepping

class Solver {
public:
    explicit Solver(const SimConfig& config) : config_(config) {}

    /// One Strang step of size dt.
    void advance(Field& f, double dt) {
        const double eps = config_.epsilon;
        const double kappa = eps * dt / (f.grid.dx * f.grid.dx);
        if (kappa > 0.25 * (1.0 + 1e-12))
            fail(ErrorCode::stability, "step: eps*dt/dx^2 = " + std::to_string(kappa) + " exceeds 0.25");
        diffuse(f, 0.5 * kappa);
        react(f, dt / eps);
        diffuse(f, 0.5 * kappa);
        f.time += dt;
    }

private:
    static void react(Field& f, double rate_dt) {
        const double growth = std::exp(rate_dt);
        const double gm1 = std::expm1(rate_dt);
        for (double& u : f.values) u = u * growth / (1.0 + u * gm1);
    }

    void diffuse(Field& f, double k) {
        const Grid& g = f.grid;
        const std::size_t nx = g.nx;
        scratch_.resize(f.values.size());
        const double* u = f.values.data();
        double* out = scratch_.data();
        switch (g.mode) {
        case GeometryMode::line: {
            if (nx == 1) return;
            out[0] = u[0] + 2.0 * k * (u[1] - u[0]);
            for (std::size_t i = 1; i + 1 < nx; ++i) out[i] = u[i] + k * (u[i - 1] - 2.0 * u[i] + u[i + 1]);
            out[nx - 1] = u[nx - 1] + 2.0 * k * (u[nx - 2] - u[nx - 1]);
            break;
        }
        case GeometryMode::radial: {
            if (nx == 1) return;
            // Symmetric ghost at r=0: Lap u = 4 (u1 - u0)/dr^2 in two dimensions.
            out[0] = u[0] + 4.0 * k * (u[1] - u[0]);
            for (std::size_t i = 1; i + 1 < nx; ++i) {
                const double half = 0.5 / static_cast<double>(i);
                out[i] = u[i] + k * ((1.0 + half) * (u[i + 1] - u[i]) - (1.0 - half) * (u[i] - u[i - 1]));
            }
            out[nx - 1] = u[nx - 1] + 2.0 * k * (u[nx - 2] - u[nx - 1]);
            break;
        }
        case GeometryMode::plane: {
            const std::size_t ny = g.ny;
            for (std::size_t j = 0; j < ny; ++j) {
                const std::size_t jm = j == 0 ? (ny > 1 ? 1 : 0) : j - 1;
                const std::size_t jp = j + 1 == ny ? (ny > 1 ? ny - 2 : 0) : j + 1;
                const double* row = u + j * nx;
                const double* down = u + jm * nx;
                const double* up = u + jp * nx;
                double* o = out + j * nx;
                for (std::size_t i = 0; i < nx; ++i) {
                    const std::size_t im = i == 0 ? 1 : i - 1;
                    const std::size_t ip = i + 1 == nx ? nx - 2 : i + 1;
                    o[i] = row[i] + k * (row[im] + row[ip] + down[i] + up[i] - 4.0 * row[i]);
                }
            }
            break;
        }
        }
        f.values.swap(scratch_);
    }

    SimConfig config_;
    std::vector<double> scratch_;
};

/// Advances `field` by one Strang step of size dt.
inline Field step(const Field& field, double dt, const SimConfig& config) {
    Field out = field;
    Solver(config).advance(out, dt);
    return out;
}

/// Advances `f` to time `target` with steps no larger than config.dt().
inline void advance_to(Solver& solver, Field& f, double target, double dt) {
    while (f.time < target - 1e-14 * std::max(1.0, target)) {
        const double h = std::min(dt, target - f.time);
        solver.advance(f, h);
    }
    f.time = target;
}

inline double estimated_bytes(const SimConfig& c) {
    const Grid g = make_grid(c);
    return 8.0 * static_cast<double>(g.size()) * static_cast<double>(snapshot_schedule(c).size() + 2);
}

inline Trajectory simulate(const SimConfig& config, double memory_limit_bytes = 4e9) {
    Field f = initial_data(config);
    if (estimated_bytes(config) > memory_limit_bytes)
        fail(ErrorCode::config_invalid, "simulate: trajectory would exceed the memory limit");
    Trajectory traj{config, {}};
    const auto times = snapshot_schedule(config);
    traj.snapshots.reserve(times.size());
    Solver solver(config);
    const double dt = config.dt();
    for (double t : times) {
        advance_to(solver, f, t, dt);
        traj.snapshots.push_back(f);
    }
    return traj;
}

// ---------------------------------------------------------------------------
// Snapshot files

inline std::string snapshot_filename(double time) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "snap_t%.6f.csv", time);
    return buf;
}

inline void write_snapshot(std::ostream& out, const Field& f, const SimConfig& c) {
    out << std::setprecision(17) << "# time=" << f.time << " epsilon=" << c.epsilon
        << " lambda=" << c.lambda << "\n";
    const bool plane = f.grid.mode == GeometryMode::plane;
    out << (plane ? "x,y,u\n" : "x,u\n");
    out << std::setprecision(12);
    for (std::size_t k = 0; k < f.values.size(); ++k) {
        const Point p = f.grid.node_at(k);
        out << p.x << ',';
        if (plane) out << p.y << ',';
        out << f.values[k] << '\n';
    }
}

/// Reads a snapshot written by write_snapshot onto `grid`.
inline Field read_snapshot(std::istream& in, const Grid& grid) {
    Field f;
    f.grid = grid;
    std::string line;
    if (!std::getline(in, line) || line.rfind("# time=", 0) != 0)
        fail(ErrorCode::io, "snapshot: missing header");
    f.time = std::stod(line.substr(7));
    std::getline(in, line);
    f.values.reserve(grid.size());
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const auto pos = line.rfind(',');
        f.values.push_back(std::stod(line.substr(pos + 1)));
    }
    if (f.values.size() != grid.size()) fail(ErrorCode::io, "snapshot: node count does not match the grid");
    return f;
}

inline void write_trajectory(const Trajectory& traj, const std::filesystem::path& dir) {
    std::filesystem::create_directories(dir);
    for (const Field& f : traj.snapshots) {
        std::ofstream out(dir / snapshot_filename(f.time));
        if (!out) fail(ErrorCode::io, "cannot write snapshot in " + dir.string());
        write_snapshot(out, f, traj.config);
    }
}

inline Trajectory read_trajectory(const SimConfig& config, const std::filesystem::path& dir) {
    Trajectory traj{config, {}};
    const Grid grid = make_grid(config);
    for (double t : snapshot_schedule(config)) {
        std::ifstream in(dir / snapshot_filename(t));
        if (!in) fail(ErrorCode::io, "missing snapshot " + (dir / snapshot_filename(t)).string());
        traj.snapshots.push_back(read_snapshot(in, grid));
    }
    return traj;
}

} // namespace frontlab
