#pragma once

// Explicit comparison functions and their numerical verification.
//
//   sub_small   max{ m~ e^{-lambda|d0|/eps}, w(t/eps, g(x) - K t) }      0 <= t <= t_eps
//   sub_motion  (U - eps V)(z),  z = (d(t,x) + eps|ln eps| m1 e^{m2 t}) / eps
//   super       K^ U((d0(x) - c t) / eps)
//
// d0 is the uncut signed distance to the initial boundary, d = zeta(d0 - c t)
// the cut-off distance, U the wave at speed c = lambda + 1/lambda and V the
// wave at the slightly slower speed c - eps|ln eps|.

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <map>
#include <memory>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "frontlab/error.hpp"
#include "frontlab/geometry.hpp"
#include "frontlab/nonlinearity.hpp"
#include "frontlab/solver.hpp"
#include "frontlab/waves.hpp"

namespace frontlab {

enum class BoundKind { sub_small, sub_motion, super };

inline std::string_view to_string(BoundKind k) {
    switch (k) {
    case BoundKind::sub_small: return "sub_small";
    case BoundKind::sub_motion: return "sub_motion";
    case BoundKind::super: return "super";
    }
    return "";
}

inline std::optional<BoundKind> parse_bound_kind(std::string_view s) {
    if (s == "sub_small") return BoundKind::sub_small;
    if (s == "sub_motion") return BoundKind::sub_motion;
    if (s == "super") return BoundKind::super;
    return std::nullopt;
}

// ---------------------------------------------------------------------------
// Constants

/// Every constant entering a verification, in resolution order.
struct RunConstants {
    // geometry
    double c_lambda = 0, d0 = 0, A = 0, delta = 0, C_dist = 0;
    // waves
    double eta = 0, mu = 0, r_fit = 0, R_fit = 0;
    double c_eps = 0, eta_eps = 0, mu_eps = 0;
    bool has_slow_wave = false;
    // calibration
    double alpha = 0, C_a = 0;
    // formulas
    double K = 0, k = 0, k_measure = 0, m_tilde = 0;
    double m1_min = 0, m2_min = 0, m1 = 0, m2 = 0;
    double K0 = 0, K_hat = 0, C_floor = 0, C = 0, t_eps = 0;
    std::map<int, double> k_p;
    std::vector<std::string> overridden; // names replaced by user values

    /// (name, value) pairs in a fixed order for manifests and reports.
    std::vector<std::pair<std::string, double>> entries() const {
        std::vector<std::pair<std::string, double>> e = {
            {"c_lambda", c_lambda}, {"c_eps", c_eps},   {"eta", eta},         {"mu", mu},
            {"eta_eps", eta_eps},   {"mu_eps", mu_eps}, {"r_fit", r_fit},     {"R_fit", R_fit},
            {"d0", d0},             {"A", A},           {"delta", delta},     {"C_dist", C_dist},
            {"alpha", alpha},       {"C_a", C_a},       {"K", K},             {"k", k},
            {"k_measure", k_measure}, {"m_tilde", m_tilde}, {"m1_min", m1_min}, {"m2_min", m2_min},
            {"m1", m1},             {"m2", m2},         {"K0", K0},           {"K_hat", K_hat},
            {"C_floor", C_floor},   {"C", C},           {"t_eps", t_eps}};
        for (const auto& [p, v] : k_p) e.emplace_back("k_p" + std::to_string(p), v);
        return e;
    }
};

/// Lower bound for the tube constant: max(1/lambda, 2(c alpha + m1 e^{m2 T}), 2/eta).
inline double choice_floor(double lambda, double c, double alpha, double m1, double m2, double T,
                           double eta) {
    return std::max({1.0 / lambda, 2.0 * (c * alpha + m1 * std::exp(m2 * T)), 2.0 / eta});
}

/// k and k_p (keyed by p) for the generation corollaries.
struct GenerationConstants {
    double k;
    std::map<int, double> k_p;
};

namespace detail {

/// Points on the initial boundary with their outward normals.
inline std::vector<std::pair<Point, Point>> boundary_samples(const ConvexShape& shape, int n = 64) {
    std::vector<std::pair<Point, Point>> out;
    if (const auto* s = std::get_if<Interval>(&shape)) {
        out.push_back({{s->half_length, 0.0}, {1.0, 0.0}});
        out.push_back({{-s->half_length, 0.0}, {-1.0, 0.0}});
    } else if (const auto* s = std::get_if<Disk>(&shape)) {
        for (int i = 0; i < n; ++i) {
            const double th = 2.0 * M_PI * i / n;
            out.push_back({{s->radius * std::cos(th), s->radius * std::sin(th)}, {std::cos(th), std::sin(th)}});
        }
    } else {
        const auto& v = std::get<ConvexPolygon>(shape).vertices;
        for (std::size_t i = 0; i < v.size(); ++i) {
            const Point a = v[i], b = v[(i + 1) % v.size()];
            const double len = std::hypot(b.x - a.x, b.y - a.y);
            const Point nrm{(b.y - a.y) / len, -(b.x - a.x) / len};
            for (int j = 1; j < 8; ++j) {
                const double t = j / 8.0;
                out.push_back({{a.x + t * (b.x - a.x), a.y + t * (b.y - a.y)}, nrm});
            }
        }
    }
    return out;
}

} // namespace detail

/// k = 2(3 + K alpha)/delta and k_p = c alpha + p/lambda + ln(K^ R)/(lambda|ln eps|).
/// The c alpha term accounts for the super-solution having moved by c t_eps
/// at the time the corollary is read.
inline GenerationConstants generation_constants(const SimConfig& config, double K, double alpha,
                                                double K_hat, double R_fit,
                                                const std::vector<int>& p_values = {1, 2}) {
    const double delta = bump_boundary_slope(config);
    // Inward one-sided slope of g at boundary samples.
    const double h = 1e-6 * outer_extent(config.shape);
    for (const auto& [y, n] : detail::boundary_samples(config.shape)) {
        const double slope = bump(config, {y.x - h * n.x, y.y - h * n.y}) / h;
        if (slope < 0.5 * delta)
            fail(ErrorCode::construction, "generation_constants: boundary slope of g below delta/2");
    }
    const double lne = std::abs(std::log(config.epsilon));
    GenerationConstants out{2.0 * (3.0 + K * alpha) / delta, {}};
    const double c = config.speed();
    for (int p : p_values)
        out.k_p[p] = c * alpha + p / config.lambda + std::log(std::max(K_hat * R_fit, 1.0)) / (config.lambda * lne);
    return out;
}

struct ResolveOptions {
    std::vector<double> calibration_epsilons; // defaults to {epsilon}
    std::map<std::string, double> overrides;  // alpha, C_a, K, k, m1, m2, K_hat, C
    std::vector<int> p_values = {1, 2};
};

/// Shared state of all bounds for one configuration.
struct BoundContext {
    SimConfig config;
    RunConstants constants;
    std::shared_ptr<const WaveProfile> U;
    std::shared_ptr<const WaveProfile> V; // empty when c - eps|ln eps| <= 2
    LimitInterface iface;
    CutoffSpec cutoff;
};

inline const std::vector<std::string>& override_names() {
    static const std::vector<std::string> names = {"alpha", "C_a", "K", "k", "m1", "m2", "K_hat", "C"};
    return names;
}

/// Resolves constants in the order geometry -> waves -> calibration ->
/// formulas -> user overrides. Only the slow-decay regime lambda < 1 has
/// the comparison functions.
inline BoundContext resolve_context(const SimConfig& config, const ResolveOptions& opt = {}) {
    require_valid(config);
    if (!(config.lambda < 1.0))
        fail(ErrorCode::domain, "comparison bounds require lambda < 1 (slow decay)");
    for (const auto& [name, value] : opt.overrides) {
        if (std::find(override_names().begin(), override_names().end(), name) == override_names().end())
            fail(ErrorCode::config_invalid, "unknown constant override '" + name + "'");
        if (!(value > 0.0)) fail(ErrorCode::config_invalid, "override '" + name + "' must be positive");
    }
    auto pick = [&](const std::string& name, double computed, RunConstants& rc) {
        auto it = opt.overrides.find(name);
        if (it == opt.overrides.end()) return computed;
        rc.overridden.push_back(name);
        return it->second;
    };

    BoundContext ctx;
    ctx.config = config;
    RunConstants& rc = ctx.constants;
    const double eps = config.epsilon;
    const double l = config.layer_scale();

    rc.c_lambda = config.speed();
    ctx.cutoff = default_cutoff(config.shape);
    ctx.iface = LimitInterface{config.shape, rc.c_lambda};
    rc.d0 = ctx.cutoff.d0;
    rc.A = transport_constant(ctx.iface, ctx.cutoff);
    rc.delta = bump_boundary_slope(config);
    rc.C_dist = distance_derivative_bound(config.shape, ctx.cutoff);

    ctx.U = std::make_shared<const WaveProfile>(compute_profile(rc.c_lambda));
    rc.eta = ctx.U->eta();
    rc.mu = ctx.U->mu();
    rc.r_fit = ctx.U->r_fit();
    rc.R_fit = ctx.U->R_fit();
    rc.c_eps = rc.c_lambda - l;
    if (rc.c_eps > 2.0) {
        ctx.V = std::make_shared<const WaveProfile>(compute_profile(rc.c_eps));
        rc.eta_eps = ctx.V->eta();
        rc.mu_eps = ctx.V->mu();
        rc.has_slow_wave = true;
    }

    std::vector<double> cal = opt.calibration_epsilons.empty() ? std::vector<double>{eps}
                                                               : opt.calibration_epsilons;
    double alpha = 0.0, c_a = 0.0;
    if (!opt.overrides.count("alpha") || !opt.overrides.count("C_a")) {
        const auto g = calibrate_generation(cal, config.xi_bound());
        alpha = g.alpha;
        c_a = g.c_a;
    }
    rc.alpha = pick("alpha", alpha, rc);
    rc.C_a = pick("C_a", c_a, rc);

    const auto [grad2, lap] = bump_derivative_bounds(config);
    rc.K = pick("K", 2.0 * rc.C_a * (grad2 + lap + 1.0), rc);
    rc.m_tilde = std::min(0.5, config.m);
    rc.K0 = std::max({1.0, config.M / rc.r_fit, (config.g_sup() + config.M) / WaveProfile::normalization});
    rc.K_hat = pick("K_hat", rc.K0 + 1.0, rc);
    const auto gen = generation_constants(config, rc.K, rc.alpha, rc.K_hat, rc.R_fit, opt.p_values);
    rc.k = pick("k", gen.k, rc);
    rc.k_p = gen.k_p;
    rc.k_measure = 6.0 / rc.delta;
    rc.m1_min = 3.0 * rc.k;
    rc.m1 = pick("m1", rc.m1_min, rc);
    rc.m2_min = 2.0 * rc.A * (2.0 / (rc.m1_min * rc.eta) + 1.0);
    rc.m2 = pick("m2", rc.m2_min, rc);
    rc.t_eps = rc.alpha * l;
    rc.C_floor = choice_floor(config.lambda, rc.c_lambda, rc.alpha, rc.m1, rc.m2, config.horizon, rc.eta);
    rc.C = pick("C", 1.2 * rc.C_floor, rc);

    if (rc.K_hat < rc.K0) fail(ErrorCode::config_invalid, "K_hat must be at least K0");
    if (rc.m1 < rc.m1_min) fail(ErrorCode::config_invalid, "m1 must be at least 3k");
    if (rc.m2 < rc.m2_min) fail(ErrorCode::config_invalid, "m2 must be at least 2A(2/(m1~ eta)+1)");
    if (rc.C < rc.C_floor) fail(ErrorCode::config_invalid, "C must exceed the tube floor");
    return ctx;
}

// ---------------------------------------------------------------------------
// Bound functions

struct BoundSpec {
    BoundKind kind = BoundKind::super;
    double K = 0, m1 = 0, m2 = 0, K_hat = 0;
    std::shared_ptr<const WaveProfile> U, V;
    SimConfig config;
    double t_eps = 0;
    double m_tilde = 0.5;
    LimitInterface iface{Interval{1.0}, 2.5};
    CutoffSpec cutoff{0.25};
};

inline BoundSpec make_bound_spec(BoundKind kind, const BoundContext& ctx) {
    BoundSpec s;
    s.kind = kind;
    s.config = ctx.config;
    s.U = ctx.U;
    s.V = ctx.V;
    s.iface = ctx.iface;
    s.cutoff = ctx.cutoff;
    s.t_eps = ctx.constants.t_eps;
    s.m_tilde = ctx.constants.m_tilde;
    const RunConstants& rc = ctx.constants;
    switch (kind) {
    case BoundKind::sub_small: s.K = rc.K; break;
    case BoundKind::sub_motion:
        if (!ctx.V) fail(ErrorCode::construction, "sub_motion needs c - eps|ln eps| > 2");
        s.m1 = rc.m1;
        s.m2 = rc.m2;
        break;
    case BoundKind::super: s.K_hat = rc.K_hat; break;
    }
    return s;
}

namespace detail {

inline const ode::Tolerance& fine_tolerance() {
    static const ode::Tolerance tol{1e-13, 1e-11, 1'000'000};
    return tol;
}

/// The two branches of the small-time sub-solution.
struct SmallBranches {
    double tail;
    double flow; // -inf when the flow branch is negative by the sign rule
};

inline SmallBranches sub_small_branches(double t, Point x, const BoundSpec& s) {
    const SimConfig& c = s.config;
    const double tail = s.m_tilde * std::exp(-c.lambda * std::abs(signed_distance(c.shape, x)) / c.epsilon);
    const double xi = bump(c, x) - s.K * t;
    // Negative data stay negative under the flow, below the positive tail.
    if (xi < 0.0) return {tail, -std::numeric_limits<double>::infinity()};
    if (xi == 0.0) return {tail, 0.0};
    const auto kind = ReactionKind::perturbed(c.epsilon);
    return {tail, semiflow(t / c.epsilon, xi, kind, fine_tolerance()).value};
}

} // namespace detail

inline double eval_sub_small(double t, Point x, const BoundSpec& s) {
    const auto b = detail::sub_small_branches(t, x, s);
    return std::max(b.tail, b.flow);
}

/// Argument z(t, x) of the motion sub-solution.
inline double motion_argument(double t, Point x, const BoundSpec& s) {
    const double eps = s.config.epsilon;
    const double d = cutoff_distance(s.iface, s.cutoff, t, x).d;
    return (d + s.config.layer_scale() * s.m1 * std::exp(s.m2 * t)) / eps;
}

inline double eval_sub_motion(double t, Point x, const BoundSpec& s) {
    const double z = motion_argument(t, x, s);
    return s.U->eval(z).u - s.config.epsilon * s.V->eval(z).u;
}

inline double super_argument(double t, Point x, const BoundSpec& s) {
    return (signed_distance(s.config.shape, x) - s.iface.speed * t) / s.config.epsilon;
}

inline double eval_super(double t, Point x, const BoundSpec& s) {
    return s.K_hat * s.U->eval(super_argument(t, x, s)).u;
}

inline double eval_bound(double t, Point x, const BoundSpec& s) {
    switch (s.kind) {
    case BoundKind::sub_small: return eval_sub_small(t, x, s);
    case BoundKind::sub_motion: return eval_sub_motion(t, x, s);
    case BoundKind::super: return eval_super(t, x, s);
    }
    return 0.0;
}

/// Exact eps L[u+] = K^(K^-1) U^2 - eps K^ U' Lap d0 (the last term vanishes
/// for flat boundaries).
inline double super_identity(double t, Point x, const BoundSpec& s) {
    const auto p = s.U->eval(super_argument(t, x, s));
    const double lap = distance_jet(s.config.shape, x).laplacian;
    return s.K_hat * (s.K_hat - 1.0) * p.u * p.u -
           (p.du == 0.0 ? 0.0 : s.config.epsilon * s.K_hat * p.du * lap);
}

// ---------------------------------------------------------------------------
// Reports

struct BoundsRow {
    double time;
    double residual_max;
    double residual_min;
    double ordering_violation;
    std::size_t nodes;
};

struct BoundsReport {
    BoundKind kind = BoundKind::super;
    double tol = 0.0;
    double identity_tol = 0.0;
    bool residual_checked = false;
    bool ordering_checked = false;
    double residual_max = -std::numeric_limits<double>::infinity();
    double residual_min = std::numeric_limits<double>::infinity();
    double identity_error = std::numeric_limits<double>::quiet_NaN();
    double ordering_violation = 0.0;
    std::size_t residual_nodes = 0;
    std::size_t excluded_nodes = 0;
    std::size_t ordering_nodes = 0;
    std::vector<BoundsRow> residual_rows;
    std::vector<BoundsRow> ordering_rows;

    bool residual_passed() const {
        if (!residual_checked) return true;
        if (kind == BoundKind::super)
            return residual_min >= -tol && !(identity_error > identity_tol);
        return residual_max <= tol;
    }
    bool ordering_passed() const { return !ordering_checked || ordering_violation <= tol; }
    bool passed() const { return residual_passed() && ordering_passed(); }
};

inline BoundsReport merge(BoundsReport a, const BoundsReport& b) {
    if (b.residual_checked) {
        a.residual_checked = true;
        a.residual_max = b.residual_max;
        a.residual_min = b.residual_min;
        a.identity_error = b.identity_error;
        a.identity_tol = b.identity_tol;
        a.residual_nodes = b.residual_nodes;
        a.excluded_nodes = b.excluded_nodes;
        a.residual_rows = b.residual_rows;
    }
    if (b.ordering_checked) {
        a.ordering_checked = true;
        a.ordering_violation = b.ordering_violation;
        a.ordering_nodes = b.ordering_nodes;
        a.ordering_rows = b.ordering_rows;
    }
    a.tol = std::max(a.tol, b.tol);
    return a;
}

inline void write_report_text(std::ostream& out, const BoundsReport& r) {
    out << std::setprecision(12);
    out << "kind=" << to_string(r.kind) << "\n"
        << "tol=" << r.tol << "\n"
        << "residual_checked=" << (r.residual_checked ? 1 : 0) << "\n"
        << "residual_max=" << r.residual_max << "\n"
        << "residual_min=" << r.residual_min << "\n"
        << "identity_error=" << r.identity_error << "\n"
        << "identity_tol=" << r.identity_tol << "\n"
        << "residual_nodes=" << r.residual_nodes << "\n"
        << "excluded_nodes=" << r.excluded_nodes << "\n"
        << "ordering_checked=" << (r.ordering_checked ? 1 : 0) << "\n"
        << "ordering_violation=" << r.ordering_violation << "\n"
        << "ordering_nodes=" << r.ordering_nodes << "\n"
        << "residual_passed=" << (r.residual_passed() ? 1 : 0) << "\n"
        << "ordering_passed=" << (r.ordering_passed() ? 1 : 0) << "\n"
        << "passed=" << (r.passed() ? 1 : 0) << "\n";
}

inline void write_report_csv(std::ostream& out, const BoundsReport& r) {
    out << std::setprecision(12) << "check,time,residual_max,residual_min,ordering_violation,nodes\n";
    for (const auto& row : r.residual_rows)
        out << "residual," << row.time << ',' << row.residual_max << ',' << row.residual_min << ",," << row.nodes << '\n';
    for (const auto& row : r.ordering_rows)
        out << "ordering," << row.time << ",,," << row.ordering_violation << ',' << row.nodes << '\n';
}

// ---------------------------------------------------------------------------
// Residual

namespace detail {

/// Nodes where the uncut initial distance is not smooth within the stencil
/// (the medial set, or the boundary for kinds that use |d0|).
inline bool distance_kink_near(const ConvexShape& shape, Point x, double dx, GeometryMode mode,
                               bool include_boundary) {
    const double reach = 2.0 * dx;
    const DistanceJet dj = distance_jet(shape, x);
    if (include_boundary && std::abs(dj.value) < reach + 1e-12 * dx) return true;
    if (!std::isfinite(dj.laplacian)) return true;
    // On or next to the medial set the second difference of d0 blows up like 1/dx.
    const bool plane = mode == GeometryMode::plane;
    for (int a = -2; a <= 2; ++a)
        for (int b = (plane ? -2 : 0); b <= (plane ? 2 : 0); ++b) {
            const Point p{x.x + a * dx, x.y + b * dx};
            const DistanceJet pj = distance_jet(shape, p);
            if (!std::isfinite(pj.laplacian)) return true;
            double fd = 0.0;
            const double c0 = pj.value;
            fd += (signed_distance(shape, {p.x + dx, p.y}) - 2.0 * c0 + signed_distance(shape, {p.x - dx, p.y})) / (dx * dx);
            if (mode != GeometryMode::line)
                fd += (signed_distance(shape, {p.x, p.y + dx}) - 2.0 * c0 + signed_distance(shape, {p.x, p.y - dx})) / (dx * dx);
            if (std::abs(fd - pj.laplacian) > 0.1 / dx) return true;
        }
    return false;
}

/// True when the active branch of the small-time sub-solution changes within
/// two cells or one time step of (t, x).
inline bool switch_near(double t, double ht, Point x, double dx, const BoundSpec& s, GeometryMode mode) {
    auto active = [&](double tt, Point p) {
        const auto b = sub_small_branches(tt, p, s);
        return b.flow > b.tail;
    };
    const bool here = active(t, x);
    const bool plane = mode == GeometryMode::plane;
    for (int a = -2; a <= 2; ++a)
        for (int b = (plane ? -2 : 0); b <= (plane ? 2 : 0); ++b) {
            if (a == 0 && b == 0) continue;
            if (active(t, {x.x + a * dx, x.y + b * dx}) != here) return true;
        }
    for (double tt : {t - ht, t + ht})
        if (tt >= 0.0 && active(tt, x) != here) return true;
    return false;
}

} // namespace detail

/// Discrete eps L[v] of the bound at (t, x): centred differences in space with
/// the grid spacing and in time with step dx/10 (one-sided at t = 0).
inline double discrete_residual(const BoundSpec& s, double t, Point x, double dx, GeometryMode mode) {
    const double eps = s.config.epsilon;
    const double ht = dx / 10.0;
    auto v = [&](double tt, Point p) { return eval_bound(tt, p, s); };
    const double v0 = v(t, x);
    double vt;
    if (t - ht >= 0.0) {
        vt = (v(t + ht, x) - v(t - ht, x)) / (2.0 * ht);
    } else {
        vt = (-3.0 * v0 + 4.0 * v(t + ht, x) - v(t + 2.0 * ht, x)) / (2.0 * ht);
    }
    const double vxp = v(t, {x.x + dx, x.y}), vxm = v(t, {x.x - dx, x.y});
    double lap = (vxp - 2.0 * v0 + vxm) / (dx * dx);
    if (mode == GeometryMode::radial) {
        lap += (vxp - vxm) / (2.0 * dx * x.x);
    } else if (mode == GeometryMode::plane) {
        lap += (v(t, {x.x, x.y + dx}) - 2.0 * v0 + v(t, {x.x, x.y - dx})) / (dx * dx);
    }
    return eps * vt - eps * eps * lap - v0 * (1.0 - v0);
}

/// Residual sweep of the bound over `times` on the nodes of `grid`
/// (every `stride`-th node along each axis).
inline BoundsReport residual(const BoundSpec& s, const std::vector<double>& times, const Grid& grid,
                             std::size_t stride = 1) {
    const double eps = s.config.epsilon;
    const double dx = grid.dx;
    if (dx > eps / 10.0 * (1.0 + 1e-12))
        fail(ErrorCode::resolution, "residual: dx must not exceed eps/10");
    if (stride == 0) stride = 1;
    BoundsReport rep;
    rep.kind = s.kind;
    rep.tol = 10.0 * dx * dx;
    rep.identity_tol = 5.0 * dx * dx;
    rep.residual_checked = true;

    // Node set (static over time), with smoothness exclusions of the distance.
    const bool use_abs = s.kind == BoundKind::sub_small;
    std::vector<Point> nodes;
    std::size_t excluded = 0;
    for (std::size_t j = 0; j < grid.ny; j += (grid.mode == GeometryMode::plane ? stride : 1))
        for (std::size_t i = 0; i < grid.nx; i += stride) {
            const Point p = grid.node(i, j);
            if (detail::distance_kink_near(s.config.shape, p, dx, grid.mode, use_abs)) {
                ++excluded;
                continue;
            }
            nodes.push_back(p);
        }

    double id_err = 0.0, id_scale = 0.0;
    const double ht = dx / 10.0;
    for (double t : times) {
        BoundsRow row{t, -std::numeric_limits<double>::infinity(), std::numeric_limits<double>::infinity(), 0.0, 0};
        for (const Point& p : nodes) {
            if (s.kind == BoundKind::sub_small && detail::switch_near(t, ht, p, dx, s, grid.mode)) {
                ++excluded;
                continue;
            }
            const double r = discrete_residual(s, t, p, dx, grid.mode);
            row.residual_max = std::max(row.residual_max, r);
            row.residual_min = std::min(row.residual_min, r);
            ++row.nodes;
            if (s.kind == BoundKind::super) {
                const double exact = super_identity(t, p, s);
                id_err = std::max(id_err, std::abs(r - exact));
                id_scale = std::max(id_scale, std::abs(exact));
            }
        }
        rep.residual_max = std::max(rep.residual_max, row.residual_max);
        rep.residual_min = std::min(rep.residual_min, row.residual_min);
        rep.residual_nodes += row.nodes;
        rep.residual_rows.push_back(row);
    }
    rep.excluded_nodes = excluded;
    if (s.kind == BoundKind::super) rep.identity_error = id_scale > 0.0 ? id_err / id_scale : id_err;
    return rep;
}

/// Default residual times: `n` evenly spaced points over the bound's range.
inline std::vector<double> residual_times(const BoundSpec& s, int n = 11) {
    double lo = 0.0, hi = s.config.horizon;
    if (s.kind == BoundKind::sub_small) hi = std::min(s.t_eps, s.config.horizon);
    if (s.kind == BoundKind::sub_motion) hi = std::max(0.0, s.config.horizon - s.t_eps);
    std::vector<double> ts;
    if (n <= 1 || hi <= lo) return {lo};
    for (int i = 0; i < n; ++i) ts.push_back(lo + (hi - lo) * i / (n - 1));
    return ts;
}

// ---------------------------------------------------------------------------
// Ordering against a simulation

inline BoundsReport verify_ordering(const Trajectory& traj, const BoundSpec& s) {
    if (!same_config(traj.config, s.config))
        fail(ErrorCode::mismatch, "verify_ordering: trajectory and bound use different configurations");
    BoundsReport rep;
    rep.kind = s.kind;
    const double dx = s.config.dx();
    rep.tol = 10.0 * dx * dx;
    rep.ordering_checked = true;
    const double slack = 1e-12 * std::max(1.0, s.config.horizon);
    for (const Field& f : traj.snapshots) {
        double shift = 0.0;
        if (s.kind == BoundKind::sub_small && f.time > s.t_eps + slack) continue;
        if (s.kind == BoundKind::sub_motion) {
            if (f.time < s.t_eps - slack) continue;
            shift = s.t_eps;
        }
        const double tb = std::max(0.0, f.time - shift);
        BoundsRow row{f.time, 0, 0, -std::numeric_limits<double>::infinity(), 0};
        for (std::size_t k = 0; k < f.values.size(); ++k) {
            const Point p = f.grid.node_at(k);
            const double b = eval_bound(tb, p, s);
            const double v = s.kind == BoundKind::super ? f.values[k] - b : b - f.values[k];
            row.ordering_violation = std::max(row.ordering_violation, v);
        }
        row.nodes = f.values.size();
        rep.ordering_violation = std::max(rep.ordering_violation, row.ordering_violation);
        rep.ordering_nodes += row.nodes;
        rep.ordering_rows.push_back(row);
    }
    if (rep.ordering_rows.empty()) fail(ErrorCode::insufficient_data, "verify_ordering: no snapshot in the bound's time range");
    return rep;
}

/// Largest violation of max(u-, 0) - tol <= u <= u+ + tol over snapshots with t >= t_eps:
/// (lower, upper) excesses, both <= 0 on a verified run.
struct SandwichResult {
    double lower_excess = -std::numeric_limits<double>::infinity();
    double upper_excess = -std::numeric_limits<double>::infinity();
    std::size_t snapshots = 0;
    double tol = 0.0;
    bool passed() const { return lower_excess <= tol && upper_excess <= tol; }
};

inline SandwichResult sandwich(const Trajectory& traj, const BoundSpec& lower, const BoundSpec& upper) {
    if (lower.kind != BoundKind::sub_motion || upper.kind != BoundKind::super)
        fail(ErrorCode::domain, "sandwich: expects a sub_motion and a super bound");
    if (!same_config(traj.config, lower.config) || !same_config(traj.config, upper.config))
        fail(ErrorCode::mismatch, "sandwich: configurations differ");
    SandwichResult out;
    const double dx = traj.config.dx();
    out.tol = 10.0 * dx * dx;
    for (const Field& f : traj.snapshots) {
        if (f.time < lower.t_eps - 1e-12) continue;
        ++out.snapshots;
        for (std::size_t k = 0; k < f.values.size(); ++k) {
            const Point p = f.grid.node_at(k);
            const double lo = std::max(eval_sub_motion(f.time - lower.t_eps, p, lower), 0.0);
            const double hi = eval_super(f.time, p, upper);
            out.lower_excess = std::max(out.lower_excess, lo - f.values[k]);
            out.upper_excess = std::max(out.upper_excess, f.values[k] - hi);
        }
    }
    return out;
}

} // namespace frontlab
