#pragma once

// Convex initial regions, signed distances and the constant-speed motion of
// their boundaries.
//
// For a convex region moving outward with normal speed c the moving boundary
// is the parallel body at offset c t, so the signed distance satisfies
// dist(t, x) = dist(0, x) - c t everywhere.

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <variant>
#include <vector>

#include "frontlab/error.hpp"
#include "frontlab/nonlinearity.hpp"

namespace frontlab {

struct Point {
    double x = 0.0;
    double y = 0.0;
};

inline double norm(Point p) { return std::hypot(p.x, p.y); }

struct Interval {
    double half_length;
};

struct Disk {
    double radius;
};

struct ConvexPolygon {
    std::vector<Point> vertices; // counterclockwise, strictly convex
};

using ConvexShape = std::variant<Interval, Disk, ConvexPolygon>;

inline void validate_shape(const ConvexShape& shape) {
    struct {
        void operator()(const Interval& s) const {
            if (!(s.half_length > 0.0)) fail(ErrorCode::domain, "interval half_length must be positive");
        }
        void operator()(const Disk& s) const {
            if (!(s.radius > 0.0)) fail(ErrorCode::domain, "disk radius must be positive");
        }
        void operator()(const ConvexPolygon& s) const {
            const auto& v = s.vertices;
            if (v.size() < 3) fail(ErrorCode::domain, "polygon needs at least 3 vertices");
            for (std::size_t i = 0; i < v.size(); ++i) {
                const Point a = v[i], b = v[(i + 1) % v.size()], c = v[(i + 2) % v.size()];
                const double cross = (b.x - a.x) * (c.y - b.y) - (b.y - a.y) * (c.x - b.x);
                if (!(cross > 0.0))
                    fail(ErrorCode::domain, "polygon must be strictly convex and counterclockwise");
            }
        }
    } visitor;
    std::visit(visitor, shape);
}

/// Signed distance with its gradient and Laplacian. In line mode only the
/// x component is used; the Laplacian is taken in the shape's native
/// dimension (1 for intervals, 2 otherwise).
struct DistanceJet {
    double value;
    Point gradient;
    double laplacian;
};

namespace detail {

inline DistanceJet polygon_distance(const ConvexPolygon& poly, Point x) {
    const auto& v = poly.vertices;
    const std::size_t n = v.size();
    // Inside test and distance to the supporting lines.
    double max_line = -std::numeric_limits<double>::infinity();
    Point line_normal{};
    for (std::size_t i = 0; i < n; ++i) {
        const Point a = v[i], b = v[(i + 1) % n];
        const double len = std::hypot(b.x - a.x, b.y - a.y);
        const Point nrm{(b.y - a.y) / len, -(b.x - a.x) / len}; // outward for CCW
        const double s = (x.x - a.x) * nrm.x + (x.y - a.y) * nrm.y;
        if (s > max_line) {
            max_line = s;
            line_normal = nrm;
        }
    }
    if (max_line <= 0.0) return {max_line, line_normal, 0.0};

    // Outside: nearest point on the boundary segments.
    double best = std::numeric_limits<double>::infinity();
    DistanceJet out{0.0, {}, 0.0};
    for (std::size_t i = 0; i < n; ++i) {
        const Point a = v[i], b = v[(i + 1) % n];
        const Point ab{b.x - a.x, b.y - a.y};
        const double t = std::clamp(((x.x - a.x) * ab.x + (x.y - a.y) * ab.y) /
                                        (ab.x * ab.x + ab.y * ab.y),
                                    0.0, 1.0);
        const Point q{a.x + t * ab.x, a.y + t * ab.y};
        const Point diff{x.x - q.x, x.y - q.y};
        const double dist = norm(diff);
        if (dist < best) {
            best = dist;
            const bool vertex = (t == 0.0 || t == 1.0);
            out = {dist, {diff.x / dist, diff.y / dist}, vertex ? 1.0 / dist : 0.0};
        }
    }
    return out;
}

} // namespace detail

inline DistanceJet distance_jet(const ConvexShape& shape, Point x) {
    if (const auto* s = std::get_if<Interval>(&shape)) {
        const double sign = x.x >= 0.0 ? 1.0 : -1.0;
        return {std::abs(x.x) - s->half_length, {sign, 0.0}, 0.0};
    }
    if (const auto* s = std::get_if<Disk>(&shape)) {
        const double r = norm(x);
        if (r == 0.0) return {-s->radius, {1.0, 0.0}, std::numeric_limits<double>::infinity()};
        return {r - s->radius, {x.x / r, x.y / r}, 1.0 / r};
    }
    return detail::polygon_distance(std::get<ConvexPolygon>(shape), x);
}

/// Negative inside, positive outside, zero on the boundary.
inline double signed_distance(const ConvexShape& shape, Point x) {
    return distance_jet(shape, x).value;
}

/// Radius of the largest inscribed ball.
inline double inradius(const ConvexShape& shape) {
    if (const auto* s = std::get_if<Interval>(&shape)) return s->half_length;
    if (const auto* s = std::get_if<Disk>(&shape)) return s->radius;
    const auto& v = std::get<ConvexPolygon>(shape).vertices;
    // -signed_distance is concave on the polygon; compass search from the centroid.
    Point c{};
    for (const Point& p : v) c = {c.x + p.x / v.size(), c.y + p.y / v.size()};
    double best = -signed_distance(shape, c);
    double step = 0.0;
    for (const Point& p : v) step = std::max(step, norm({p.x - c.x, p.y - c.y}));
    step *= 0.25;
    while (step > 1e-12) {
        bool moved = false;
        for (Point d : {Point{1, 0}, Point{-1, 0}, Point{0, 1}, Point{0, -1}, Point{0.7071, 0.7071},
                        Point{-0.7071, 0.7071}, Point{0.7071, -0.7071}, Point{-0.7071, -0.7071}}) {
            const Point q{c.x + step * d.x, c.y + step * d.y};
            const double val = -signed_distance(shape, q);
            if (val > best) {
                best = val;
                c = q;
                moved = true;
            }
        }
        if (!moved) step *= 0.5;
    }
    return best;
}

/// Farthest distance from the origin to a point of the shape.
inline double outer_extent(const ConvexShape& shape) {
    if (const auto* s = std::get_if<Interval>(&shape)) return s->half_length;
    if (const auto* s = std::get_if<Disk>(&shape)) return s->radius;
    double r = 0.0;
    for (const Point& p : std::get<ConvexPolygon>(shape).vertices) r = std::max(r, norm(p));
    return r;
}

inline int native_dimension(const ConvexShape& shape) {
    return std::holds_alternative<Interval>(shape) ? 1 : 2;
}

inline std::string shape_name(const ConvexShape& shape) {
    if (std::holds_alternative<Interval>(shape)) return "interval";
    if (std::holds_alternative<Disk>(shape)) return "disk";
    return "convex_polygon";
}

// ---------------------------------------------------------------------------
// Cutoff zeta

struct CutoffSpec {
    double d0;
};

/// zeta(s) = s on |s| <= d0, +-2 d0 beyond 3 d0, joined on [d0, 3d0] by the
/// quintic Hermite blend with matching value, slope and zero curvature at
/// both ends (it degenerates to a quartic: zeta' = 1 - 3 tau^2 + 2 tau^3).
inline Jet cutoff(double s, const CutoffSpec& spec) {
    const double d0 = spec.d0;
    const double a = std::abs(s);
    const double sign = s < 0.0 ? -1.0 : 1.0;
    if (a <= d0) return {s, 1.0, 0.0};
    if (a >= 3.0 * d0) return {sign * 2.0 * d0, 0.0, 0.0};
    const double w = 2.0 * d0;
    const double tau = (a - d0) / w;
    const double value = d0 + w * (tau - tau * tau * tau + 0.5 * tau * tau * tau * tau);
    const double slope = 1.0 - 3.0 * tau * tau + 2.0 * tau * tau * tau;
    const double curv = (-6.0 * tau + 6.0 * tau * tau) / w;
    return {sign * value, slope, sign * curv};
}

/// max |zeta''| = 3/(4 d0), attained at the blend midpoint.
inline double cutoff_max_curvature(const CutoffSpec& spec) { return 0.75 / spec.d0; }

// ---------------------------------------------------------------------------
// Limit interface

struct LimitInterface {
    ConvexShape shape;
    double speed;

    /// Uncut signed distance to the interface at time t.
    double tilde_distance(double t, Point x) const { return signed_distance(shape, x) - speed * t; }
};

struct CutoffDistance {
    double d;
    double grad_norm;
    double laplacian;
    double dt;
};

inline CutoffDistance cutoff_distance(const LimitInterface& iface, const CutoffSpec& spec, double t,
                                      Point x) {
    const DistanceJet dj = distance_jet(iface.shape, x);
    const Jet z = cutoff(dj.value - iface.speed * t, spec);
    const double g2 = dj.gradient.x * dj.gradient.x + dj.gradient.y * dj.gradient.y;
    // Where zeta' vanishes the (possibly singular) Laplacian of the distance drops out.
    const double lap = z.d2 * g2 + (z.d1 == 0.0 ? 0.0 : z.d1 * dj.laplacian);
    return {z.value, z.d1 * std::sqrt(g2), lap, -iface.speed * z.d1};
}

/// Default tube half-width: a quarter of the inradius.
inline CutoffSpec default_cutoff(const ConvexShape& shape) { return {0.25 * inradius(shape)}; }

/// Constant A in |d_t + c| <= A |d|.
inline double transport_constant(const LimitInterface& iface, const CutoffSpec& spec) {
    return iface.speed / spec.d0;
}

/// Upper bound for |grad d| + |Lap d|. The Laplacian of the distance is only
/// active where zeta' > 0, i.e. within 3 d0 of the moving boundary, so the
/// inner curvature radius is at least inradius - 3 d0.
inline double distance_derivative_bound(const ConvexShape& shape, const CutoffSpec& spec) {
    const int n = native_dimension(shape);
    const double inner = inradius(shape) - 3.0 * spec.d0;
    double curvature = 0.0;
    if (n > 1) {
        if (!(inner > 0.0))
            fail(ErrorCode::domain, "distance_derivative_bound: d0 too large for the shape");
        curvature = (n - 1) / inner;
    }
    return 1.0 + curvature + cutoff_max_curvature(spec);
}

enum class Region { near_interface, inside_far, outside_far };

inline std::string_view to_string(Region r) {
    switch (r) {
    case Region::near_interface: return "near_interface";
    case Region::inside_far: return "inside_far";
    case Region::outside_far: return "outside_far";
    }
    return "";
}

inline Region classify_region(const LimitInterface& iface, double t, Point x, double radius) {
    if (!(radius > 0.0)) fail(ErrorCode::domain, "classify_region: radius must be positive");
    const double d = iface.tilde_distance(t, x);
    if (d <= -radius) return Region::inside_far;
    if (d >= radius) return Region::outside_far;
    return Region::near_interface;
}

} // namespace frontlab
