#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "frontlab/geometry.hpp"

using namespace frontlab;

namespace {

ConvexPolygon square(double h) { return {{{-h, -h}, {h, -h}, {h, h}, {-h, h}}}; }

} // namespace

TEST(SignedDistance, Examples) {
    EXPECT_DOUBLE_EQ(signed_distance(Interval{1.0}, {1.5, 0.0}), 0.5);
    EXPECT_DOUBLE_EQ(signed_distance(Interval{1.0}, {-0.25, 0.0}), -0.75);
    EXPECT_DOUBLE_EQ(signed_distance(Disk{1.0}, {0.0, 0.0}), -1.0);
    EXPECT_DOUBLE_EQ(signed_distance(Disk{1.0}, {3.0, 4.0}), 4.0);
}

TEST(SignedDistance, Polygon) {
    const ConvexShape sq = square(1.0);
    EXPECT_NEAR(signed_distance(sq, {0.0, 0.0}), -1.0, 1e-15);
    EXPECT_NEAR(signed_distance(sq, {0.5, 0.2}), -0.5, 1e-15);
    EXPECT_NEAR(signed_distance(sq, {3.0, 0.0}), 2.0, 1e-15);
    EXPECT_NEAR(signed_distance(sq, {4.0, 5.0}), 5.0, 1e-14); // corner (1,1)
    const auto j = distance_jet(sq, {4.0, 5.0});
    EXPECT_NEAR(j.gradient.x, 0.6, 1e-14);
    EXPECT_NEAR(j.gradient.y, 0.8, 1e-14);
    EXPECT_NEAR(j.laplacian, 0.2, 1e-14);
    EXPECT_EQ(distance_jet(sq, {3.0, 0.2}).laplacian, 0.0);
}

TEST(SignedDistance, IsOneLipschitzAndMatchesGradient) {
    const std::vector<ConvexShape> shapes{Interval{1.0}, Disk{0.7},
                                          ConvexPolygon{{{0, -1}, {1.5, 0}, {0.2, 1.2}, {-1, 0.1}}}};
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> u(-3.0, 3.0);
    for (const auto& s : shapes) {
        for (int i = 0; i < 500; ++i) {
            const Point a{u(rng), u(rng)}, b{u(rng), u(rng)};
            const double da = signed_distance(s, a), db = signed_distance(s, b);
            EXPECT_LE(std::abs(da - db), norm({a.x - b.x, a.y - b.y}) + 1e-12);
            const auto j = distance_jet(s, a);
            EXPECT_NEAR(norm(j.gradient), 1.0, 1e-12);
            if (native_dimension(s) == 2) {
                const double h = 1e-6;
                const double gx = (signed_distance(s, {a.x + h, a.y}) - signed_distance(s, {a.x - h, a.y})) / (2 * h);
                const double gy = (signed_distance(s, {a.x, a.y + h}) - signed_distance(s, {a.x, a.y - h})) / (2 * h);
                // Skip points within h of the medial axis where the gradient jumps.
                if (std::abs(norm({gx, gy}) - 1.0) < 1e-4) {
                    EXPECT_NEAR(gx, j.gradient.x, 1e-4);
                    EXPECT_NEAR(gy, j.gradient.y, 1e-4);
                }
            }
        }
    }
}

TEST(Shapes, Validation) {
    EXPECT_THROW(validate_shape(Interval{0.0}), Error);
    EXPECT_THROW(validate_shape(Disk{-1.0}), Error);
    EXPECT_THROW(validate_shape(ConvexPolygon{{{0, 0}, {1, 0}}}), Error);
    // Clockwise order.
    EXPECT_THROW(validate_shape(ConvexPolygon{{{-1, -1}, {-1, 1}, {1, 1}, {1, -1}}}), Error);
    // Collinear vertex: not strictly convex.
    EXPECT_THROW(validate_shape(ConvexPolygon{{{-1, -1}, {0, -1}, {1, -1}, {1, 1}, {-1, 1}}}), Error);
    EXPECT_NO_THROW(validate_shape(square(1.0)));
}

TEST(Shapes, Inradius) {
    EXPECT_DOUBLE_EQ(inradius(Interval{1.5}), 1.5);
    EXPECT_DOUBLE_EQ(inradius(Disk{0.4}), 0.4);
    EXPECT_NEAR(inradius(square(1.0)), 1.0, 1e-9);
    // Right triangle with legs 3, 4: inradius (3 + 4 - 5)/2 = 1.
    EXPECT_NEAR(inradius(ConvexPolygon{{{0, 0}, {4, 0}, {0, 3}}}), 1.0, 1e-9);
}

TEST(Cutoff, Examples) {
    const CutoffSpec spec{0.5};
    EXPECT_DOUBLE_EQ(cutoff(0.3, spec).value, 0.3);
    EXPECT_DOUBLE_EQ(cutoff(2.0, spec).value, 1.0);
    EXPECT_DOUBLE_EQ(cutoff(-2.0, spec).value, -1.0);
    const auto mid = cutoff(1.0, spec);
    EXPECT_GT(mid.value, 0.5);
    EXPECT_LT(mid.value, 1.0);
    EXPECT_GT(mid.d1, 0.0);
    EXPECT_LT(mid.d1, 1.0);
}

TEST(Cutoff, InvariantsAndSmoothness) {
    const CutoffSpec spec{0.3};
    double max_curv = 0.0;
    for (int i = 0; i <= 4000; ++i) {
        const double s = -1.2 + 2.4 * i / 4000.0;
        const auto z = cutoff(s, spec);
        EXPECT_GE(z.d1, 0.0);
        EXPECT_LE(z.d1, 1.0);
        EXPECT_NEAR(cutoff(-s, spec).value, -z.value, 1e-15);
        const double h = 1e-6;
        EXPECT_NEAR((cutoff(s + h, spec).value - cutoff(s - h, spec).value) / (2 * h), z.d1, 1e-6);
        max_curv = std::max(max_curv, std::abs(z.d2));
    }
    EXPECT_NEAR(max_curv, cutoff_max_curvature(spec), 1e-3);
    for (double seam : {0.3, 0.9, -0.3, -0.9}) {
        const auto a = cutoff(seam - 1e-10, spec), b = cutoff(seam + 1e-10, spec);
        EXPECT_NEAR(a.value, b.value, 1e-9);
        EXPECT_NEAR(a.d1, b.d1, 1e-8);
        EXPECT_NEAR(a.d2, b.d2, 1e-8);
    }
}

TEST(CutoffDistance, MovingDisk) {
    const LimitInterface iface{Disk{1.0}, 2.5};
    const CutoffSpec spec{0.25};
    const auto cd = cutoff_distance(iface, spec, 0.2, {1.6, 0.0});
    EXPECT_NEAR(cd.d, 0.1, 1e-14);
    EXPECT_NEAR(cd.grad_norm, 1.0, 1e-14);
    EXPECT_NEAR(cd.dt, -2.5, 1e-14);
    EXPECT_NEAR(cd.laplacian, 1.0 / 1.6, 1e-14);
    const auto far = cutoff_distance(iface, spec, 0.2, {1.5 + 3 * 0.25 + 0.01, 0.0});
    EXPECT_DOUBLE_EQ(far.d, 0.5);
    EXPECT_DOUBLE_EQ(far.dt, 0.0);
    EXPECT_DOUBLE_EQ(far.laplacian, 0.0);
}

TEST(CutoffDistance, TransportBoundOnSamples) {
    const std::vector<ConvexShape> shapes{Interval{1.0}, Disk{1.0}, square(1.0)};
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> ut(0.0, 1.0), ux(-4.0, 4.0);
    for (const auto& s : shapes) {
        const LimitInterface iface{s, 2.5};
        const CutoffSpec spec = default_cutoff(s);
        const double A = transport_constant(iface, spec);
        for (int i = 0; i < 1000; ++i) {
            const double t = ut(rng);
            const Point x{ux(rng), native_dimension(s) == 1 ? 0.0 : ux(rng)};
            const auto cd = cutoff_distance(iface, spec, t, x);
            EXPECT_LE(std::abs(cd.dt + iface.speed), A * std::abs(cd.d) + 1e-12);
            if (std::abs(cd.d) < spec.d0) {
                EXPECT_NEAR(cd.grad_norm, 1.0, 1e-12);
                EXPECT_NEAR(cd.dt, -iface.speed, 1e-12);
            }
        }
    }
}

TEST(CutoffDistance, DerivativeBound) {
    // Smooth boundaries only: near a polygon vertex the outer Laplacian 1/dist is unbounded.
    const std::vector<ConvexShape> shapes{Interval{1.0}, Disk{1.0}};
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> ut(0.0, 1.0), ux(-4.0, 4.0);
    for (const auto& s : shapes) {
        const LimitInterface iface{s, 2.5};
        const CutoffSpec spec = default_cutoff(s);
        const double C = distance_derivative_bound(s, spec);
        for (int i = 0; i < 2000; ++i) {
            const Point x{ux(rng), native_dimension(s) == 1 ? 0.0 : ux(rng)};
            if (norm(x) < 1e-3) continue;
            const auto cd = cutoff_distance(iface, spec, ut(rng), x);
            EXPECT_LE(cd.grad_norm + std::abs(cd.laplacian), C + 1e-12);
        }
    }
    EXPECT_THROW(distance_derivative_bound(Disk{1.0}, CutoffSpec{0.4}), Error);
}

TEST(Regions, Classification) {
    const LimitInterface iface{Disk{1.0}, 2.5};
    EXPECT_EQ(classify_region(iface, 0.0, {1.05, 0.0}, 0.1), Region::near_interface);
    EXPECT_EQ(classify_region(iface, 0.0, {0.0, 0.0}, 0.1), Region::inside_far);
    EXPECT_EQ(classify_region(iface, 0.0, {5.0, 0.0}, 0.1), Region::outside_far);
    // The interface has moved to radius 2 by t = 0.4.
    EXPECT_EQ(classify_region(iface, 0.4, {2.0, 0.0}, 0.1), Region::near_interface);
    EXPECT_EQ(classify_region(iface, 0.4, {1.5, 0.0}, 0.1), Region::inside_far);
    EXPECT_THROW(classify_region(iface, 0.0, {0.0, 0.0}, 0.0), Error);
    EXPECT_EQ(to_string(Region::outside_far), "outside_far");
}

TEST(LimitInterface, ParallelBodyMotion) {
    const LimitInterface iface{square(1.0), 2.0};
    // Boundary point on the offset square and on the rounded corner at t = 0.5.
    EXPECT_NEAR(iface.tilde_distance(0.5, {2.0, 0.3}), 0.0, 1e-14);
    EXPECT_NEAR(iface.tilde_distance(0.5, {1.0 + std::sqrt(0.5), 1.0 + std::sqrt(0.5)}), 0.0, 1e-14);
}
