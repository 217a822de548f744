#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <string>

#include "frontlab/error.hpp"

namespace frontlab::ode {

struct Tolerance {
    double absolute = 1e-10;
    double relative = 1e-8;
    std::size_t max_steps = 1'000'000;
};

template <std::size_t N>
using State = std::array<double, N>;

/// Dormand-Prince 5(4) embedded pair with FSAL and a standard PI-free
/// step controller. `observer(s, y)` is called after every accepted step.
template <std::size_t N, class Rhs, class Observer>
State<N> integrate(Rhs&& rhs, State<N> y, double s0, double s1, const Tolerance& tol,
                   Observer&& observer) {
    if (s1 < s0) fail(ErrorCode::domain, "integrate: end point precedes start point");
    if (s1 == s0) return y;

    static constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
    static constexpr double a21 = 1.0 / 5;
    static constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
    static constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
    static constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                            a54 = -212.0 / 729;
    static constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247,
                            a64 = 49.0 / 176, a65 = -5103.0 / 18656;
    static constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192,
                            b5 = -2187.0 / 6784, b6 = 11.0 / 84;
    // Differences between the 5th and embedded 4th order weights.
    static constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920,
                            e5 = -17253.0 / 339200, e6 = 22.0 / 525, e7 = -1.0 / 40;

    auto axpy = [](const State<N>& base, std::initializer_list<std::pair<double, const State<N>*>> terms,
                   double h) {
        State<N> out = base;
        for (const auto& [coef, k] : terms)
            for (std::size_t i = 0; i < N; ++i) out[i] += h * coef * (*k)[i];
        return out;
    };

    double s = s0;
    double h = std::min(s1 - s0, 1e-2);
    State<N> k1 = rhs(s, y);
    std::size_t steps = 0;
    while (s < s1) {
        if (++steps > tol.max_steps)
            fail(ErrorCode::integration, "integrate: step budget exhausted");
        if (s + h > s1) h = s1 - s;

        const State<N> k2 = rhs(s + c2 * h, axpy(y, {{a21, &k1}}, h));
        const State<N> k3 = rhs(s + c3 * h, axpy(y, {{a31, &k1}, {a32, &k2}}, h));
        const State<N> k4 = rhs(s + c4 * h, axpy(y, {{a41, &k1}, {a42, &k2}, {a43, &k3}}, h));
        const State<N> k5 =
            rhs(s + c5 * h, axpy(y, {{a51, &k1}, {a52, &k2}, {a53, &k3}, {a54, &k4}}, h));
        const State<N> k6 = rhs(
            s + h, axpy(y, {{a61, &k1}, {a62, &k2}, {a63, &k3}, {a64, &k4}, {a65, &k5}}, h));
        const State<N> y5 =
            axpy(y, {{b1, &k1}, {b3, &k3}, {b4, &k4}, {b5, &k5}, {b6, &k6}}, h);
        const State<N> k7 = rhs(s + h, y5);

        double err = 0.0;
        for (std::size_t i = 0; i < N; ++i) {
            const double ei =
                h * (e1 * k1[i] + e3 * k3[i] + e4 * k4[i] + e5 * k5[i] + e6 * k6[i] + e7 * k7[i]);
            const double scale =
                tol.absolute + tol.relative * std::max(std::abs(y[i]), std::abs(y5[i]));
            err = std::max(err, std::abs(ei) / scale);
        }
        if (!std::isfinite(err))
            fail(ErrorCode::integration, "integrate: non-finite error estimate");

        if (err <= 1.0) {
            s = (h == s1 - s) ? s1 : s + h;
            y = y5;
            k1 = k7;
            observer(s, y);
        }
        const double factor =
            err == 0.0 ? 5.0 : std::clamp(0.9 * std::pow(err, -0.2), 0.2, 5.0);
        h *= factor;
        if (h < 1e-14 * std::max(1.0, std::abs(s)))
            fail(ErrorCode::integration, "integrate: step size underflow at s=" + std::to_string(s));
    }
    return y;
}

template <std::size_t N, class Rhs>
State<N> integrate(Rhs&& rhs, State<N> y, double s0, double s1, const Tolerance& tol = {}) {
    return integrate<N>(std::forward<Rhs>(rhs), y, s0, s1, tol, [](double, const State<N>&) {});
}

} // namespace frontlab::ode
