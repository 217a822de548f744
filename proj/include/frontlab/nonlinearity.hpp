#pragma once

// Reaction terms and the generation semiflow.
//
//   logistic   f(u)   = u(1-u)
//   modified   fbar   = u(1-u) on u >= 0, u(1-u) - 2u^3 on u < 0 (zeros -1, 0, 1)
//   perturbed  fbar_e = psi(u) (u - e|ln e|)/|ln e| + (1 - psi(u)) fbar(u)
//
// psi is a C2 window equal to 1 on [0, delta0/2] and 0 outside (-e, delta0),
// joined by quintic smoothsteps. delta0 = max(1/4, 2.1 e|ln e|) keeps the
// zero e|ln e| of the linear branch on the plateau. The construction is
// checked against fbar_e <= fbar on the working range whenever it is built.

#include <algorithm>
#include <cmath>
#include <limits>
#include <span>
#include <vector>

#include "frontlab/error.hpp"
#include "frontlab/ode.hpp"

namespace frontlab {

enum class ReactionVariant { logistic, modified, perturbed };

struct ReactionKind {
    ReactionVariant variant = ReactionVariant::logistic;
    double epsilon = 0.0; // only meaningful for `perturbed`

    static ReactionKind logistic() { return {ReactionVariant::logistic, 0.0}; }
    static ReactionKind modified() { return {ReactionVariant::modified, 0.0}; }
    static ReactionKind perturbed(double eps) {
        if (!(eps > 0.0 && eps < 1.0))
            fail(ErrorCode::domain, "perturbed reaction requires 0 < epsilon < 1");
        return {ReactionVariant::perturbed, eps};
    }
};

/// Value and first two derivatives of a scalar function.
struct Jet {
    double value;
    double d1;
    double d2;
};

namespace detail {

inline Jet smoothstep5(double t) {
    if (t <= 0.0) return {0.0, 0.0, 0.0};
    if (t >= 1.0) return {1.0, 0.0, 0.0};
    const double t2 = t * t, t3 = t2 * t;
    return {t3 * (10.0 + t * (-15.0 + 6.0 * t)), 30.0 * t2 * (1.0 - t) * (1.0 - t),
            60.0 * t * (1.0 - t) * (1.0 - 2.0 * t)};
}

inline Jet logistic_jet(double u) { return {u * (1.0 - u), 1.0 - 2.0 * u, -2.0}; }

inline Jet modified_jet(double u) {
    if (u >= 0.0) return logistic_jet(u);
    return {u * (1.0 - u) - 2.0 * u * u * u, 1.0 - 2.0 * u - 6.0 * u * u, -2.0 - 12.0 * u};
}

} // namespace detail

/// Outer edge of the psi plateau for the perturbed reaction.
inline double cutoff_width(double eps) {
    const double l = eps * std::abs(std::log(eps));
    return std::max(0.25, 2.1 * l);
}

/// The cutoff psi of the perturbed reaction, with derivatives.
inline Jet reaction_cutoff(double u, double eps) {
    const double delta0 = cutoff_width(eps);
    if (u <= -eps || u >= delta0) return {0.0, 0.0, 0.0};
    if (u < 0.0) {
        const Jet s = detail::smoothstep5((u + eps) / eps);
        return {s.value, s.d1 / eps, s.d2 / (eps * eps)};
    }
    const double half = 0.5 * delta0;
    if (u <= half) return {1.0, 0.0, 0.0};
    const Jet s = detail::smoothstep5((u - half) / half);
    return {1.0 - s.value, -s.d1 / half, -s.d2 / (half * half)};
}

inline Jet reaction_jet(const ReactionKind& kind, double u) {
    switch (kind.variant) {
    case ReactionVariant::logistic: return detail::logistic_jet(u);
    case ReactionVariant::modified: return detail::modified_jet(u);
    case ReactionVariant::perturbed: break;
    }
    const double eps = kind.epsilon;
    const double lne = std::abs(std::log(eps));
    const Jet fbar = detail::modified_jet(u);
    const Jet psi = reaction_cutoff(u, eps);
    if (psi.value == 0.0 && psi.d1 == 0.0 && psi.d2 == 0.0) return fbar;
    const double lin = (u - eps * lne) / lne;
    const double lin1 = 1.0 / lne;
    const double gap = lin - fbar.value;
    return {fbar.value + psi.value * gap,
            fbar.d1 + psi.d1 * gap + psi.value * (lin1 - fbar.d1),
            (1.0 - psi.value) * fbar.d2 + psi.d2 * gap + 2.0 * psi.d1 * (lin1 - fbar.d1)};
}

inline double reaction(const ReactionKind& kind, double u) { return reaction_jet(kind, u).value; }

/// Maximum of fbar_e - fbar over `samples` uniform points of [-bound, bound].
/// Non-positive when the perturbed reaction lies below the modified one.
inline double perturbation_excess(double eps, double bound, int samples = 10'000) {
    const auto pk = ReactionKind::perturbed(eps);
    const auto mk = ReactionKind::modified();
    double worst = -std::numeric_limits<double>::infinity();
    for (int i = 0; i < samples; ++i) {
        const double u = -bound + 2.0 * bound * i / (samples - 1);
        worst = std::max(worst, reaction(pk, u) - reaction(mk, u));
    }
    // The psi transition zones are narrow; sample them densely as well.
    const double delta0 = cutoff_width(eps);
    for (int i = 0; i <= 2000; ++i) {
        for (double u : {-eps + eps * i / 2000.0, 0.5 * delta0 * (1.0 + i / 2000.0)})
            worst = std::max(worst, reaction(pk, u) - reaction(mk, u));
    }
    return worst;
}

/// Builds the perturbed reaction and fails loudly if it is not dominated by
/// the modified reaction on [-bound, bound].
inline ReactionKind make_perturbed_reaction(double eps, double bound) {
    const auto kind = ReactionKind::perturbed(eps);
    const double excess = perturbation_excess(eps, bound);
    if (excess > 1e-12)
        fail(ErrorCode::construction,
             "perturbed reaction exceeds modified reaction by " + std::to_string(excess) +
                 " at epsilon=" + std::to_string(eps));
    return kind;
}

struct SemiflowResult {
    double value;       // w(s, xi)
    double sensitivity; // w_xi(s, xi)
    double curvature;   // w_xixi(s, xi)

    double curvature_ratio() const { return curvature / sensitivity; }
};

/// Solves dw/ds = f(w), w(0)=xi together with its first and second
/// variational equations.
template <class Observer>
SemiflowResult semiflow(double s, double xi, const ReactionKind& kind, const ode::Tolerance& tol,
                        Observer&& observer) {
    if (!(s >= 0.0)) fail(ErrorCode::domain, "semiflow: s must be non-negative");
    auto rhs = [&kind](double, const ode::State<3>& y) -> ode::State<3> {
        const Jet f = reaction_jet(kind, y[0]);
        return {f.value, f.d1 * y[1], f.d2 * y[1] * y[1] + f.d1 * y[2]};
    };
    const auto y = ode::integrate<3>(rhs, ode::State<3>{xi, 1.0, 0.0}, 0.0, s, tol, observer);
    return {y[0], y[1], y[2]};
}

inline SemiflowResult semiflow(double s, double xi, const ReactionKind& kind,
                               const ode::Tolerance& tol = {}) {
    return semiflow(s, xi, kind, tol, [](double, const ode::State<3>&) {});
}

inline SemiflowResult semiflow(double s, double xi, double eps, const ode::Tolerance& tol = {}) {
    return semiflow(s, xi, ReactionKind::perturbed(eps), tol);
}

/// Closed-form exit time from (0, e|ln e|) under the linear branch.
inline double positivity_time(double xi, double eps) {
    const double l = eps * std::abs(std::log(eps));
    if (!(xi > 0.0 && xi < l))
        fail(ErrorCode::domain, "positivity_time: xi must lie in (0, eps|ln eps|)");
    return std::abs(std::log(eps)) * std::abs(std::log1p(-xi / l));
}

struct GenerationCalibration {
    double alpha;    // smallest admissible generation constant (5% bisection)
    double c_a;      // sampled sup of eps*|w_xixi/w_xi| over s <= alpha|ln eps|
};

namespace detail {

inline bool generation_holds(double eps, double alpha, double xi_upper, const ode::Tolerance& tol) {
    const auto kind = ReactionKind::perturbed(eps);
    const double lne = std::abs(std::log(eps));
    const double s = alpha * lne;
    const double l = eps * lne;
    const double w_low = semiflow(s, l, kind, tol).value;
    const double w_mid = semiflow(s, 3.0 * l, kind, tol).value;
    const double w_top = semiflow(s, xi_upper, kind, tol).value;
    return w_low > 0.0 && w_low <= 1.0 + eps && w_mid >= 1.0 - eps && w_mid <= 1.0 + eps &&
           w_top <= 1.0 + eps && w_top >= 1.0 - eps;
}

inline std::vector<double> curvature_sample_points(double eps, double bound) {
    const double l = eps * std::abs(std::log(eps));
    std::vector<double> xs;
    for (int i = 0; i <= 200; ++i) xs.push_back(-bound + 2.0 * bound * i / 200.0);
    // Fan out geometrically around the unstable zero e|ln e| and around 0,
    // where |w_xixi/w_xi| is largest.
    for (int i = 0; i <= 60; ++i) {
        const double off = l * std::pow(10.0, -6.0 + 6.0 * i / 60.0);
        for (double x : {l + off, l - off, off, -off}) xs.push_back(x);
    }
    std::vector<double> kept;
    for (double x : xs)
        if (x >= -bound && x <= bound) kept.push_back(x);
    std::sort(kept.begin(), kept.end());
    kept.erase(std::unique(kept.begin(), kept.end()), kept.end());
    return kept;
}

} // namespace detail

/// Sampled estimate of sup eps*|w_xixi/w_xi| over s in (0, a|ln eps|].
inline double curvature_bound(double eps, double a, double bound, const ode::Tolerance& tol = {}) {
    const auto kind = ReactionKind::perturbed(eps);
    const double s_max = a * std::abs(std::log(eps));
    double worst = 0.0;
    for (double xi : detail::curvature_sample_points(eps, bound)) {
        semiflow(s_max, xi, kind, tol, [&](double, const ode::State<3>& y) {
            worst = std::max(worst, eps * std::abs(y[2] / y[1]));
        });
    }
    return worst;
}

/// Smallest alpha (within 5%) such that, for every listed eps, the semiflow
/// started at eps|ln eps|, 3 eps|ln eps| and xi_upper has entered the band
/// [1-eps, 1+eps] (respectively stayed in (0, 1+eps]) by s = alpha|ln eps|.
inline GenerationCalibration calibrate_generation(std::span<const double> eps_list,
                                                  double xi_upper,
                                                  const ode::Tolerance& tol = {}) {
    if (eps_list.empty()) fail(ErrorCode::domain, "calibrate_generation: empty epsilon list");
    for (double eps : eps_list)
        if (!(eps > 0.0 && eps < 0.2))
            fail(ErrorCode::domain, "calibrate_generation: every epsilon must lie in (0, 0.2)");
    for (double eps : eps_list) make_perturbed_reaction(eps, xi_upper);

    auto holds = [&](double alpha) {
        return std::all_of(eps_list.begin(), eps_list.end(), [&](double eps) {
            return detail::generation_holds(eps, alpha, xi_upper, tol);
        });
    };
    constexpr double alpha_max = 20.0;
    if (!holds(alpha_max))
        fail(ErrorCode::construction,
             "calibrate_generation: no alpha <= 20 brings the semiflow into [1-eps, 1+eps]");
    double lo = 0.0, hi = alpha_max;
    while (hi - lo > 0.05 * hi) {
        const double mid = 0.5 * (lo + hi);
        (holds(mid) ? hi : lo) = mid;
    }
    double c_a = 0.0;
    for (double eps : eps_list) c_a = std::max(c_a, curvature_bound(eps, hi, xi_upper, tol));
    return {hi, c_a};
}

} // namespace frontlab
