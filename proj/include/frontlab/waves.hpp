#pragma once

// Travelling waves U'' + cU' + U(1-U) = 0, U(-inf)=1, U(+inf)=0, for c > 2.
//
// The profile is obtained by shooting along the one-dimensional unstable
// manifold of the saddle U=1 and integrating forward with a fixed RK4 step.
// Left of U=1/2 the complement 1-U is integrated directly so the backward
// tail keeps full relative precision.

#include <algorithm>
#include <array>
#include <cmath>
#include <iomanip>
#include <istream>
#include <limits>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "frontlab/error.hpp"

namespace frontlab {

struct DecayExponents {
    double eta; // backward rate: 1-U ~ e^{eta z} as z -> -inf
    double mu;  // forward rate:  U ~ e^{-mu z} as z -> +inf
};

inline DecayExponents decay_exponents(double c) {
    if (!(c > 2.0)) fail(ErrorCode::domain, "decay_exponents: wave speed must exceed 2");
    return {0.5 * (-c + std::sqrt(c * c + 4.0)), 0.5 * (c - std::sqrt(c * c - 4.0))};
}

/// Asymptotic speed selected by an initial tail e^{-lambda |d|/eps}.
inline double selected_speed(double lambda) {
    return lambda < 1.0 ? lambda + 1.0 / lambda : 2.0;
}

struct ProfilePoint {
    double u;
    double du;
    double d2u;
    double complement; // 1 - u, accurate in the backward tail
};

struct EnvelopeConstants {
    double r;
    double R;
};

class WaveProfile {
public:
    static constexpr double normalization = 0.75;

    WaveProfile() = default;

    double speed() const { return speed_; }
    double eta() const { return eta_; }
    double mu() const { return mu_; }
    double r_fit() const { return envelope_.r; }
    double R_fit() const { return envelope_.R; }
    double z_min() const { return z_first_; }
    double z_max() const { return z_first_ + step_ * (size() - 1); }
    double step() const { return step_; }
    std::size_t size() const { return u_.size(); }

    double z(std::size_t i) const { return z_first_ + step_ * static_cast<double>(i); }
    double u(std::size_t i) const { return u_[i]; }
    double du(std::size_t i) const { return du_[i]; }
    double complement(std::size_t i) const { return om_[i]; }

    /// Cubic Hermite interpolation on the table, analytic exponential tails outside.
    ProfilePoint eval(double zq) const {
        const double c = speed_;
        if (zq <= z_first_) {
            const double amp = om_.front() * std::exp(-eta_ * z_first_);
            const double om = amp * std::exp(eta_ * zq);
            const double du = -eta_ * om;
            const double u = 1.0 - om;
            return {u, du, -c * du - u * om, om};
        }
        const double zl = z_max();
        if (zq >= zl) {
            const double amp = u_.back() * std::exp(mu_ * zl);
            const double u = amp * std::exp(-mu_ * zq);
            const double du = -mu_ * u;
            return {u, du, -c * du - u * (1.0 - u), 1.0 - u};
        }
        const double pos = (zq - z_first_) / step_;
        auto i = static_cast<std::size_t>(pos);
        if (i + 1 >= size()) i = size() - 2;
        const double t = pos - static_cast<double>(i);
        const double h = step_;
        const double h00 = (1 + 2 * t) * (1 - t) * (1 - t), h10 = t * (1 - t) * (1 - t);
        const double h01 = t * t * (3 - 2 * t), h11 = t * t * (t - 1);
        const double d00 = 6 * t * (t - 1) / h, d10 = (1 - t) * (1 - 3 * t);
        const double d01 = -6 * t * (t - 1) / h, d11 = t * (3 * t - 2);
        const double u =
            h00 * u_[i] + h10 * h * du_[i] + h01 * u_[i + 1] + h11 * h * du_[i + 1];
        const double om =
            h00 * om_[i] - h10 * h * du_[i] + h01 * om_[i + 1] - h11 * h * du_[i + 1];
        // Near U = 1 the stored U carries no digits of the slope; difference the complement there.
        const double du = u_[i] > 0.5
                              ? -(d00 * om_[i] + d01 * om_[i + 1]) + d10 * du_[i] + d11 * du_[i + 1]
                              : d00 * u_[i] + d10 * du_[i] + d01 * u_[i + 1] + d11 * du_[i + 1];
        return {u, du, -c * du - u * om, om};
    }

    /// Max |U'' + cU' + U(1-U)| on interior samples, U'' from a fourth-order
    /// difference of the stored U'.
    double ode_residual() const {
        double worst = 0.0;
        for (std::size_t i = 2; i + 2 < size(); ++i) {
            const double d2 =
                (-du_[i + 2] + 8.0 * du_[i + 1] - 8.0 * du_[i - 1] + du_[i - 2]) / (12.0 * step_);
            worst = std::max(worst, std::abs(d2 + speed_ * du_[i] + u_[i] * om_[i]));
        }
        return worst;
    }

    /// Abscissa of the level `a`, by bisection on the interpolant.
    double level_abscissa(double a) const {
        if (!(a > 0.0 && a < 1.0)) fail(ErrorCode::domain, "level_abscissa: level must lie in (0,1)");
        double lo = z_min(), hi = z_max();
        if (eval(lo).u < a || eval(hi).u > a)
            fail(ErrorCode::domain, "level_abscissa: level outside the sampled range");
        for (int it = 0; it < 200 && hi - lo > 1e-13; ++it) {
            const double mid = 0.5 * (lo + hi);
            (eval(mid).u > a ? lo : hi) = mid;
        }
        return 0.5 * (lo + hi);
    }

    void write_cache(std::ostream& out) const;
    static WaveProfile read_cache(std::istream& in);

private:
    friend WaveProfile compute_profile(double, std::optional<std::pair<double, double>>);
    friend EnvelopeConstants envelope_constants(const WaveProfile&);

    double speed_ = 0, eta_ = 0, mu_ = 0;
    double z_first_ = 0, step_ = 0;
    std::vector<double> u_, du_, om_;
    EnvelopeConstants envelope_{0, 0};
};

/// Tightest sampled constants with r e^{-rate|z|} <= tail <= R e^{-rate|z|}
/// for both U-tails and for |U'|+|U''|.
inline EnvelopeConstants envelope_constants(const WaveProfile& p) {
    double r = std::numeric_limits<double>::infinity();
    double R = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) {
        const double zi = p.z(i);
        const double d1 = std::abs(p.du_[i]);
        const double d2 = std::abs(-p.speed_ * p.du_[i] - p.u_[i] * p.om_[i]);
        std::array<double, 2> ratios{};
        if (zi <= 0.0) {
            const double w = std::exp(-p.eta_ * zi);
            ratios = {p.om_[i] * w, (d1 + d2) * w};
        } else {
            const double w = std::exp(p.mu_ * zi);
            ratios = {p.u_[i] * w, (d1 + d2) * w};
        }
        for (double q : ratios) {
            r = std::min(r, q);
            R = std::max(R, q);
        }
    }
    if (!std::isfinite(R) || !(r > 0.0))
        fail(ErrorCode::construction, "envelope_constants: no finite envelope fits the profile");
    return {r, R};
}

namespace detail {

struct WaveState {
    double y;  // complement 1-U in the tail phase, U afterwards
    double dy;
};

// v'' = -c v' + v(1-v) for v = 1-U; U'' = -c U' - U(1-U).
inline WaveState wave_rhs(const WaveState& s, double c, bool complement) {
    const double react = s.y * (1.0 - s.y);
    return {s.dy, complement ? -c * s.dy + react : -c * s.dy - react};
}

inline WaveState rk4(const WaveState& s, double h, double c, bool complement) {
    auto add = [](const WaveState& a, const WaveState& k, double f) {
        return WaveState{a.y + f * k.y, a.dy + f * k.dy};
    };
    const WaveState k1 = wave_rhs(s, c, complement);
    const WaveState k2 = wave_rhs(add(s, k1, 0.5 * h), c, complement);
    const WaveState k3 = wave_rhs(add(s, k2, 0.5 * h), c, complement);
    const WaveState k4 = wave_rhs(add(s, k3, h), c, complement);
    return {s.y + h / 6.0 * (k1.y + 2 * k2.y + 2 * k3.y + k4.y),
            s.dy + h / 6.0 * (k1.dy + 2 * k2.dy + 2 * k3.dy + k4.dy)};
}

// Point on the unstable manifold of U=1 with leading amplitude a:
// 1-U = a e^{eta z} - a^2 e^{2 eta z}/(2 eta^2 + 1) + O(a^3).
inline WaveState manifold_start(double a, double eta) {
    const double b = -a * a / (2.0 * eta * eta + 1.0);
    return {a + b, eta * a + 2.0 * eta * b};
}

struct ShotSample {
    double u, du, om;
};

// Integrates n steps of size h from the manifold start with amplitude a,
// calling sink(i, sample) for i = 0..n. Stops early when sink returns false.
template <class Sink>
void shoot(double c, double eta, double a, double h, std::size_t n, Sink&& sink) {
    WaveState s = manifold_start(a, eta);
    bool complement = true;
    for (std::size_t i = 0;; ++i) {
        const ShotSample smp = complement ? ShotSample{1.0 - s.y, -s.dy, s.y}
                                          : ShotSample{s.y, s.dy, 1.0 - s.y};
        if (!sink(i, smp) || i == n) return;
        if (complement && s.y >= 0.5) {
            s = {1.0 - s.y, -s.dy};
            complement = false;
        }
        s = rk4(s, h, c, complement);
    }
}

} // namespace detail

inline WaveProfile compute_profile(double c,
                                   std::optional<std::pair<double, double>> z_range = std::nullopt) {
    const auto [eta, mu] = decay_exponents(c);
    const double zmin = z_range ? z_range->first : -30.0 / eta;
    const double zmax = z_range ? z_range->second : 120.0 / mu;
    const double reach = 10.0 / std::min(eta, mu);
    if (!(zmin < 0.0 && zmax > 0.0) || -zmin < reach || zmax < reach)
        fail(ErrorCode::domain, "compute_profile: z range must contain [-10/min(eta,mu), 10/min(eta,mu)]");
    const double h = 1e-3 / std::max(eta, mu);

    // Pass 1: locate the 3/4 crossing for a reference amplitude.
    constexpr double a_ref = 1e-8;
    double z_cross = std::numeric_limits<double>::quiet_NaN();
    {
        double prev_u = 1.0, prev_du = 0.0;
        const std::size_t limit = static_cast<std::size_t>(200.0 / (eta * h));
        detail::shoot(c, eta, a_ref, h, limit, [&](std::size_t i, const detail::ShotSample& s) {
            if (i > 0 && s.u <= WaveProfile::normalization) {
                // Hermite-consistent linear refinement is enough for the amplitude estimate.
                const double t = (prev_u - WaveProfile::normalization) / (prev_u - s.u);
                z_cross = h * (static_cast<double>(i - 1) + t);
                return false;
            }
            prev_u = s.u;
            prev_du = s.du;
            return true;
        });
        (void)prev_du;
    }
    if (!std::isfinite(z_cross)) fail(ErrorCode::shooting, "compute_profile: no 3/4 crossing found");
    // In coordinates centred on the crossing: 1-U ~ A e^{eta z}.
    const double amp = a_ref * std::exp(eta * z_cross);

    // Pass 2: integrate the shifted trajectory across the requested range.
    const auto n = static_cast<std::size_t>(std::ceil((zmax - zmin) / h));
    WaveProfile p;
    p.speed_ = c;
    p.eta_ = eta;
    p.mu_ = mu;
    p.step_ = h;
    p.u_.reserve(n + 1);
    p.du_.reserve(n + 1);
    p.om_.reserve(n + 1);
    bool broken = false;
    detail::shoot(c, eta, amp * std::exp(eta * zmin), h, n,
                  [&](std::size_t i, const detail::ShotSample& s) {
                      if (i > 0 && (!(s.du < 0.0) || !(s.u > 0.0) || !(s.om > 0.0))) {
                          broken = true;
                          return false;
                      }
                      p.u_.push_back(s.u);
                      p.du_.push_back(s.du);
                      p.om_.push_back(s.om);
                      return true;
                  });
    if (broken || p.u_.size() != n + 1)
        fail(ErrorCode::shooting,
             "compute_profile: trajectory is not a monotone connection (speed too low or range too long)");

    // Re-centre exactly on U(0) = 3/4.
    p.z_first_ = zmin;
    std::size_t j = 0;
    while (j + 1 < p.size() && p.u_[j + 1] > WaveProfile::normalization) ++j;
    double lo = p.z(j), hi = p.z(j + 1);
    for (int it = 0; it < 200 && hi - lo > 1e-15; ++it) {
        const double mid = 0.5 * (lo + hi);
        (p.eval(mid).u > WaveProfile::normalization ? lo : hi) = mid;
    }
    p.z_first_ -= 0.5 * (lo + hi);

    if (p.u_.front() >= 1.0 || p.u_.front() <= 1.0 - 1e-6 || p.u_.back() >= 1e-6)
        fail(ErrorCode::shooting, "compute_profile: range too short to reach the asymptotic states");
    p.envelope_ = envelope_constants(p);
    return p;
}

inline void WaveProfile::write_cache(std::ostream& out) const {
    out << std::setprecision(17);
    out << "# c=" << speed_ << " eta=" << eta_ << " mu=" << mu_ << " r_fit=" << envelope_.r
        << " R_fit=" << envelope_.R << " z_first=" << z_first_ << " step=" << step_ << "\n";
    out << "z,U,Uprime\n";
    for (std::size_t i = 0; i < size(); ++i) out << z(i) << ',' << u_[i] << ',' << du_[i] << '\n';
}

inline WaveProfile WaveProfile::read_cache(std::istream& in) {
    WaveProfile p;
    std::string header;
    if (!std::getline(in, header) || header.rfind("# ", 0) != 0)
        fail(ErrorCode::io, "profile cache: missing header line");
    std::istringstream hs(header.substr(2));
    std::string kv;
    int seen = 0;
    while (hs >> kv) {
        const auto eq = kv.find('=');
        if (eq == std::string::npos) continue;
        const std::string key = kv.substr(0, eq);
        const double val = std::stod(kv.substr(eq + 1));
        if (key == "c") p.speed_ = val, ++seen;
        else if (key == "eta") p.eta_ = val, ++seen;
        else if (key == "mu") p.mu_ = val, ++seen;
        else if (key == "r_fit") p.envelope_.r = val, ++seen;
        else if (key == "R_fit") p.envelope_.R = val, ++seen;
        else if (key == "z_first") p.z_first_ = val, ++seen;
        else if (key == "step") p.step_ = val, ++seen;
    }
    std::string columns;
    if (seen != 7 || !std::getline(in, columns) || columns != "z,U,Uprime")
        fail(ErrorCode::io, "profile cache: malformed header");
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const auto c1 = line.find(',');
        const auto c2 = line.find(',', c1 + 1);
        if (c1 == std::string::npos || c2 == std::string::npos)
            fail(ErrorCode::io, "profile cache: malformed row");
        const double u = std::stod(line.substr(c1 + 1, c2 - c1 - 1));
        p.u_.push_back(u);
        p.du_.push_back(std::stod(line.substr(c2 + 1)));
        p.om_.push_back(1.0 - u);
    }
    if (p.size() < 4) fail(ErrorCode::io, "profile cache: too few rows");
    return p;
}

} // namespace frontlab
