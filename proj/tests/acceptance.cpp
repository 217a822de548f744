// Acceptance suite: one PASS/FAIL line per criterion, INFO lines for context.
// Exits non-zero when any criterion fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <iomanip>
#include <iostream>
#include <map>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "frontlab/frontlab.hpp"

using namespace frontlab;

namespace {

struct Verdict {
    std::string id;
    bool pass;
    std::string detail;
};

std::vector<Verdict> verdicts;

void report(const std::string& id, bool pass, const std::string& detail) {
    verdicts.push_back({id, pass, detail});
    std::cout << id << ' ' << (pass ? "PASS" : "FAIL") << "  " << detail << std::endl;
}

void info(const std::string& msg) { std::cout << "INFO  " << msg << std::endl; }

std::string fmt(double v, int prec = 6) {
    std::ostringstream os;
    os << std::setprecision(prec) << v;
    return os.str();
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

SimConfig line_run(double eps, double lambda) {
    SimConfig c;
    c.epsilon = eps;
    c.lambda = lambda;
    c.horizon = 1.0;
    return c;
}

bool within(double value, double target, double rel) { return std::abs(value - target) <= rel * std::abs(target); }

double log_slope(const std::vector<double>& z, const std::vector<double>& v) {
    double sz = 0, sv = 0, szz = 0, szv = 0;
    const double n = static_cast<double>(z.size());
    for (std::size_t i = 0; i < z.size(); ++i) {
        const double lv = std::log(v[i]);
        sz += z[i], sv += lv, szz += z[i] * z[i], szv += z[i] * lv;
    }
    return (n * szv - sz * sv) / (n * szz - sz * sz);
}

const std::vector<double> eps_set = {0.02, 0.01, 0.005};

} // namespace

int main() {
    std::cout << std::unitbuf;
    const auto suite_start = std::chrono::steady_clock::now();

    // Generation constant calibrated once over the whole epsilon set.
    const double xi_upper = line_run(0.01, 0.5).xi_bound();
    const auto calibration = calibrate_generation(eps_set, xi_upper);
    const double alpha = calibration.alpha;
    info("calibrated alpha=" + fmt(alpha) + " C_a=" + fmt(calibration.c_a) + " over eps={0.02,0.01,0.005}");

    MeasureOptions mopt;
    mopt.alpha = alpha;

    // lambda = 0.5 runs across epsilon; the eps = 0.01 trajectory is kept for the bound checks.
    std::map<double, ScalingRow> rows05;
    std::map<double, double> runtime05;
    Trajectory traj01;
    for (double eps : eps_set) {
        const auto t0 = std::chrono::steady_clock::now();
        Trajectory traj = simulate(line_run(eps, 0.5));
        runtime05[eps] = seconds_since(t0);
        rows05[eps] = measure(traj, mopt);
        const auto& r = rows05[eps];
        info("lambda=0.5 eps=" + fmt(eps) + " speed=" + fmt(r.fitted_speed, 10) + " stderr=" +
             fmt(r.speed_stderr, 3) + " error=" + fmt(r.speed_error_vs_c_lambda, 3) + " thickness_ratio=" +
             fmt(r.thickness_ratio) + " generation_ratio=" + fmt(r.generation_ratio) + " runtime_s=" +
             fmt(runtime05[eps], 3) + " status=" + r.status);
        if (eps == 0.01) traj01 = std::move(traj);
    }

    // AC1
    {
        const double s = rows05[0.005].fitted_speed;
        const bool speed_ok = within(s, 2.5, 0.10);
        const double e1 = std::abs(rows05[0.02].speed_error_vs_c_lambda),
                     e2 = std::abs(rows05[0.01].speed_error_vs_c_lambda),
                     e3 = std::abs(rows05[0.005].speed_error_vs_c_lambda);
        const bool monotone = e2 < e1 && e3 < e2;
        double worst_runtime = 0.0;
        for (const auto& [e, t] : runtime05) worst_runtime = std::max(worst_runtime, t);
        const bool fast = worst_runtime <= 120.0;
        report("AC1", speed_ok && monotone && fast,
               "speed(eps=0.005)=" + fmt(s, 10) + " target 2.5 +-10% [" + (speed_ok ? "ok" : "no") +
                   "]; |error| over eps 0.02,0.01,0.005 = " + fmt(e1, 3) + ", " + fmt(e2, 3) + ", " + fmt(e3, 3) +
                   " monotone decrease [" + (monotone ? "ok" : "no") + "]; max runtime " + fmt(worst_runtime, 3) +
                   "s <= 120s [" + (fast ? "ok" : "no") + "]");
    }

    // AC2
    {
        bool ok = true;
        std::string detail;
        for (double lambda : {0.3, 0.5, 0.8}) {
            double s;
            if (lambda == 0.5) {
                s = rows05[0.005].fitted_speed;
            } else {
                const auto t0 = std::chrono::steady_clock::now();
                const auto row = measure(simulate(line_run(0.005, lambda)), mopt);
                info("lambda=" + fmt(lambda) + " eps=0.005 speed=" + fmt(row.fitted_speed, 10) + " runtime_s=" +
                     fmt(seconds_since(t0), 3) + " status=" + row.status);
                s = row.fitted_speed;
            }
            const double target = lambda + 1.0 / lambda;
            const bool hit = within(s, target, 0.10);
            ok = ok && hit;
            detail += "lambda=" + fmt(lambda) + ": " + fmt(s, 7) + " vs " + fmt(target, 5) + (hit ? " ok; " : " no; ");
            if (lambda == 0.3)
                detail += "(also " + std::string(within(s, 3.533, 0.10) ? "within" : "outside") +
                          " 10% of the tabulated 3.533); ";
        }
        report("AC2", ok, detail);
    }

    // AC3
    {
        const auto t0 = std::chrono::steady_clock::now();
        const auto row = measure(simulate(line_run(0.005, 1.5)), MeasureOptions{});
        info("lambda=1.5 eps=0.005 speed=" + fmt(row.fitted_speed, 10) + " runtime_s=" + fmt(seconds_since(t0), 3) +
             " status=" + row.status);
        report("AC3", within(row.fitted_speed, 2.0, 0.10),
               "fast-decay control speed=" + fmt(row.fitted_speed, 7) + " target 2 +-10%");
    }

    // AC4
    {
        double lo = 1e300, hi = 0.0;
        std::string detail;
        for (double eps : eps_set) {
            const double r = rows05[eps].thickness_ratio;
            lo = std::min(lo, r);
            hi = std::max(hi, r);
            detail += fmt(r, 5) + " ";
        }
        report("AC4", std::isfinite(hi / lo) && hi / lo <= 1.5,
               "thickness/(eps|ln eps|) = " + detail + "max/min=" + fmt(hi / lo, 5) + " <= 1.5");
    }

    // AC5
    {
        double lo = 1e300, hi = 0.0;
        std::string detail;
        for (double eps : eps_set) {
            const double r = rows05[eps].generation_ratio;
            lo = std::min(lo, r);
            hi = std::max(hi, r);
            detail += fmt(r, 5) + " ";
        }
        const bool stable = std::isfinite(hi / lo) && hi / lo <= 2.0;
        const bool below = hi <= alpha;
        report("AC5", stable && below,
               "generation_time/(eps|ln eps|) = " + detail + "max/min=" + fmt(hi / lo, 4) +
                   " <= 2 [" + (stable ? "ok" : "no") + "]; max " + fmt(hi, 4) + " <= alpha=" + fmt(alpha, 4) + " [" +
                   (below ? "ok" : "no") + "]");
    }

    // Bound constants for the eps = 0.01 run.
    ResolveOptions ropt;
    ropt.calibration_epsilons = eps_set;
    const BoundContext ctx01 = resolve_context(line_run(0.01, 0.5), ropt);
    {
        std::string line;
        for (const auto& [k, v] : ctx01.constants.entries()) line += k + "=" + fmt(v, 5) + " ";
        info("constants(eps=0.01): " + line);
    }

    // AC6
    {
        SimConfig c = line_run(0.02, 0.5);
        const BoundContext ctx = resolve_context(c, ropt);
        const BoundSpec s = make_bound_spec(BoundKind::super, ctx);
        std::vector<double> errs;
        bool tol_ok = true, sign_ok = true;
        for (double rule : {10.0, 20.0, 40.0}) {
            SimConfig g = c;
            g.dx_rule = rule;
            const auto rep = residual(s, residual_times(s, 6), make_grid(g));
            errs.push_back(rep.identity_error);
            tol_ok = tol_ok && rep.identity_error <= rep.identity_tol;
            sign_ok = sign_ok && rep.residual_min >= -rep.tol;
            info("super identity dx=eps/" + fmt(rule) + " rel_error=" + fmt(rep.identity_error, 4) + " tol=" +
                 fmt(rep.identity_tol, 4) + " residual_min=" + fmt(rep.residual_min, 4));
        }
        const double o1 = std::log2(errs[0] / errs[1]), o2 = std::log2(errs[1] / errs[2]);
        report("AC6", o1 >= 1.8 && o2 >= 1.8,
               "identity error " + fmt(errs[0], 4) + " -> " + fmt(errs[1], 4) + " -> " + fmt(errs[2], 4) +
                   ", observed orders " + fmt(o1, 4) + ", " + fmt(o2, 4) + " (>= 1.8); within 5 dx^2 at every level: " +
                   (tol_ok ? "yes" : "no") + "; residual >= -10 dx^2: " + (sign_ok ? "yes" : "no"));
    }

    // AC7
    {
        const auto t0 = std::chrono::steady_clock::now();
        bool ok = true;
        std::string detail;
        for (BoundKind kind : {BoundKind::sub_small, BoundKind::sub_motion, BoundKind::super}) {
            const BoundSpec s = make_bound_spec(kind, ctx01);
            const auto rep = verify_ordering(traj01, s);
            ok = ok && rep.ordering_passed();
            detail += std::string(to_string(kind)) + " violation=" + fmt(rep.ordering_violation, 3) + " (" +
                      fmt(rep.ordering_rows.size()) + " snapshots); ";
        }
        const auto sw = sandwich(traj01, make_bound_spec(BoundKind::sub_motion, ctx01),
                                 make_bound_spec(BoundKind::super, ctx01));
        info("sandwich lower_excess=" + fmt(sw.lower_excess, 3) + " upper_excess=" + fmt(sw.upper_excess, 3) +
             " snapshots=" + fmt(sw.snapshots) + " ordering_runtime_s=" + fmt(seconds_since(t0), 3));
        ok = ok && sw.passed();
        report("AC7", ok, detail + "tol=10 dx^2=" + fmt(10.0 * std::pow(traj01.config.dx(), 2), 3));
        const auto t1 = std::chrono::steady_clock::now();
        for (BoundKind kind : {BoundKind::sub_small, BoundKind::sub_motion, BoundKind::super}) {
            const BoundSpec s = make_bound_spec(kind, ctx01);
            const auto rep = residual(s, residual_times(s, 6), make_grid(ctx01.config), 8);
            info("residual " + std::string(to_string(kind)) + " max=" + fmt(rep.residual_max, 4) + " min=" +
                 fmt(rep.residual_min, 4) + " tol=" + fmt(rep.tol, 4) + " nodes=" + fmt(rep.residual_nodes) +
                 " excluded=" + fmt(rep.excluded_nodes) + " passed=" + (rep.residual_passed() ? "yes" : "no"));
        }
        info("residual_runtime_s=" + fmt(seconds_since(t1), 3));
        for (const auto& [k, v] : ctx01.constants.k_p) info("k_p" + std::to_string(k) + "=" + fmt(v, 5));
        info("k=" + fmt(ctx01.constants.k, 5) + ": the region d0 <= -k eps|ln eps| is " +
             (ctx01.constants.k * ctx01.config.layer_scale() >= 1.0 ? "empty" : "non-empty") +
             " for the unit interval; m1 e^{m2 T}=" +
             fmt(ctx01.constants.m1 * std::exp(ctx01.constants.m2 * ctx01.config.horizon), 4));
    }

    // AC8
    {
        const auto p = compute_profile(2.5);
        std::vector<double> z, v;
        for (int i = 0; i <= 200; ++i) {
            const double zi = 20.0 + 60.0 * i / 200.0;
            z.push_back(zi);
            v.push_back(p.eval(zi).u);
        }
        const double fwd = -log_slope(z, v);
        z.clear();
        v.clear();
        for (int i = 0; i <= 200; ++i) {
            const double zi = -60.0 + 40.0 * i / 200.0;
            z.push_back(zi);
            v.push_back(p.eval(zi).complement);
        }
        const double bwd = log_slope(z, v);
        const double eta = decay_exponents(2.5).eta;
        const bool coincide = std::abs(p.mu() - 0.5) < 1e-12;
        report("AC8", within(fwd, 0.5, 0.02) && within(bwd, eta, 0.02) && coincide,
               "forward rate " + fmt(fwd, 6) + " vs mu=0.5, backward rate " + fmt(bwd, 6) + " vs eta=" + fmt(eta, 6) +
                   ", mu(c_lambda) = lambda: " + (coincide ? "yes" : "no"));
    }

    // AC9
    {
        std::mt19937_64 rng(2024);
        std::size_t checks = 0, failures = 0;
        std::string first_failure;
        auto expect = [&](bool cond, const std::string& what) {
            ++checks;
            if (!cond) {
                ++failures;
                if (first_failure.empty()) first_failure = what;
            }
        };
        const double B = xi_upper;
        for (double eps : {0.1, 0.05, 0.02}) {
            const double one[] = {eps};
            const double a = calibrate_generation(one, B).alpha;
            const double lne = std::abs(std::log(eps)), l = eps * lne;
            const auto kind = ReactionKind::perturbed(eps);
            std::uniform_real_distribution<double> xi_dist(-B, B), s_dist(1e-3, 2.0 * a * lne);
            for (int i = 0; i < 1000; ++i) {
                const double xi = xi_dist(rng), s = s_dist(rng);
                const auto r = semiflow(s, xi, kind);
                const std::string at = "eps=" + fmt(eps) + " xi=" + fmt(xi) + " s=" + fmt(s);
                if (xi >= l) expect(r.value >= l - 1e-12, "(i) upper " + at);
                if (xi < 0.0) expect(r.value < 0.0, "(i) negative " + at);
                if (xi > 0.0 && xi < l && s < positivity_time(xi, eps)) expect(r.value > 0.0, "(i) positive " + at);
                expect(r.value > -B && r.value < B, "(ii) " + at);
                expect(r.sensitivity > 0.0, "(iii) " + at);
                if (xi >= l) {
                    const double w = semiflow(std::max(s, a * lne), xi, kind).value;
                    expect(w > 0.0 && w <= 1.0 + eps, "(v) upper " + at);
                    if (xi >= 3.0 * l) expect(w >= 1.0 - eps, "(v) lower " + at);
                }
            }
        }
        const auto lg = semiflow(1.0, 0.5, ReactionKind::logistic());
        const double closed = std::exp(1.0) / (1.0 + std::exp(1.0));
        const bool logistic_ok = std::abs(lg.value - closed) <= 1e-8;
        report("AC9", failures == 0 && logistic_ok,
               fmt(checks) + " property checks on 3x1000 samples, " + fmt(failures) + " failures" +
                   (first_failure.empty() ? "" : " (first: " + first_failure + ")") + "; logistic w(1, 0.5)=" +
                   fmt(lg.value, 12) + " vs e/(1+e), |diff|=" + fmt(std::abs(lg.value - closed), 3));
    }

    // AC10
    {
        SimConfig c;
        c.epsilon = 0.02;
        std::mt19937_64 rng(99);
        std::uniform_real_distribution<double> base(0.0, 1.5), gap(0.0, 0.5), coin(0.0, 1.0);
        const std::size_t n = 400;
        double worst = -1e300;
        for (int pair = 0; pair < 20; ++pair) {
            Field lo, hi;
            lo.grid = hi.grid = Grid{GeometryMode::line, 0.0, c.dx(), n, 0.0, 1};
            lo.values.resize(n);
            hi.values.resize(n);
            for (std::size_t i = 0; i < n; ++i) {
                lo.values[i] = base(rng);
                // Ties are allowed and must survive as ties or become strict.
                hi.values[i] = lo.values[i] + (coin(rng) < 0.2 ? 0.0 : gap(rng));
            }
            Solver s_lo(c), s_hi(c);
            for (int k = 0; k < 1000; ++k) {
                s_lo.advance(lo, c.dt());
                s_hi.advance(hi, c.dt());
            }
            for (std::size_t i = 0; i < n; ++i) worst = std::max(worst, lo.values[i] - hi.values[i]);
        }
        report("AC10", worst <= 1e-10,
               "20 random ordered pairs, 1000 steps at eps=0.02: max(u_low - u_high)=" + fmt(worst, 3) + " <= 1e-10");
    }

    // AC11
    {
        const auto& rc = ctx01.constants;
        const auto cls = classify_run(traj01, rc.C, rc.t_eps);
        report("AC11", cls.violations() == 0,
               "C=1.2*floor=" + fmt(rc.C, 5) + ": violations=" + fmt(cls.violations()) + " over near=" +
                   fmt(cls.nodes(Region::near_interface)) + " inside=" + fmt(cls.nodes(Region::inside_far)) +
                   " outside=" + fmt(cls.nodes(Region::outside_far)) + " node-snapshots");
        // The floor carries m1 e^{m2 T}; with these constants the tube covers the box.
        const double reduced = 1.2 * std::max({1.0 / 0.5, 2.0 * rc.c_lambda * rc.alpha, 2.0 / rc.eta});
        const auto red = classify_run(traj01, reduced, rc.t_eps);
        info("classification with C=1.2*max(1/lambda, 2 c alpha, 2/eta)=" + fmt(reduced, 5) + ": violations=" +
             fmt(red.violations()) + " near=" + fmt(red.nodes(Region::near_interface)) + " inside=" +
             fmt(red.nodes(Region::inside_far)) + " outside=" + fmt(red.nodes(Region::outside_far)));
    }

    std::size_t failed = 0;
    for (const auto& v : verdicts) failed += v.pass ? 0 : 1;
    info("criteria passed " + fmt(verdicts.size() - failed) + "/" + fmt(verdicts.size()) + ", total runtime_s=" +
         fmt(seconds_since(suite_start), 4));
    return failed == 0 ? 0 : 1;
}
