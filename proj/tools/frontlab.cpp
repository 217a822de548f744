#include <CLI11.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "frontlab/config.hpp"
#include "frontlab/frontlab.hpp"

namespace fs = std::filesystem;
using namespace frontlab;

namespace {

constexpr int exit_ok = 0;
constexpr int exit_verification = 1;
constexpr int exit_usage = 2;

struct VerificationFailed {
    std::string message;
};

std::string read_file(const fs::path& p) {
    std::ifstream in(p);
    if (!in) fail(ErrorCode::io, "cannot read " + p.string());
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

std::ofstream open_out(const fs::path& p) {
    std::ofstream out(p);
    if (!out) fail(ErrorCode::io, "cannot write " + p.string());
    return out;
}

fs::path default_out(const std::string& name) {
    const char* env = std::getenv("FRONTLAB_OUT");
    return fs::path(env && *env ? env : "runs") / name;
}

std::vector<double> parse_list(const std::string& s, const std::string& what) {
    std::vector<double> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) {
        try {
            std::size_t used = 0;
            out.push_back(std::stod(item, &used));
            if (used != item.size()) throw std::invalid_argument(item);
        } catch (const std::exception&) {
            fail(ErrorCode::config_invalid, what + ": '" + item + "' is not a number");
        }
    }
    if (out.empty()) fail(ErrorCode::config_invalid, what + ": empty list");
    return out;
}

ResolveOptions resolve_options(const RunSpecFile& spec) {
    ResolveOptions o;
    o.calibration_epsilons = spec.verification.calibration_epsilons;
    o.overrides = spec.verification.overrides;
    return o;
}

RunManifest base_manifest(const std::string& text, const RunSpecFile& spec) {
    RunManifest m;
    m.input_hash = hex64(fnv1a64(text));
    m.started = utc_timestamp();
    m.config = describe(spec.config);
    m.notes = spec.notes;
    return m;
}

void write_manifest_file(const fs::path& dir, const RunManifest& m) {
    auto out = open_out(dir / "manifest.txt");
    write_manifest(out, m);
}

// ---------------------------------------------------------------------------

int cmd_simulate(const std::string& config_path, std::string out_dir) {
    const std::string text = read_file(config_path);
    const RunSpecFile spec = parse_config(text);
    for (const auto& n : spec.notes) std::cerr << "note: " << n << "\n";
    const fs::path dir = out_dir.empty() ? default_out(fs::path(config_path).stem().string()) : fs::path(out_dir);
    fs::create_directories(dir);

    RunManifest man = base_manifest(text, spec);
    if (spec.config.lambda < 1.0) man.constants = resolve_context(spec.config, resolve_options(spec)).constants;
    const Grid grid = make_grid(spec.config);
    man.extra = {{"grid_nodes", std::to_string(grid.size())},
                 {"dx", std::to_string(spec.config.dx())},
                 {"dt", std::to_string(spec.config.dt())},
                 {"snapshots", std::to_string(snapshot_schedule(spec.config).size())}};
    write_manifest_file(dir, man);
    {
        auto out = open_out(dir / "config.yaml");
        out << text;
    }

    const Trajectory traj = simulate(spec.config);
    write_trajectory(traj, dir);

    MeasureOptions mo = spec.measurement.options;
    if (man.constants) mo.alpha = man.constants->alpha;
    for (double level : spec.measurement.levels)
        for (double ray : spec.measurement.rays) {
            const FrontTrack tr = track_front(traj, level, Ray{ray});
            std::ostringstream name;
            name << "front_a" << level;
            if (spec.config.mode == GeometryMode::plane) name << "_ray" << ray;
            auto out = open_out(dir / (name.str() + ".csv"));
            out << std::setprecision(12) << "t,position\n";
            for (const auto& [t, x] : tr.entries) out << t << ',' << x << '\n';
        }
    ScalingReport rep;
    mo.ray = Ray{spec.measurement.rays.front()};
    rep.rows.push_back(measure(traj, mo));
    {
        auto out = open_out(dir / "scaling.csv");
        write_scaling_csv(out, rep);
    }
    man.finished = utc_timestamp();
    write_manifest_file(dir, man);
    std::cout << "run written to " << dir.string() << "\n";
    return exit_ok;
}

int cmd_wave(double c, std::string out_dir) {
    const WaveProfile p = compute_profile(c);
    const fs::path dir = out_dir.empty() ? default_out("waves") : fs::path(out_dir);
    fs::create_directories(dir);
    std::ostringstream name;
    name << "profile_c" << c << ".csv";
    auto out = open_out(dir / name.str());
    p.write_cache(out);
    std::cout << std::setprecision(10) << "c=" << c << " eta=" << p.eta() << " mu=" << p.mu()
              << " r_fit=" << p.r_fit() << " R_fit=" << p.R_fit() << "\n"
              << "profile written to " << (dir / name.str()).string() << "\n";
    return exit_ok;
}

int cmd_verify(const std::string& run_dir, const std::string& check) {
    const fs::path dir(run_dir);
    const std::string text = read_file(dir / "config.yaml");
    const RunSpecFile spec = parse_config(text);
    if (!(spec.config.lambda < 1.0))
        fail(ErrorCode::config_invalid, "verify: comparison bounds exist only for lambda < 1");

    std::vector<BoundKind> kinds;
    if (check == "all") {
        if (spec.verification.sub_small) kinds.push_back(BoundKind::sub_small);
        if (spec.verification.sub_motion) kinds.push_back(BoundKind::sub_motion);
        if (spec.verification.super) kinds.push_back(BoundKind::super);
    } else if (auto k = parse_bound_kind(check)) {
        kinds.push_back(*k);
    } else {
        fail(ErrorCode::config_invalid, "verify: --check must be sub_small, sub_motion, super or all");
    }

    const BoundContext ctx = resolve_context(spec.config, resolve_options(spec));
    const Trajectory traj = read_trajectory(spec.config, dir);
    const Grid grid = make_grid(spec.config);
    bool ok = true;
    std::string failed;
    for (BoundKind kind : kinds) {
        const BoundSpec bs = make_bound_spec(kind, ctx);
        BoundsReport rep = residual(bs, residual_times(bs, spec.verification.residual_times), grid,
                                    spec.verification.residual_stride);
        rep = merge(rep, verify_ordering(traj, bs));
        const std::string base = std::string("bounds_") + std::string(to_string(kind));
        {
            auto out = open_out(dir / (base + ".txt"));
            write_report_text(out, rep);
            for (const auto& [k, v] : ctx.constants.entries())
                out << "constant." << k << "=" << std::setprecision(17) << v << "\n";
        }
        {
            auto out = open_out(dir / (base + ".csv"));
            write_report_csv(out, rep);
        }
        std::cout << std::setprecision(6) << to_string(kind) << ": residual "
                  << (rep.residual_passed() ? "pass" : "FAIL") << " (max " << rep.residual_max << ", min "
                  << rep.residual_min << "), ordering " << (rep.ordering_passed() ? "pass" : "FAIL")
                  << " (violation " << rep.ordering_violation << ", tol " << rep.tol << ")\n";
        if (!rep.passed()) {
            ok = false;
            failed += (failed.empty() ? "" : ",") + std::string(to_string(kind));
        }
    }
    if (check == "all") {
        const Classification cl = classify_run(traj, ctx.constants.C, ctx.constants.t_eps);
        auto out = open_out(dir / "classification.csv");
        write_classification_csv(out, cl);
        std::cout << "classification: " << cl.violations() << " violations (radius " << cl.radius << ")\n";
        if (cl.violations() > 0) {
            ok = false;
            failed += (failed.empty() ? "" : ",") + std::string("classification");
        }
    }
    if (!ok) throw VerificationFailed{"verification failed: " + failed};
    return exit_ok;
}

int cmd_sweep(const std::string& config_path, const std::string& eps_list, const std::string& lambda_list,
              unsigned jobs, std::string out_dir) {
    const std::string text = read_file(config_path);
    RunSpecFile spec = parse_config(text);
    if (!eps_list.empty()) spec.sweep.epsilon = parse_list(eps_list, "--epsilon");
    if (!lambda_list.empty()) spec.sweep.lambda = parse_list(lambda_list, "--lambda");
    const auto configs = sweep_configs(spec);
    const fs::path dir = out_dir.empty() ? default_out(fs::path(config_path).stem().string() + "_sweep") : fs::path(out_dir);
    fs::create_directories(dir);

    MeasureOptions mo = spec.measurement.options;
    std::vector<double> slow;
    for (const auto& c : configs)
        if (c.lambda < 1.0) slow.push_back(c.epsilon);
    RunManifest man = base_manifest(text, spec);
    if (!slow.empty()) {
        // One generation constant for the whole sweep.
        const auto cal = calibrate_generation(slow, spec.config.xi_bound());
        mo.alpha = cal.alpha;
        man.extra.push_back({"constant.alpha", std::to_string(cal.alpha)});
        man.extra.push_back({"constant.C_a", std::to_string(cal.c_a)});
    }
    man.extra.push_back({"sweep_rows", std::to_string(configs.size())});
    write_manifest_file(dir, man);
    {
        auto out = open_out(dir / "config.yaml");
        out << text;
    }
    const ScalingReport rep = sweep(configs, mo, jobs);
    {
        auto out = open_out(dir / "scaling.csv");
        write_scaling_csv(out, rep);
    }
    man.finished = utc_timestamp();
    write_manifest_file(dir, man);
    write_scaling_csv(std::cout, rep);
    return exit_ok;
}

int cmd_report(const std::string& run_dir) {
    const fs::path dir(run_dir);
    std::ifstream in(dir / "scaling.csv");
    if (!in) fail(ErrorCode::io, "report: no scaling.csv in " + dir.string());
    std::ostringstream rep;
    std::string line;
    std::getline(in, line);
    rep << std::setprecision(6);
    rep << "epsilon  lambda  speed (predicted)  thickness/(eps|ln eps|)  generation/(eps|ln eps|)  status\n";
    while (std::getline(in, line)) {
        std::vector<std::string> cells;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) cells.push_back(cell);
        if (cells.size() < 9) continue;
        const double lambda = std::stod(cells[1]);
        rep << cells[0] << "  " << cells[1] << "  " << cells[2] << " (" << selected_speed(lambda) << ")  "
            << cells[5] << "  " << cells[7] << "  " << cells[8] << "\n";
    }
    for (const char* kind : {"sub_small", "sub_motion", "super"}) {
        std::ifstream b(dir / (std::string("bounds_") + kind + ".txt"));
        if (!b) continue;
        std::string kv, passed = "?";
        while (std::getline(b, kv))
            if (kv.rfind("passed=", 0) == 0) passed = kv.substr(7) == "1" ? "pass" : "FAIL";
        rep << "bounds " << kind << ": " << passed << "\n";
    }
    std::cout << rep.str();
    auto out = open_out(dir / "report.txt");
    out << rep.str();
    return exit_ok;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"frontlab: fronts of the rescaled Fisher-KPP equation with slowly decaying data"};
    app.require_subcommand(1);
    app.set_version_flag("--version", tool_version);

    std::string config_path, out_dir, run_dir, check = "all", eps_list, lambda_list;
    unsigned jobs = 1;
    double c = 0.0;

    auto* sim = app.add_subcommand("simulate", "run one simulation and write snapshots + manifest");
    sim->add_option("--config", config_path, "run specification (YAML)")->required();
    sim->add_option("--out", out_dir, "run directory");
    sim->add_option("--jobs", jobs, "worker limit")->check(CLI::PositiveNumber);

    auto* wave = app.add_subcommand("wave", "compute a travelling-wave profile cache");
    wave->add_option("--c", c, "wave speed (> 2)")->required();
    wave->add_option("--out", out_dir, "output directory");

    auto* ver = app.add_subcommand("verify", "check the comparison bounds on a completed run");
    ver->add_option("--run", run_dir, "run directory written by simulate")->required();
    ver->add_option("--check", check, "sub_small, sub_motion, super or all");
    ver->add_option("--jobs", jobs, "worker limit")->check(CLI::PositiveNumber);

    auto* sw = app.add_subcommand("sweep", "simulate and measure an (epsilon, lambda) grid");
    sw->add_option("--config", config_path, "base run specification (YAML)")->required();
    sw->add_option("--epsilon", eps_list, "comma-separated epsilon values");
    sw->add_option("--lambda", lambda_list, "comma-separated lambda values");
    sw->add_option("--jobs", jobs, "concurrent runs")->check(CLI::PositiveNumber);
    sw->add_option("--out", out_dir, "output directory");

    auto* rp = app.add_subcommand("report", "summarise a run or sweep directory");
    rp->add_option("--run", run_dir, "run or sweep directory")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        if (code != 0) {
            std::cerr << "reason: usage: " << e.what() << "\n";
            return exit_usage;
        }
        return exit_ok;
    }

    try {
        if (*sim) return cmd_simulate(config_path, out_dir);
        if (*wave) return cmd_wave(c, out_dir);
        if (*ver) return cmd_verify(run_dir, check);
        if (*sw) return cmd_sweep(config_path, eps_list, lambda_list, jobs, out_dir);
        if (*rp) return cmd_report(run_dir);
    } catch (const VerificationFailed& e) {
        std::cerr << "reason: verification_failed: " << e.message << "\n";
        return exit_verification;
    } catch (const ValidationError& e) {
        for (const auto& p : e.problems()) std::cerr << "error: " << p << "\n";
        std::cerr << "reason: " << to_string(e.code()) << ": " << e.problems().size() << " problem(s)\n";
        return exit_usage;
    } catch (const Error& e) {
        std::cerr << "reason: " << to_string(e.code()) << ": " << e.what() << "\n";
        return exit_usage;
    } catch (const std::exception& e) {
        std::cerr << "reason: internal: " << e.what() << "\n";
        return exit_usage;
    }
    return exit_usage;
}
