#pragma once

// YAML run specifications and run manifests.

#include <yaml-cpp/yaml.h>

#include <chrono>
#include <cstdint>
#include <ctime>
#include <iomanip>
#include <map>
#include <optional>
#include <ostream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "frontlab/analysis.hpp"
#include "frontlab/bounds.hpp"
#include "frontlab/error.hpp"
#include "frontlab/solver.hpp"

namespace frontlab {

inline constexpr const char* tool_version = "0.1.0";

struct MeasurementSpec {
    MeasureOptions options;
    std::vector<double> levels{0.5};
    std::vector<double> rays{0.0};
};

struct VerificationSpec {
    bool sub_small = true;
    bool sub_motion = true;
    bool super = true;
    std::vector<double> calibration_epsilons; // empty: the run's epsilon
    std::map<std::string, double> overrides;
    int residual_times = 11;
    std::size_t residual_stride = 1;
};

struct SweepSpec {
    std::vector<double> epsilon;
    std::vector<double> lambda;
};

struct RunSpecFile {
    SimConfig config;
    MeasurementSpec measurement;
    VerificationSpec verification;
    SweepSpec sweep;
    std::vector<std::string> notes;
};

namespace detail {

class SpecReader {
public:
    std::vector<std::string> errors;

    static std::string where(const YAML::Node& n) {
        const YAML::Mark m = n.Mark();
        if (m.is_null()) return "";
        return "line " + std::to_string(m.line + 1) + ", column " + std::to_string(m.column + 1) + ": ";
    }

    void error(const YAML::Node& n, const std::string& msg) { errors.push_back(where(n) + msg); }

    bool is_map(const YAML::Node& n, const std::string& name) {
        if (!n.IsMap()) {
            error(n, "'" + name + "' must be a mapping");
            return false;
        }
        return true;
    }

    void reject_unknown(const YAML::Node& n, const std::string& section, std::set<std::string> allowed) {
        for (const auto& kv : n) {
            const auto key = kv.first.as<std::string>();
            if (!allowed.count(key)) error(kv.first, "unknown key '" + key + "' in " + section);
        }
    }

    std::optional<double> number(const YAML::Node& parent, const std::string& key, const std::string& section,
                                 bool required) {
        const YAML::Node n = parent[key];
        if (!n) {
            if (required) error(parent, "missing required key '" + key + "' in " + section);
            return std::nullopt;
        }
        try {
            if (!n.IsScalar()) throw YAML::Exception(n.Mark(), "");
            return n.as<double>();
        } catch (const YAML::Exception&) {
            error(n, "'" + section + "." + key + "' must be a number");
            return std::nullopt;
        }
    }

    std::optional<std::vector<double>> numbers(const YAML::Node& parent, const std::string& key,
                                               const std::string& section) {
        const YAML::Node n = parent[key];
        if (!n) return std::nullopt;
        if (!n.IsSequence()) {
            error(n, "'" + section + "." + key + "' must be a list of numbers");
            return std::nullopt;
        }
        std::vector<double> out;
        for (const auto& item : n) {
            try {
                out.push_back(item.as<double>());
            } catch (const YAML::Exception&) {
                error(item, "'" + section + "." + key + "' entries must be numbers");
            }
        }
        return out;
    }

    std::optional<bool> boolean(const YAML::Node& parent, const std::string& key, const std::string& section) {
        const YAML::Node n = parent[key];
        if (!n) return std::nullopt;
        try {
            return n.as<bool>();
        } catch (const YAML::Exception&) {
            error(n, "'" + section + "." + key + "' must be true or false");
            return std::nullopt;
        }
    }

    std::optional<ConvexShape> shape(const YAML::Node& parent) {
        const YAML::Node n = parent["shape"];
        if (!n) {
            error(parent, "missing required key 'shape' in problem");
            return std::nullopt;
        }
        if (!is_map(n, "problem.shape")) return std::nullopt;
        const YAML::Node type = n["type"];
        if (!type) {
            error(n, "problem.shape needs a 'type' (interval, disk or polygon)");
            return std::nullopt;
        }
        const auto t = type.as<std::string>();
        if (t == "interval") {
            reject_unknown(n, "problem.shape", {"type", "half_length"});
            if (auto v = number(n, "half_length", "problem.shape", true)) return Interval{*v};
        } else if (t == "disk") {
            reject_unknown(n, "problem.shape", {"type", "radius"});
            if (auto v = number(n, "radius", "problem.shape", true)) return Disk{*v};
        } else if (t == "polygon") {
            reject_unknown(n, "problem.shape", {"type", "vertices"});
            const YAML::Node vs = n["vertices"];
            if (!vs || !vs.IsSequence()) {
                error(n, "polygon needs a 'vertices' list of [x, y] pairs");
                return std::nullopt;
            }
            ConvexPolygon poly;
            for (const auto& v : vs) {
                if (!v.IsSequence() || v.size() != 2) {
                    error(v, "polygon vertices must be [x, y] pairs");
                    return std::nullopt;
                }
                try {
                    poly.vertices.push_back({v[0].as<double>(), v[1].as<double>()});
                } catch (const YAML::Exception&) {
                    error(v, "polygon vertex coordinates must be numbers");
                    return std::nullopt;
                }
            }
            return poly;
        } else {
            error(type, "unknown shape type '" + t + "' (expected interval, disk or polygon)");
        }
        return std::nullopt;
    }
};

inline std::optional<GeometryMode> parse_mode(const std::string& s) {
    if (s == "line") return GeometryMode::line;
    if (s == "radial") return GeometryMode::radial;
    if (s == "plane") return GeometryMode::plane;
    return std::nullopt;
}

inline GeometryMode default_mode(const ConvexShape& s) {
    if (std::holds_alternative<Interval>(s)) return GeometryMode::line;
    if (std::holds_alternative<Disk>(s)) return GeometryMode::radial;
    return GeometryMode::plane;
}

} // namespace detail

/// Parses and validates a run specification. Throws Error(parse) on
/// malformed YAML and ValidationError listing every problem otherwise.
inline RunSpecFile parse_config(const std::string& text) {
    YAML::Node root;
    try {
        root = YAML::Load(text);
    } catch (const YAML::ParserException& e) {
        fail(ErrorCode::parse, "line " + std::to_string(e.mark.line + 1) + ", column " +
                                   std::to_string(e.mark.column + 1) + ": " + e.msg);
    }
    detail::SpecReader rd;
    RunSpecFile spec;
    SimConfig& c = spec.config;
    if (!root || !root.IsMap()) throw ValidationError({"document must be a mapping with a 'problem' section"});
    rd.reject_unknown(root, "document", {"problem", "numerics", "measurement", "verification", "sweep"});

    const YAML::Node problem = root["problem"];
    if (!problem) {
        rd.errors.push_back("missing required section 'problem'");
    } else if (rd.is_map(problem, "problem")) {
        rd.reject_unknown(problem, "problem",
                          {"epsilon", "lambda", "m", "M", "g_amplitude", "shape", "horizon", "geometry_mode"});
        if (auto v = rd.number(problem, "epsilon", "problem", true)) c.epsilon = *v;
        if (auto v = rd.number(problem, "lambda", "problem", true)) c.lambda = *v;
        if (auto v = rd.number(problem, "m", "problem", true)) c.m = *v;
        if (auto v = rd.number(problem, "M", "problem", true)) c.M = *v;
        if (auto v = rd.number(problem, "g_amplitude", "problem", false)) c.g_amplitude = *v;
        if (auto v = rd.number(problem, "horizon", "problem", false)) c.horizon = *v;
        if (auto s = rd.shape(problem)) {
            c.shape = *s;
            c.mode = detail::default_mode(*s);
        }
        if (const YAML::Node gm = problem["geometry_mode"]) {
            if (auto m = detail::parse_mode(gm.as<std::string>())) c.mode = *m;
            else rd.error(gm, "geometry_mode must be line, radial or plane");
        }
    }

    if (const YAML::Node n = root["numerics"]; n && rd.is_map(n, "numerics")) {
        rd.reject_unknown(n, "numerics",
                          {"dx_rule", "dt_rule", "box_margin", "snapshot_times", "h_multiplier", "box"});
        if (auto v = rd.number(n, "dx_rule", "numerics", false)) c.dx_rule = *v;
        if (auto v = rd.number(n, "dt_rule", "numerics", false)) c.dt_rule = *v;
        if (auto v = rd.number(n, "box_margin", "numerics", false)) c.box_margin = *v;
        if (auto v = rd.number(n, "h_multiplier", "numerics", false)) c.h_multiplier = *v;
        if (auto v = rd.numbers(n, "snapshot_times", "numerics")) c.snapshot_times = *v;
        if (const YAML::Node b = n["box"]; b && rd.is_map(b, "numerics.box")) {
            rd.reject_unknown(b, "numerics.box", {"x", "y"});
            const auto x = rd.numbers(b, "x", "numerics.box");
            const auto y = rd.numbers(b, "y", "numerics.box");
            if (!x || x->size() != 2) rd.error(b, "numerics.box.x must be [lo, hi]");
            else if (y && y->size() != 2) rd.error(b, "numerics.box.y must be [lo, hi]");
            else c.box = Box{(*x)[0], (*x)[1], y ? (*y)[0] : 0.0, y ? (*y)[1] : 0.0};
        }
    }

    MeasureOptions& mo = spec.measurement.options;
    if (const YAML::Node n = root["measurement"]; n && rd.is_map(n, "measurement")) {
        rd.reject_unknown(n, "measurement",
                          {"levels", "speed_level", "speed_window", "thickness_levels", "generation_k", "rays"});
        if (auto v = rd.numbers(n, "levels", "measurement")) spec.measurement.levels = *v;
        if (auto v = rd.number(n, "speed_level", "measurement", false)) mo.speed_level = *v;
        if (auto v = rd.numbers(n, "speed_window", "measurement")) {
            if (v->size() != 2) rd.error(n["speed_window"], "measurement.speed_window must be [lo, hi] fractions of the horizon");
            else mo.speed_window_fraction = {(*v)[0], (*v)[1]};
        }
        if (auto v = rd.numbers(n, "thickness_levels", "measurement")) {
            if (v->size() != 2) rd.error(n["thickness_levels"], "measurement.thickness_levels must be [low, high]");
            else mo.thickness_levels = {(*v)[0], (*v)[1]};
        }
        if (auto v = rd.number(n, "generation_k", "measurement", false)) mo.generation_k = *v;
        if (auto v = rd.numbers(n, "rays", "measurement")) spec.measurement.rays = *v;
    }

    VerificationSpec& vs = spec.verification;
    if (const YAML::Node n = root["verification"]; n && rd.is_map(n, "verification")) {
        rd.reject_unknown(n, "verification", {"sub_small", "sub_motion", "super", "calibration_epsilons",
                                              "overrides", "residual_times", "residual_stride"});
        if (auto v = rd.boolean(n, "sub_small", "verification")) vs.sub_small = *v;
        if (auto v = rd.boolean(n, "sub_motion", "verification")) vs.sub_motion = *v;
        if (auto v = rd.boolean(n, "super", "verification")) vs.super = *v;
        if (auto v = rd.numbers(n, "calibration_epsilons", "verification")) vs.calibration_epsilons = *v;
        if (auto v = rd.number(n, "residual_times", "verification", false)) vs.residual_times = static_cast<int>(*v);
        if (auto v = rd.number(n, "residual_stride", "verification", false))
            vs.residual_stride = static_cast<std::size_t>(std::max(1.0, *v));
        if (const YAML::Node o = n["overrides"]; o && rd.is_map(o, "verification.overrides")) {
            std::set<std::string> names(override_names().begin(), override_names().end());
            rd.reject_unknown(o, "verification.overrides", names);
            for (const auto& kv : o) {
                const auto key = kv.first.as<std::string>();
                if (!names.count(key)) continue;
                if (auto v = rd.number(o, key, "verification.overrides", true)) {
                    if (!(*v > 0.0)) rd.error(kv.second, "override '" + key + "' must be positive");
                    vs.overrides[key] = *v;
                }
            }
        }
    }

    if (const YAML::Node n = root["sweep"]; n && rd.is_map(n, "sweep")) {
        rd.reject_unknown(n, "sweep", {"epsilon", "lambda"});
        if (auto v = rd.numbers(n, "epsilon", "sweep")) spec.sweep.epsilon = *v;
        if (auto v = rd.numbers(n, "lambda", "sweep")) spec.sweep.lambda = *v;
    }

    // Range checks.
    std::vector<std::string> errs = rd.errors;
    if (rd.errors.empty()) {
        for (auto& e : validate_config(c)) errs.push_back(e);
    }
    for (double a : spec.measurement.levels)
        if (!(a > 0.0 && a < 1.0)) errs.push_back("measurement.levels must lie in (0, 1)");
    if (!(mo.speed_level > 0.0 && mo.speed_level < 1.0)) errs.push_back("measurement.speed_level must lie in (0, 1)");
    if (!(mo.thickness_levels.first > 0.0 && mo.thickness_levels.first < mo.thickness_levels.second &&
          mo.thickness_levels.second < 1.0))
        errs.push_back("measurement.thickness_levels must satisfy 0 < low < high < 1");
    if (!(mo.speed_window_fraction.first >= 0.0 && mo.speed_window_fraction.first < mo.speed_window_fraction.second &&
          mo.speed_window_fraction.second <= 1.0))
        errs.push_back("measurement.speed_window must satisfy 0 <= lo < hi <= 1");
    if (mo.generation_k && !(*mo.generation_k > 0.0)) errs.push_back("measurement.generation_k must be positive");
    for (double e : vs.calibration_epsilons)
        if (!(e > 0.0 && e < 0.2)) errs.push_back("verification.calibration_epsilons must lie in (0, 0.2)");
    if (vs.residual_times < 1) errs.push_back("verification.residual_times must be at least 1");
    for (double e : spec.sweep.epsilon)
        if (!(e > 0.0 && e < 0.2)) errs.push_back("sweep.epsilon entries must lie in (0, 0.2)");
    for (double l : spec.sweep.lambda)
        if (!(l > 0.0)) errs.push_back("sweep.lambda entries must be positive");
    if (!errs.empty()) throw ValidationError(std::move(errs));

    if (c.lambda >= 1.0)
        spec.notes.push_back("lambda >= 1: fast-decay control regime (front expected at the minimal speed 2)");
    if (std::holds_alternative<ConvexPolygon>(c.shape))
        spec.notes.push_back("polygon: the initial distance is not smooth at vertex shadows; treat as a stress test");
    return spec;
}

/// Configurations of a sweep: every (epsilon, lambda) pair, missing lists
/// falling back to the base value.
inline std::vector<SimConfig> sweep_configs(const RunSpecFile& spec) {
    std::vector<double> eps = spec.sweep.epsilon.empty() ? std::vector<double>{spec.config.epsilon} : spec.sweep.epsilon;
    std::vector<double> lam = spec.sweep.lambda.empty() ? std::vector<double>{spec.config.lambda} : spec.sweep.lambda;
    std::vector<SimConfig> out;
    for (double l : lam)
        for (double e : eps) {
            SimConfig c = spec.config;
            c.epsilon = e;
            c.lambda = l;
            c.box.reset();
            c.snapshot_times.clear();
            require_valid(c);
            out.push_back(c);
        }
    return out;
}

// ---------------------------------------------------------------------------
// Manifest

inline std::uint64_t fnv1a64(const std::string& s) {
    std::uint64_t h = 14695981039346656037ull;
    for (unsigned char ch : s) {
        h ^= ch;
        h *= 1099511628211ull;
    }
    return h;
}

inline std::string hex64(std::uint64_t v) {
    std::ostringstream os;
    os << std::hex << std::setw(16) << std::setfill('0') << v;
    return os.str();
}

inline std::string utc_timestamp() {
    const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

struct RunManifest {
    std::string input_hash;
    std::string started;
    std::string finished;
    std::string config;
    std::vector<std::pair<std::string, std::string>> extra;
    std::optional<RunConstants> constants;
    std::vector<std::string> notes;
};

inline void write_manifest(std::ostream& out, const RunManifest& m) {
    out << std::setprecision(17);
    out << "tool=frontlab\n"
        << "version=" << tool_version << "\n"
        << "input_hash=fnv1a64:" << m.input_hash << "\n"
        << "started=" << m.started << "\n"
        << "finished=" << m.finished << "\n"
        << "config=" << m.config << "\n";
    for (const auto& [k, v] : m.extra) out << k << "=" << v << "\n";
    if (m.constants) {
        for (const auto& [k, v] : m.constants->entries()) out << "constant." << k << "=" << v << "\n";
        for (const auto& k : m.constants->overridden) out << "override." << k << "=user\n";
    } else {
        out << "constants=not applicable (lambda >= 1)\n";
    }
    for (const auto& n : m.notes) out << "note=" << n << "\n";
}

} // namespace frontlab
