#pragma once

#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace frontlab {

/// Machine-readable failure category. The CLI maps these onto exit codes and
/// prints the tag on its `reason:` line.
enum class ErrorCode {
    domain,            // argument outside the documented domain
    integration,       // adaptive ODE integration could not meet tolerance
    construction,      // a derived object failed its own post-checks
    shooting,          // travelling-wave shooting did not connect 1 to 0
    stability,         // explicit diffusion step violates the CFL rule
    config_invalid,    // simulation / run configuration rejected
    parse,             // malformed configuration text
    resolution,        // grid too coarse for the requested check
    no_crossing,       // level never reached along the scan
    insufficient_data, // not enough samples for a fit
    not_reached,       // generation condition never met
    mismatch,          // trajectory and bound built from different configs
    io,                // file could not be read or written
};

constexpr std::string_view to_string(ErrorCode code) {
    switch (code) {
    case ErrorCode::domain: return "domain";
    case ErrorCode::integration: return "integration";
    case ErrorCode::construction: return "construction";
    case ErrorCode::shooting: return "shooting";
    case ErrorCode::stability: return "stability";
    case ErrorCode::config_invalid: return "config_invalid";
    case ErrorCode::parse: return "parse";
    case ErrorCode::resolution: return "resolution";
    case ErrorCode::no_crossing: return "no_crossing";
    case ErrorCode::insufficient_data: return "insufficient_data";
    case ErrorCode::not_reached: return "not_reached";
    case ErrorCode::mismatch: return "mismatch";
    case ErrorCode::io: return "io";
    }
    return "unknown";
}

class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& what)
        : std::runtime_error(what), code_(code) {}

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

/// Validation failure carrying every problem found, not only the first.
class ValidationError : public Error {
public:
    explicit ValidationError(std::vector<std::string> problems)
        : Error(ErrorCode::config_invalid, join(problems)), problems_(std::move(problems)) {}

    const std::vector<std::string>& problems() const noexcept { return problems_; }

private:
    static std::string join(const std::vector<std::string>& items) {
        std::string out;
        for (const auto& s : items) {
            if (!out.empty()) out += "; ";
            out += s;
        }
        return out;
    }

    std::vector<std::string> problems_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& what) {
    throw Error(code, what);
}

} // namespace frontlab
