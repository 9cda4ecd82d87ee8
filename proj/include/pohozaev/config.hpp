#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "pohozaev/error.hpp"
#include "pohozaev/harness.hpp"
#include "pohozaev/nonlinearity.hpp"
#include "pohozaev/problem.hpp"
#include "pohozaev/solver.hpp"

namespace pohozaev {

enum class Command { Solve, Fiber, CheckHypotheses, Sweep };
const char* command_name(Command c);

// Either a builtin name or a piecewise table, plus extra jumps h * 1{s >= a}.
struct NonlinearityConfig {
    std::string builtin = "cubic";  // empty when `segments` is used
    std::string name = "table";
    std::vector<Segment> segments;
    std::optional<double> tau;
    std::vector<std::array<double, 2>> jumps;  // (a, h)

    NonlinearitySpec build() const;
    bool operator==(const NonlinearityConfig&) const = default;
};

struct ProblemConfig {
    FamilyKind family = FamilyKind::Classical;
    int N = 3;
    std::vector<double> exponents;  // s-list or p-list
    NonlinearityConfig nonlinearity;
    double delta = 1e-8;
    bool operator==(const ProblemConfig&) const = default;
};

struct FiberConfig {
    std::string profile;  // solution CSV; empty uses the initial guess
    double t_min = 1e-3;
    double t_max = 1e3;
    std::size_t points = 1000;
    bool operator==(const FiberConfig&) const = default;
};

struct SweepConfig {
    std::string parameter;            // dotted path of the swept key
    std::vector<std::string> values;  // one YAML value per entry, flow style
    std::size_t parallelism = 1;
    bool operator==(const SweepConfig&) const = default;
};

struct OutputConfig {
    std::string directory = "out";
    // Any of "txt" (report), "csv" (profiles, traces, tables), "json" (summary).
    std::vector<std::string> formats{"txt", "csv", "json"};
    bool wants(const std::string& f) const;
    bool operator==(const OutputConfig&) const = default;
};

struct RunConfig {
    Command command = Command::Solve;
    std::uint64_t seed = 0;
    ProblemConfig problem;
    GridTemplate grid;
    SolverOptions solver;
    std::vector<double> epsilon_schedule{1e-1, 1e-2, 1e-3, 1e-4};
    double inclusion_tol = 1e-3;
    FiberConfig fiber;
    HarnessOptions hypotheses;
    SweepConfig sweep;
    OutputConfig output;

    ProblemInstance instance() const;
    bool operator==(const RunConfig&) const = default;
};

struct ConfigIssue {
    int line = 0;    // 1-based, 0 when unknown
    int column = 0;  // 1-based
    std::string message;
};

// Carries every issue found. Kind is ParseError for syntax, type and unknown-key
// problems, ValidationError when only ranges or admissibility failed, and the
// instance's own kind (e.g. NonadmissibleExponents) when that is the only issue.
class ConfigError : public Error {
public:
    ConfigError(ErrorKind kind, std::vector<ConfigIssue> issues);
    const std::vector<ConfigIssue>& issues() const { return issues_; }

private:
    std::vector<ConfigIssue> issues_;
};

// Overrides are "dotted.path=value" with a YAML value, applied before validation.
RunConfig parse_config(const std::string& text, const std::vector<std::string>& overrides = {});
RunConfig load_config(const std::string& path, const std::vector<std::string>& overrides = {});

// Canonical YAML: every key in a fixed order, doubles in shortest round-trip form.
std::string emit_config(const RunConfig& cfg);

// Copy of cfg with one dotted key replaced; the result is re-validated.
RunConfig with_override(const RunConfig& cfg, const std::string& path, const std::string& value);

}  // namespace pohozaev
