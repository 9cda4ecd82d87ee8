#include <string>

#include "doctest.h"
#include "pohozaev/config.hpp"

using namespace pohozaev;

namespace {

const char* kMinimal = R"(
command: solve
problem:
  family: fractional
  N: 1
  s: [0.3, 0.3]
  nonlinearity: cubic
)";

ConfigError failure(const std::string& text, const std::vector<std::string>& overrides = {}) {
    try {
        parse_config(text, overrides);
    } catch (const ConfigError& e) {
        return e;
    }
    FAIL("expected a ConfigError");
    return ConfigError(ErrorKind::ParseError, {});
}

bool mentions(const ConfigError& e, const std::string& what) {
    for (const auto& i : e.issues())
        if (i.message.find(what) != std::string::npos) return true;
    return false;
}

}  // namespace

TEST_CASE("a minimal fractional config gets the documented defaults") {
    const RunConfig c = parse_config(kMinimal);
    CHECK(c.command == Command::Solve);
    CHECK(c.problem.family == FamilyKind::FractionalSum);
    CHECK(c.problem.exponents == std::vector<double>{0.3, 0.3});
    CHECK(c.grid.kind == GridKind::Box);
    CHECK(c.grid.R == 20.0);
    CHECK(c.grid.M == 1024);
    CHECK(c.solver == SolverOptions{});
    CHECK(c.output.directory == "out");
    CHECK(c.epsilon_schedule == std::vector<double>{1e-1, 1e-2, 1e-3, 1e-4});
    CHECK(c.instance().nonlinearity == NonlinearitySpec::builtin("cubic"));
}

TEST_CASE("grid defaults depend on family and dimension") {
    const RunConfig cl = parse_config("problem: {family: classical, N: 3}");
    CHECK(cl.grid.kind == GridKind::Radial);
    CHECK(cl.grid.M == 4096);
    const RunConfig an = parse_config("problem: {family: anisotropic, N: 2, p: [1.7, 1.7]}");
    CHECK(an.grid.kind == GridKind::Box);
    CHECK(an.grid.R == 10.0);
    CHECK(an.grid.M == 256);
}

TEST_CASE("s = 0.6 with N = 1 names the violated bound") {
    const ConfigError e = failure(kMinimal, {"problem.s=[0.6]"});
    CHECK(e.kind() == ErrorKind::NonadmissibleExponents);
    CHECK(mentions(e, "N > 2·s_n required"));
    // alongside a range problem it is one issue among several
    const ConfigError both = failure(kMinimal, {"problem.s=[0.6]", "grid.M=2"});
    CHECK(both.kind() == ErrorKind::ValidationError);
}

TEST_CASE("unknown keys are parse errors naming key and section") {
    const ConfigError e = failure(std::string(kMinimal) + "  colour: red\n");
    CHECK(e.kind() == ErrorKind::ParseError);
    CHECK(mentions(e, "unknown key 'colour' in section 'problem'"));
    REQUIRE(e.issues().size() == 1);
    CHECK(e.issues()[0].line == 8);
}

TEST_CASE("all issues are reported, not just the first") {
    const ConfigError e = failure(R"(
command: solve
problem: {family: classical, N: 3, wobble: 1}
grid: {M: 2, R: -1}
solver: {backtrack: 2}
fiber: {points: 1}
)");
    CHECK(e.kind() == ErrorKind::ParseError);
    CHECK(e.issues().size() >= 4);
    CHECK(mentions(e, "wobble"));
    CHECK(mentions(e, "grid.M must be >= 8"));
    CHECK(mentions(e, "grid.R must be positive"));
    CHECK(mentions(e, "fiber.points"));
    CHECK(std::string(e.what()).find("problems in the configuration") != std::string::npos);
}

TEST_CASE("syntax and type errors carry positions") {
    const ConfigError syntax = failure("problem: [1, 2\n");
    CHECK(syntax.kind() == ErrorKind::ParseError);
    CHECK(syntax.issues().at(0).line > 0);
    const ConfigError type = failure("problem: {family: classical, N: three}");
    CHECK(type.kind() == ErrorKind::ParseError);
    CHECK(mentions(type, "problem.N: expected an integer"));
    CHECK(type.issues()[0].column > 0);
}

TEST_CASE("dotted overrides") {
    const RunConfig c = parse_config(kMinimal, {"grid.M=2048", "solver.tol_el=1e-7", "seed=9"});
    CHECK(c.grid.M == 2048);
    CHECK(c.solver.tol_el == 1e-7);
    CHECK(c.seed == 9);
    CHECK(c.solver.seed == 9);
    CHECK(c.hypotheses.seed == 9);
    CHECK(with_override(c, "problem.s", "[0.2, 0.4]").problem.exponents == std::vector<double>{0.2, 0.4});
    CHECK(mentions(failure(kMinimal, {"grid.M"}), "not of the form path=value"));
}

TEST_CASE("jumps extend a builtin into a table") {
    const RunConfig c = parse_config("problem: {family: classical, N: 3, nonlinearity: cubic, jumps: [[1, 0.5]]}");
    const NonlinearitySpec built = c.instance().nonlinearity;
    const NonlinearitySpec ref = NonlinearitySpec::builtin("cubic-jump(1,0.5)");
    CHECK(built.jump_points() == ref.jump_points());
    for (double s : {0.5, 1.0, 1.5, 3.0}) {
        CHECK(built.f(s) == doctest::Approx(ref.f(s)));
        CHECK(built.F(s) == doctest::Approx(ref.F(s)));
    }
}

TEST_CASE("canonical emission round trips") {
    const std::vector<std::string> texts{
        kMinimal,
        R"(
command: fiber
seed: 3
problem: {family: anisotropic, N: 2, p: [1.6, 1.9], nonlinearity: {builtin: cubic, tau: 2.5}, delta: 1e-9}
grid: {M: 128}
fiber: {profile: "a b.csv", t_min: 0.01, t_max: 100, points: 33}
output: {directory: runs/x, formats: [csv, json]}
)",
        R"(
command: sweep
problem:
  family: classical
  N: 3
  nonlinearity:
    name: t
    segments:
      - {start: 0, terms: [[1, 3]]}
      - {start: 2, terms: [[2, 2], [0.1, 0]]}
  jumps: [[0.5, 0.25]]
solver: {epsilon_schedule: [0.2, 0.02], inclusion_tol: 0.01, memory: 4}
hypotheses: {samples: 10, t_values: [0.3, 3]}
sweep: {parameter: problem.N, values: [3, 4], parallelism: 2}
)",
    };
    for (const auto& t : texts) {
        const RunConfig c = parse_config(t);
        const std::string emitted = emit_config(c);
        CHECK(parse_config(emitted) == c);
        CHECK(emit_config(parse_config(emitted)) == emitted);
    }
}

TEST_CASE("sweep entries are validated at parse time") {
    const std::string base = R"(
command: sweep
problem: {family: fractional, N: 1, s: [0.3], nonlinearity: cubic}
sweep: {parameter: problem.s, values: [[0.2], [0.7]]}
)";
    const ConfigError e = failure(base);
    CHECK(e.kind() == ErrorKind::ValidationError);
    CHECK(mentions(e, "sweep entry 1"));
    CHECK(mentions(e, "N > 2·s_n"));
    CHECK(mentions(failure("command: sweep\nproblem: {family: classical, N: 3}\n"), "sweep"));
}

TEST_CASE("unknown enumerations are validation errors") {
    CHECK(mentions(failure("command: run\nproblem: {family: classical, N: 3}"), "command must be one of"));
    CHECK(mentions(failure("problem: {family: elliptic, N: 3}"), "problem.family"));
    CHECK(mentions(failure("problem: {family: classical, N: 3}\noutput: {formats: [png]}"), "output.formats"));
    CHECK(mentions(failure("problem: {family: classical, N: 3, nonlinearity: quartic}"), "unknown nonlinearity"));
}
