#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "json.hpp"
#include "pohozaev/run.hpp"
#include "pohozaev/shooting.hpp"

using namespace pohozaev;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
    const fs::path p = fs::temp_directory_path() / "pohozaev_test_run" / name;
    fs::remove_all(p);
    return p;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

nlohmann::json summary(const fs::path& dir) { return nlohmann::json::parse(slurp(dir / "summary.json")); }

RunConfig config(const std::string& file, const fs::path& out, std::vector<std::string> extra = {}) {
    extra.push_back("output.directory=" + out.string());
    return load_config(std::string(POHOZAEV_CONFIG_DIR) + "/" + file, extra);
}

RunResult quiet(const RunConfig& cfg) {
    std::ostringstream log;
    return run(cfg, log);
}

}  // namespace

TEST_CASE("exit codes are distinct per error class") {
    CHECK(exit_code(ErrorKind::Io) == 1);
    CHECK(exit_code(ErrorKind::ParseError) == 2);
    CHECK(exit_code(ErrorKind::ValidationError) == 2);
    CHECK(exit_code(ErrorKind::NonadmissibleExponents) == 3);
    CHECK(exit_code(ErrorKind::PhiNeverPositive) == 4);
    CHECK(exit_code(ErrorKind::NoConvergence) == 5);
    CHECK(exit_code(ErrorKind::GridTooCoarse) == 6);
    CHECK(exit_code(ErrorKind::BracketNotFound) == 8);
    CHECK(exit_code(ErrorKind::NonFiniteValue) == 9);
}

TEST_CASE("solve on the classical benchmark writes every artifact") {
    const fs::path dir = scratch("classical");
    const RunResult r = quiet(config("classical.yaml", dir));
    REQUIRE(r.exit_code == 0);
    for (const char* f : {"solution.csv", "trace.csv", "fiber.csv", "report.txt", "summary.json"})
        CHECK_MESSAGE(fs::exists(dir / f), f);
    const auto s = summary(dir);
    CHECK(s["partial"] == false);
    const double oracle = shooting_oracle(3, NonlinearitySpec::builtin("cubic")).energy();
    CHECK(s["solve"]["energy"].get<double>() == doctest::Approx(oracle).epsilon(5e-3));
    CHECK(s["solve"]["converged"] == true);
    CHECK(slurp(dir / "trace.csv").rfind("iter,energy,K,el_residual,step,t_star,halvings,symmetrized\n", 0) == 0);
    const GridFunction u = read_csv(dir / "solution.csv");
    CHECK(u.size() == 4097);

    SUBCASE("fiber on the stored profile marks t*") {
        const fs::path fdir = scratch("classical_fiber");
        const RunResult f = quiet(config("classical.yaml", fdir, {"command=fiber", "fiber.profile=" + (dir / "solution.csv").string()}));
        REQUIRE(f.exit_code == 0);
        std::istringstream csv(slurp(fdir / "fiber.csv"));
        std::string line;
        std::getline(csv, line);
        CHECK(line == "t,h,K,is_t_star");
        int marked = 0, rows = 0;
        double t_star = 0.0;
        while (std::getline(csv, line)) {
            ++rows;
            if (line.back() == '1') {
                ++marked;
                t_star = std::stod(line.substr(0, line.find(',')));
            }
        }
        CHECK(rows == 1001);
        CHECK(marked == 1);
        // the stored solution is already on the Pohozaev set
        CHECK(t_star == doctest::Approx(1.0).epsilon(1e-6));
    }
}

TEST_CASE("reruns with the same seed are byte identical") {
    const fs::path a = scratch("rerun_a"), b = scratch("rerun_b");
    const std::vector<std::string> small{"grid.M=512"};
    REQUIRE(quiet(config("classical.yaml", a, small)).exit_code == 0);
    REQUIRE(quiet(config("classical.yaml", b, small)).exit_code == 0);
    for (const auto& e : fs::directory_iterator(a)) {
        const std::string name = e.path().filename().string();
        if (name == "summary.json") {
            auto sa = summary(a), sb = summary(b);
            sa.erase("config");
            sb.erase("config");
            CHECK(sa == sb);
        } else {
            CHECK_MESSAGE(slurp(e.path()) == slurp(b / name), name);
        }
    }
}

TEST_CASE("failures map to exit codes and flag partial artifacts") {
    const fs::path dir = scratch("capped");
    const RunResult r = quiet(config("classical.yaml", dir, {"grid.M=512", "solver.max_iters=2"}));
    CHECK(r.exit_code == ExitNoConvergence);
    CHECK(summary(dir)["partial"] == true);
    CHECK(fs::exists(dir / "solution.csv"));

    const fs::path z = scratch("zero");
    CHECK(quiet(config("classical.yaml", z, {"grid.M=512", "problem.nonlinearity=zero"})).exit_code == ExitPhi);
    CHECK(summary(z)["partial"] == true);

    const fs::path missing = scratch("missing");
    const RunResult m = quiet(config("classical.yaml", missing, {"command=fiber", "fiber.profile=/nonexistent.csv"}));
    CHECK(m.exit_code == ExitIo);
}

TEST_CASE("relative output directories resolve under the output root") {
    const fs::path root = scratch("root");
    fs::create_directories(root);
    setenv("POHOZAEV_OUTPUT_ROOT", root.c_str(), 1);
    RunConfig cfg = config("classical.yaml", "ignored", {"grid.M=256", "command=fiber"});
    cfg.output.directory = "rel/run";
    const RunResult r = quiet(cfg);
    unsetenv("POHOZAEV_OUTPUT_ROOT");
    CHECK(r.exit_code == 0);
    CHECK(r.directory == root / "rel/run");
    CHECK(fs::exists(root / "rel/run/fiber.csv"));
}

TEST_CASE("output formats select the artifacts") {
    const fs::path dir = scratch("formats");
    REQUIRE(quiet(config("classical.yaml", dir, {"grid.M=256", "command=fiber", "output.formats=[json]"})).exit_code == 0);
    CHECK(fs::exists(dir / "summary.json"));
    CHECK_FALSE(fs::exists(dir / "fiber.csv"));
    CHECK_FALSE(fs::exists(dir / "report.txt"));
}

TEST_CASE("check-hypotheses exits zero when every hard check passes") {
    const fs::path dir = scratch("check");
    const RunResult r = quiet(config("anisotropic.yaml", dir, {"command=check-hypotheses", "hypotheses.samples=20"}));
    CHECK(r.exit_code == 0);
    const auto s = summary(dir);
    CHECK(s["hypotheses"]["hard_pass"] == true);
    CHECK(s["hypotheses"]["entries"].size() == 14);
    CHECK(slurp(dir / "report.txt").find("[surrogate]") != std::string::npos);
}

TEST_CASE("sweep writes a combined table and per-entry directories") {
    const fs::path dir = scratch("sweep");
    const RunResult r = quiet(config("sweep.yaml", dir, {"sweep.values=[256, 512, 1024]"}));
    CHECK(r.exit_code == 0);
    std::istringstream csv(slurp(dir / "sweep.csv"));
    std::string line;
    std::getline(csv, line);
    CHECK(line == "index,value,exit_code,energy,K_relative,el_residual,iterations,converged");
    int rows = 0;
    while (std::getline(csv, line)) {
        CHECK(line.rfind(std::to_string(rows) + ",", 0) == 0);
        ++rows;
    }
    CHECK(rows == 3);
    for (int k = 0; k < 3; ++k) CHECK(fs::exists(dir / ("entry_" + std::to_string(k)) / "solution.csv"));
    // finer grids approach the oracle
    const auto s = summary(dir)["sweep"]["entries"];
    const double oracle = shooting_oracle(3, NonlinearitySpec::builtin("cubic")).energy();
    const double e0 = s[0]["summary"]["solve"]["energy"].get<double>();
    const double e2 = s[2]["summary"]["solve"]["energy"].get<double>();
    CHECK(std::abs(e2 - oracle) < std::abs(e0 - oracle));
}

TEST_CASE("jump nonlinearities take the discontinuous route") {
    const fs::path dir = scratch("jump");
    const RunResult r = quiet(config("jump.yaml", dir, {"grid.M=1024"}));
    CHECK(r.exit_code == 0);
    CHECK(fs::exists(dir / "stages.csv"));
    const auto s = summary(dir);
    CHECK(s["route"] == "discontinuous");
    CHECK(s["inclusion"]["below_tolerance"] == true);
    CHECK(s["inclusion"]["monotone"] == true);
    CHECK(s["inclusion"]["stages"].size() == 4);
}
