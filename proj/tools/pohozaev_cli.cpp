#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "pohozaev/config.hpp"
#include "pohozaev/run.hpp"

using namespace pohozaev;

namespace {

int execute(Command command, const std::string& path, const std::vector<std::string>& overrides, bool print_config) {
    RunConfig cfg;
    try {
        cfg = load_config(path, overrides);
    } catch (const ConfigError& e) {
        std::cerr << path << ": " << e.what() << '\n';
        return exit_code(e.kind());
    } catch (const Error& e) {
        std::cerr << e.what() << '\n';
        return exit_code(e.kind());
    }
    cfg.command = command;
    if (command == Command::Sweep && (cfg.sweep.parameter.empty() || cfg.sweep.values.empty())) {
        std::cerr << path << ": sweep needs a parameter and a nonempty values list\n";
        return ExitConfig;
    }
    if (print_config) {
        std::cout << emit_config(cfg);
        return ExitOk;
    }
    const RunResult res = run(cfg, std::cout);
    std::cout << "output: " << res.directory.string() << '\n';
    if (res.exit_code != ExitOk) std::cerr << "error (exit " << res.exit_code << "): " << res.message << '\n';
    return res.exit_code;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Ground states by energy minimization over the Pohozaev set"};
    app.require_subcommand(1);
    app.footer(
        "Exit codes: 0 ok, 1 io, 2 config parse/validation, 3 nonadmissible exponents, 4 Phi not positive,\n"
        "5 no convergence, 6 grid too coarse, 7 hypothesis failure, 8 no bracket, 9 non-finite value,\n"
        "10 unexpected. Relative output directories resolve under $POHOZAEV_OUTPUT_ROOT.");

    std::string path;
    std::vector<std::string> overrides;
    bool print_config = false;
    struct Sub {
        const char* name;
        Command command;
        const char* help;
    };
    const Sub subs[] = {
        {"solve", Command::Solve, "Compute the ground state"},
        {"fiber", Command::Fiber, "Tabulate the fiber map of a stored profile or the initial guess"},
        {"check-hypotheses", Command::CheckHypotheses, "Run the hypothesis checklist on the configured family"},
        {"sweep", Command::Sweep, "Solve once per value of the swept parameter"},
    };
    std::vector<std::pair<CLI::App*, Command>> parsed;
    for (const auto& s : subs) {
        CLI::App* sub = app.add_subcommand(s.name, s.help);
        sub->add_option("config", path, "YAML configuration file")->required()->check(CLI::ExistingFile);
        sub->add_option("--set", overrides, "Override a key, e.g. --set grid.M=8192")->type_name("PATH=VALUE");
        sub->add_flag("--print-config", print_config, "Print the validated canonical configuration and exit");
        parsed.emplace_back(sub, s.command);
    }
    CLI11_PARSE(app, argc, argv);
    for (const auto& [sub, command] : parsed)
        if (sub->parsed()) return execute(command, path, overrides, print_config);
    return ExitConfig;
}
