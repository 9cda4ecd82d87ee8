#include "pohozaev/run.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <mutex>
#include <optional>
#include <ostream>
#include <sstream>
#include <thread>

#include "json.hpp"
#include "pohozaev/harness.hpp"
#include "pohozaev/nonlinearity.hpp"
#include "pohozaev/solver.hpp"

namespace pohozaev {

namespace fs = std::filesystem;
using nlohmann::ordered_json;

int exit_code(ErrorKind kind) {
    switch (kind) {
        case ErrorKind::Io: return ExitIo;
        case ErrorKind::ParseError:
        case ErrorKind::ValidationError:
        case ErrorKind::EpsilonTooLarge: return ExitConfig;
        case ErrorKind::NonadmissibleExponents: return ExitNonadmissible;
        case ErrorKind::PhiNonpositive:
        case ErrorKind::PhiNeverPositive: return ExitPhi;
        case ErrorKind::NoConvergence:
        case ErrorKind::NotOnManifold: return ExitNoConvergence;
        case ErrorKind::GridTooCoarse: return ExitGridTooCoarse;
        case ErrorKind::BracketNotFound: return ExitBracket;
        case ErrorKind::NonFiniteValue: return ExitNonFinite;
        case ErrorKind::MissingGradient: return ExitUnexpected;
    }
    return ExitUnexpected;
}

fs::path output_directory(const OutputConfig& out) {
    fs::path dir(out.directory);
    if (dir.is_relative()) {
        if (const char* root = std::getenv("POHOZAEV_OUTPUT_ROOT"); root && *root) dir = fs::path(root) / dir;
    }
    return dir;
}

namespace {

// Collects artifacts of one run directory.
class Sink {
public:
    Sink(fs::path dir, const OutputConfig& out) : dir_(std::move(dir)), out_(out) {}

    void text(const std::string& name, const std::string& format, const std::string& body) {
        if (!out_.wants(format)) return;
        fs::create_directories(dir_);
        std::ofstream f(dir_ / name, std::ios::binary);
        f << body;
        if (!f) throw Error(ErrorKind::Io, "cannot write " + (dir_ / name).string());
        names_.push_back(name);
    }
    void csv(const std::string& name, const std::string& body) { text(name, "csv", body); }

    const fs::path& dir() const { return dir_; }
    const std::vector<std::string>& names() const { return names_; }

private:
    fs::path dir_;
    const OutputConfig& out_;
    std::vector<std::string> names_;
};

std::string d(double x) { return format_double(x); }

ordered_json doubles(const std::vector<double>& v) {
    ordered_json a = ordered_json::array();
    for (double x : v) a.push_back(std::isfinite(x) ? ordered_json(x) : ordered_json(nullptr));
    return a;
}

ordered_json num(double x) { return std::isfinite(x) ? ordered_json(x) : ordered_json(nullptr); }

std::string trace_csv(const SolveReport& r) {
    std::ostringstream os;
    os << "iter,energy,K,el_residual,step,t_star,halvings,symmetrized\n";
    for (const auto& t : r.trace)
        os << t.iter << ',' << d(t.energy) << ',' << d(t.K) << ',' << d(t.el_residual) << ',' << d(t.step) << ','
           << d(t.t_star) << ',' << t.halvings << ',' << (t.symmetrized ? 1 : 0) << '\n';
    return os.str();
}

// Rows t, h(t), K(u_t) with the exact t* inserted and marked.
std::string fiber_csv(const FunctionalFamily& fam, const GridFunction& u, const FiberConfig& fc, FiberProfile* out) {
    std::vector<double> ts = log_spaced(fc.t_min, fc.t_max, fc.points);
    const DilationAction act = DilationAction::grid_dilation();
    const FiberProfile first = fiber(fam, act, u, ts);
    ts.insert(std::upper_bound(ts.begin(), ts.end(), first.t_star), first.t_star);
    const FiberProfile p = fiber(fam, act, u, ts);
    std::ostringstream os;
    os << "t,h,K,is_t_star\n";
    bool marked = false;
    for (std::size_t i = 0; i < ts.size(); ++i) {
        const bool star = !marked && ts[i] == p.t_star;
        marked = marked || star;
        os << d(ts[i]) << ',' << d(p.h_values[i]) << ',' << d(p.k_values[i]) << ',' << (star ? 1 : 0) << '\n';
    }
    if (out) *out = p;
    return os.str();
}

double identity_gap(const FunctionalFamily& fam, const SolveReport& r) {
    double rhs = 0.0;
    for (std::size_t i = 0; i < r.psi.size(); ++i) rhs += (1.0 - fam.lambdas[i] / fam.lambda_phi) * r.psi[i];
    return std::abs(r.energy - rhs) / std::max(std::abs(r.energy), 1e-300);
}

ordered_json solve_json(const FunctionalFamily& fam, const SolveReport& r) {
    ordered_json j;
    j["energy"] = num(r.energy);
    j["psi"] = doubles(r.psi);
    j["phi"] = num(r.phi);
    j["K"] = num(r.K_value);
    j["K_relative"] = num(r.K_relative);
    j["el_residual"] = num(r.el_residual);
    j["el_residual_raw"] = num(r.el_raw);
    j["el_tau"] = num(r.el_tau);
    j["identity_gap"] = num(identity_gap(fam, r));
    j["iterations"] = r.iterations;
    j["stop"] = stop_reason_name(r.stop);
    j["converged"] = r.converged;
    j["monotone"] = r.monotone;
    j["max_energy_increase"] = num(r.max_energy_increase);
    if (r.delta > 0.0) j["delta"] = num(r.delta);
    return j;
}

std::string solve_text(const RunConfig& cfg, const FunctionalFamily& fam, const SolveReport& r) {
    std::ostringstream os;
    os << "command: " << command_name(cfg.command) << "\nproblem: " << r.problem << "\nfamily: " << fam.name
       << "\nN: " << cfg.problem.N << "\nnonlinearity: " << cfg.instance().nonlinearity.name << "\ngrid: "
       << grid_kind_name(cfg.grid.kind) << " R=" << d(cfg.grid.R) << " M=" << cfg.grid.M << "\nseed: " << cfg.seed
       << "\n\nenergy: " << d(r.energy) << "\nphi: " << d(r.phi) << '\n';
    for (std::size_t i = 0; i < r.psi.size(); ++i) os << "psi_" << i + 1 << ": " << d(r.psi[i]) << '\n';
    os << "K: " << d(r.K_value) << "\nK_relative: " << d(r.K_relative) << "\nel_residual: " << d(r.el_residual)
       << " (tau " << d(r.el_tau) << ")\nel_residual_raw: " << d(r.el_raw)
       << "\nidentity_gap: " << d(identity_gap(fam, r)) << "\niterations: " << r.iterations
       << "\nstop: " << stop_reason_name(r.stop) << "\nconverged: " << (r.converged ? "yes" : "no")
       << "\nmonotone: " << (r.monotone ? "yes" : "no") << '\n';
    return os.str();
}

std::string nonlinearity_text(const ProblemInstance& inst) {
    const NonlinearityReport rep = validate_nonlinearity(inst.nonlinearity, inst.critical_q());
    std::ostringstream os;
    os << "\nnonlinearity conditions:\n";
    for (const auto& c : rep.conditions) {
        os << "  " << c.name << ": " << (c.passed ? "pass" : "FAIL") << (c.advisory ? " (advisory)" : "");
        if (!c.passed && !c.witness.empty()) os << "  " << c.witness;
        os << '\n';
    }
    return os.str();
}

void write_json(Sink& sink, const ordered_json& j) { sink.text("summary.json", "json", j.dump(2) + "\n"); }

// Writes solution, trace, fiber and report for a finished or partial solve.
void emit_solve(Sink& sink, const RunConfig& cfg, const ProblemInstance& inst, const FunctionalFamily& fam,
                const SolveReport& r, ordered_json& summary, std::string& report) {
    sink.csv("solution.csv", to_csv(r.u));
    sink.csv("trace.csv", trace_csv(r));
    summary["solve"] = solve_json(fam, r);
    report += solve_text(cfg, fam, r);
    try {
        FiberProfile p;
        sink.csv("fiber.csv", fiber_csv(fam, r.u, cfg.fiber, &p));
        summary["fiber"] = {{"t_star", num(p.t_star)}, {"h_star", num(p.h_star)}};
    } catch (const Error& e) {
        report += std::string("fiber: not written (") + e.what() + ")\n";
    }
    (void)inst;
}

struct Outcome {
    int code = ExitOk;
    std::string message;
};

Outcome run_solve(const RunConfig& cfg, Sink& sink, ordered_json& summary, std::string& report, std::ostream& log) {
    const ProblemInstance inst = cfg.instance();
    const FunctionalFamily fam = build_family(inst);
    if (inst.nonlinearity.has_jumps()) {
        summary["route"] = "discontinuous";
        DiscontinuousReport dr = solve_discontinuous(inst, cfg.epsilon_schedule, cfg.solver, cfg.inclusion_tol);
        std::ostringstream st;
        st << "epsilon,energy,violation,support,el_residual,iterations\n";
        ordered_json stages = ordered_json::array();
        bool monotone = true;
        for (std::size_t i = 0; i < dr.stages.size(); ++i) {
            const auto& s = dr.stages[i];
            st << d(s.epsilon) << ',' << d(s.energy) << ',' << d(s.violation) << ',' << d(s.support) << ','
               << d(s.el_residual) << ',' << s.iterations << '\n';
            stages.push_back({{"epsilon", num(s.epsilon)},
                              {"energy", num(s.energy)},
                              {"violation", num(s.violation)},
                              {"support", num(s.support)},
                              {"el_residual", num(s.el_residual)},
                              {"iterations", s.iterations}});
            if (i > 0 && s.violation > dr.stages[i - 1].violation) monotone = false;
        }
        sink.csv("stages.csv", st.str());
        const auto& last = dr.stages.back();
        const bool small = last.violation < dr.inclusion_tol * last.support;
        summary["inclusion"] = {{"stages", stages},
                                {"final_violation", num(last.violation)},
                                {"support", num(last.support)},
                                {"relative_violation", num(last.violation / std::max(last.support, 1e-300))},
                                {"below_tolerance", small},
                                {"monotone", monotone}};
        emit_solve(sink, cfg, inst, fam, dr.final, summary, report);
        std::ostringstream os;
        os << "\ninclusion: violation " << d(last.violation) << " of support " << d(last.support)
           << (small ? " (below " : " (above ") << d(dr.inclusion_tol) << " relative), "
           << (monotone ? "non-increasing" : "NOT monotone") << " along the schedule\n";
        report += os.str();
        log << "energy " << d(dr.final.energy) << ", inclusion violation " << d(last.violation) << '\n';
    } else {
        summary["route"] = "smooth";
        const SolveReport r = solve(inst, cfg.solver);
        emit_solve(sink, cfg, inst, fam, r, summary, report);
        log << "energy " << d(r.energy) << ", EL residual " << d(r.el_residual) << ", " << r.iterations
            << " iterations\n";
    }
    report += nonlinearity_text(inst);
    return {};
}

Outcome run_fiber(const RunConfig& cfg, Sink& sink, ordered_json& summary, std::string& report, std::ostream& log) {
    const ProblemInstance inst = cfg.instance();
    const FunctionalFamily fam = build_family(inst);
    const GridFunction u = cfg.fiber.profile.empty() ? initial_guess(inst, inst.make_grid()) : read_csv(cfg.fiber.profile);
    FiberProfile p;
    sink.csv("fiber.csv", fiber_csv(fam, u, cfg.fiber, &p));
    summary["fiber"] = {{"profile", cfg.fiber.profile.empty() ? "initial_guess" : cfg.fiber.profile},
                        {"t_star", num(p.t_star)},
                        {"h_star", num(p.h_star)},
                        {"K_residual", num(p.k_residual)},
                        {"K_relative", num(p.k_residual / std::max(p.k_scale, 1e-300))},
                        {"tail_negative", p.tail_negative}};
    std::ostringstream os;
    os << "command: fiber\nfamily: " << fam.name << "\nprofile: "
       << (cfg.fiber.profile.empty() ? "initial guess" : cfg.fiber.profile) << "\nt_star: " << d(p.t_star)
       << "\nh(t_star): " << d(p.h_star) << "\n|K(u_t_star)|: " << d(p.k_residual)
       << "\nh < 0 at t_max: " << (p.tail_negative ? "yes" : "no") << '\n';
    report += os.str();
    log << "t* = " << d(p.t_star) << ", h(t*) = " << d(p.h_star) << '\n';
    return {};
}

Outcome run_check(const RunConfig& cfg, Sink& sink, ordered_json& summary, std::string& report, std::ostream& log) {
    const ProblemInstance inst = cfg.instance();
    const HypothesisReport rep = check_hypotheses(inst, cfg.hypotheses);
    ordered_json entries = ordered_json::array();
    for (const auto& e : rep.entries) {
        ordered_json j = {{"name", e.name},
                          {"description", e.description},
                          {"samples", e.samples},
                          {"worst_margin", num(e.worst_margin)},
                          {"passed", e.passed},
                          {"surrogate", e.surrogate}};
        if (!e.passed) {
            j["witness"] = e.witness;
            if (!e.witness_u.values.empty()) {
                const std::string name = "witness_" + e.name + ".csv";
                sink.csv(name, to_csv(e.witness_u));
                j["witness_file"] = name;
            }
        }
        entries.push_back(std::move(j));
    }
    summary["hypotheses"] = {{"family", rep.family}, {"seed", rep.seed}, {"hard_pass", rep.hard_pass()}, {"entries", entries}};
    report += to_text(rep);
    log << "hypotheses: " << (rep.hard_pass() ? "pass" : "FAIL") << '\n';
    if (!rep.hard_pass()) return {ExitHypothesis, "a non-surrogate hypothesis check failed"};
    return {};
}

Outcome run_one(const RunConfig& cfg, const fs::path& dir, std::ostream& log, std::vector<std::string>* names,
                ordered_json* summary_out);

Outcome run_sweep(const RunConfig& cfg, Sink& sink, ordered_json& summary, std::string& report, std::ostream& log) {
    RunConfig base = cfg;
    base.command = Command::Solve;
    base.sweep = SweepConfig{};
    const std::size_t n = cfg.sweep.values.size();
    std::vector<Outcome> outcomes(n);
    std::vector<ordered_json> results(n);
    std::vector<std::string> logs(n);
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t k = next++; k < n; k = next++) {
            std::ostringstream lg;
            try {
                RunConfig entry = with_override(base, cfg.sweep.parameter, cfg.sweep.values[k]);
                outcomes[k] = run_one(entry, sink.dir() / ("entry_" + std::to_string(k)), lg, nullptr, &results[k]);
            } catch (const Error& e) {
                outcomes[k] = {exit_code(e.kind()), e.what()};
            } catch (const std::exception& e) {
                outcomes[k] = {ExitUnexpected, e.what()};
            }
            logs[k] = lg.str();
        }
    };
    const std::size_t threads = std::min(cfg.sweep.parallelism, std::max<std::size_t>(n, 1));
    std::vector<std::thread> pool;
    for (std::size_t i = 1; i < threads; ++i) pool.emplace_back(worker);
    worker();
    for (auto& t : pool) t.join();

    std::ostringstream table, text;
    table << "index,value,exit_code,energy,K_relative,el_residual,iterations,converged\n";
    text << "command: sweep\nparameter: " << cfg.sweep.parameter << "\nentries: " << n << "\n\n";
    ordered_json rows = ordered_json::array();
    int worst = ExitOk;
    for (std::size_t k = 0; k < n; ++k) {
        const ordered_json& s = results[k].contains("solve") ? results[k]["solve"] : ordered_json::object();
        auto field = [&](const char* key) -> std::string {
            if (!s.contains(key) || s[key].is_null()) return "";
            if (s[key].is_boolean()) return s[key].get<bool>() ? "1" : "0";
            if (s[key].is_number_integer()) return std::to_string(s[key].get<long long>());
            return d(s[key].get<double>());
        };
        std::string value = cfg.sweep.values[k];
        if (value.find_first_of(",\"") != std::string::npos) {
            std::string q = "\"";
            for (char c : value) q += c == '"' ? std::string("\"\"") : std::string(1, c);
            value = q + "\"";
        }
        table << k << ',' << value << ',' << outcomes[k].code << ',' << field("energy") << ','
              << field("K_relative") << ',' << field("el_residual") << ',' << field("iterations") << ','
              << field("converged") << '\n';
        text << "entry " << k << " (" << cfg.sweep.parameter << " = " << cfg.sweep.values[k]
             << "): exit " << outcomes[k].code;
        if (s.contains("energy") && !s["energy"].is_null()) text << ", energy " << d(s["energy"].get<double>());
        if (!outcomes[k].message.empty()) text << ", " << outcomes[k].message;
        text << '\n';
        rows.push_back({{"index", k},
                        {"value", cfg.sweep.values[k]},
                        {"directory", "entry_" + std::to_string(k)},
                        {"exit_code", outcomes[k].code},
                        {"summary", results[k]}});
        worst = std::max(worst, outcomes[k].code);
        log << logs[k];
    }
    sink.csv("sweep.csv", table.str());
    summary["sweep"] = {{"parameter", cfg.sweep.parameter}, {"entries", rows}};
    report += text.str();
    if (worst != ExitOk) return {worst, "at least one sweep entry failed"};
    return {};
}

Outcome run_one(const RunConfig& cfg, const fs::path& dir, std::ostream& log, std::vector<std::string>* names,
                ordered_json* summary_out) {
    Sink sink(dir, cfg.output);
    ordered_json summary;
    summary["command"] = command_name(cfg.command);
    summary["seed"] = cfg.seed;
    summary["partial"] = false;
    std::string report;
    Outcome out;
    try {
        switch (cfg.command) {
            case Command::Solve: out = run_solve(cfg, sink, summary, report, log); break;
            case Command::Fiber: out = run_fiber(cfg, sink, summary, report, log); break;
            case Command::CheckHypotheses: out = run_check(cfg, sink, summary, report, log); break;
            case Command::Sweep: out = run_sweep(cfg, sink, summary, report, log); break;
        }
    } catch (const NoConvergence& e) {
        const ProblemInstance inst = cfg.instance();
        const FunctionalFamily fam = build_family(inst);
        out = {ExitNoConvergence, e.what()};
        summary["partial"] = true;
        try {
            emit_solve(sink, cfg, inst, fam, e.report(), summary, report);
        } catch (const Error&) {
        }
    } catch (const Error& e) {
        out = {exit_code(e.kind()), e.what()};
        summary["partial"] = true;
    } catch (const fs::filesystem_error& e) {
        out = {ExitIo, e.what()};
        summary["partial"] = true;
    } catch (const std::exception& e) {
        out = {ExitUnexpected, e.what()};
        summary["partial"] = true;
    }
    summary["exit_code"] = out.code;
    if (!out.message.empty()) {
        summary["error"] = out.message;
        report += "\nerror: " + out.message + "\n";
    }
    summary["config"] = emit_config(cfg);
    summary["artifacts"] = sink.names();
    try {
        sink.text("report.txt", "txt", report);
        write_json(sink, summary);
    } catch (const Error& e) {
        if (out.code == ExitOk) out = {ExitIo, e.what()};
    } catch (const fs::filesystem_error& e) {
        if (out.code == ExitOk) out = {ExitIo, e.what()};
    }
    if (names) *names = sink.names();
    if (summary_out) *summary_out = std::move(summary);
    return out;
}

}  // namespace

RunResult run(const RunConfig& cfg, std::ostream& log) {
    RunResult res;
    res.directory = output_directory(cfg.output);
    try {
        fs::create_directories(res.directory);
    } catch (const fs::filesystem_error& e) {
        res.exit_code = ExitIo;
        res.message = e.what();
        return res;
    }
    const Outcome out = run_one(cfg, res.directory, log, &res.artifacts, nullptr);
    res.exit_code = out.code;
    res.message = out.message;
    return res;
}

}  // namespace pohozaev
