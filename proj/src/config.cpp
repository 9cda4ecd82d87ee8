#include "pohozaev/config.hpp"

#include <yaml-cpp/yaml.h>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <optional>
#include <set>
#include <sstream>

namespace pohozaev {

const char* command_name(Command c) {
    switch (c) {
        case Command::Solve: return "solve";
        case Command::Fiber: return "fiber";
        case Command::CheckHypotheses: return "check-hypotheses";
        case Command::Sweep: return "sweep";
    }
    return "?";
}

NonlinearitySpec NonlinearityConfig::build() const {
    NonlinearitySpec spec = builtin.empty() ? NonlinearitySpec::table(segments, name) : NonlinearitySpec::builtin(builtin);
    if (!jumps.empty()) {
        std::vector<Segment> segs = spec.segments();
        std::string label = spec.name;
        for (const auto& [a, h] : jumps) {
            if (!(a > 0.0) || !std::isfinite(h) || h == 0.0)
                throw Error(ErrorKind::ValidationError, "jumps need a > 0 and a nonzero finite height");
            auto it = std::find_if(segs.begin(), segs.end(), [a = a](const Segment& s) { return s.start >= a; });
            if (it == segs.end() || it->start != a) {
                // Split the segment that contains a.
                const Segment& host = *std::prev(it);
                it = segs.insert(it, Segment{a, host.terms});
            }
            for (; it != segs.end(); ++it) it->terms.push_back(Monomial{h, 0.0});
            label += "+jump(" + format_double(a) + "," + format_double(h) + ")";
        }
        spec = NonlinearitySpec::table(std::move(segs), label);
    }
    if (tau) spec.tau = *tau;
    return spec;
}

bool OutputConfig::wants(const std::string& f) const {
    return std::find(formats.begin(), formats.end(), f) != formats.end();
}

ProblemInstance RunConfig::instance() const {
    ProblemInstance inst;
    inst.kind = problem.family;
    inst.N = problem.N;
    inst.exponents = problem.exponents;
    inst.nonlinearity = problem.nonlinearity.build();
    inst.grid = grid;
    inst.delta = problem.delta;
    return inst;
}

namespace {

std::string describe(ErrorKind kind, const std::vector<ConfigIssue>& issues) {
    std::ostringstream os;
    os << issues.size() << (issues.size() == 1 ? " problem" : " problems") << " in the configuration";
    for (const auto& i : issues) {
        os << "\n  ";
        if (i.line > 0) os << "line " << i.line << ", column " << i.column << ": ";
        os << i.message;
    }
    (void)kind;
    return os.str();
}

// Missing keys yield a proper Undefined node instead of yaml-cpp's zombie,
// on which most accessors throw.
YAML::Node child(const YAML::Node& map, const char* key) {
    if (map.IsDefined() && map.IsMap())
        if (const YAML::Node n = map[key]; n.IsDefined()) return n;
    return YAML::Node(YAML::NodeType::Undefined);
}

class Reader {
public:
    std::vector<ConfigIssue> parse, valid;
    std::optional<ErrorKind> instance_kind;  // kind raised by the instance checks

    void parse_issue(const YAML::Node& at, const std::string& msg) { parse.push_back(issue(at, msg)); }
    void validation(const YAML::Node& at, const std::string& msg) { valid.push_back(issue(at, msg)); }

    // Reports keys of `map` outside `known` as unknown keys of `section`.
    void keys(const YAML::Node& map, const std::string& section, std::initializer_list<const char*> known) {
        if (!map.IsDefined() || map.IsNull()) return;
        if (!map.IsMap()) {
            parse_issue(map, "section '" + section + "' must be a mapping");
            return;
        }
        const std::set<std::string> ok(known.begin(), known.end());
        for (const auto& kv : map) {
            const std::string k = kv.first.Scalar();
            if (!ok.count(k)) parse_issue(kv.first, "unknown key '" + k + "' in section '" + section + "'");
        }
    }

    template <class T>
    bool get(const YAML::Node& map, const char* key, T& out, const std::string& section) {
        if (!map.IsDefined() || !map.IsMap()) return false;
        const YAML::Node n = child(map, key);
        if (!n.IsDefined() || n.IsNull()) return false;
        try {
            out = n.as<T>();
            return true;
        } catch (const YAML::Exception&) {
            parse_issue(n, section + "." + key + ": expected " + type_name<T>());
            return false;
        }
    }

    bool get_count(const YAML::Node& map, const char* key, std::size_t& out, const std::string& section) {
        long long v = 0;
        if (!get(map, key, v, section)) return false;
        if (v < 0) {
            validation(child(map, key), section + "." + key + " must be >= 0");
            return false;
        }
        out = static_cast<std::size_t>(v);
        return true;
    }

private:
    static ConfigIssue issue(const YAML::Node& at, const std::string& msg) {
        ConfigIssue i;
        i.message = msg;
        if (at.IsDefined()) {
            const YAML::Mark m = at.Mark();
            if (m.line >= 0) {
                i.line = m.line + 1;
                i.column = m.column + 1;
            }
        }
        return i;
    }

    template <class T>
    static const char* type_name() {
        if constexpr (std::is_same_v<T, double>) return "a number";
        else if constexpr (std::is_same_v<T, std::string>) return "a string";
        else if constexpr (std::is_same_v<T, std::vector<double>>) return "a list of numbers";
        else if constexpr (std::is_same_v<T, std::vector<std::string>>) return "a list of strings";
        else if constexpr (std::is_integral_v<T>) return "an integer";
        else return "a value of another type";
    }
};

std::vector<std::string> split(const std::string& s, char c) {
    std::vector<std::string> out;
    std::string cur;
    for (char ch : s) {
        if (ch == c) {
            out.push_back(cur);
            cur.clear();
        } else {
            cur += ch;
        }
    }
    out.push_back(cur);
    return out;
}

void apply_override(YAML::Node root, const std::string& path, const YAML::Node& value) {
    const auto parts = split(path, '.');
    YAML::Node cur = root;
    for (std::size_t i = 0; i + 1 < parts.size(); ++i) {
        YAML::Node next = cur[parts[i]];
        if (!next.IsMap()) {
            cur[parts[i]] = YAML::Node(YAML::NodeType::Map);
            next = cur[parts[i]];
        }
        cur.reset(next);
    }
    cur[parts.back()] = value;
}

std::string flow_text(const YAML::Node& n) {
    YAML::Emitter e;
    e << YAML::Flow << n;
    return e.c_str();
}

void read_nonlinearity(Reader& r, const YAML::Node& n, NonlinearityConfig& out) {
    if (!n.IsDefined() || n.IsNull()) return;
    if (n.IsScalar()) {
        out = NonlinearityConfig{};
        out.builtin = n.Scalar();
        return;
    }
    if (!n.IsMap()) {
        r.parse_issue(n, "problem.nonlinearity must be a builtin name or a table mapping");
        return;
    }
    r.keys(n, "problem.nonlinearity", {"builtin", "name", "tau", "segments"});
    out = NonlinearityConfig{};
    out.builtin.clear();
    std::string b;
    if (r.get(n, "builtin", b, "problem.nonlinearity")) out.builtin = b;
    r.get(n, "name", out.name, "problem.nonlinearity");
    double tau = 0.0;
    if (r.get(n, "tau", tau, "problem.nonlinearity")) out.tau = tau;
    const YAML::Node segs = child(n, "segments");
    if (out.builtin.empty()) {
        if (!segs.IsDefined() || !segs.IsSequence() || segs.size() == 0) {
            r.parse_issue(n, "problem.nonlinearity needs 'builtin' or a nonempty 'segments' list");
            return;
        }
        for (const auto& s : segs) {
            r.keys(s, "problem.nonlinearity.segments", {"start", "terms"});
            Segment seg;
            r.get(s, "start", seg.start, "problem.nonlinearity.segments");
            const YAML::Node terms = child(s, "terms");
            if (terms.IsDefined() && !terms.IsSequence()) {
                r.parse_issue(terms, "segment terms must be a list of [coeff, power] pairs");
                continue;
            }
            if (terms.IsDefined()) {
                for (const auto& t : terms) {
                    try {
                        const auto cp = t.as<std::vector<double>>();
                        if (cp.size() != 2) throw YAML::Exception(t.Mark(), "pair");
                        seg.terms.push_back(Monomial{cp[0], cp[1]});
                    } catch (const YAML::Exception&) {
                        r.parse_issue(t, "segment terms must be [coeff, power] pairs");
                    }
                }
            }
            out.segments.push_back(std::move(seg));
        }
    } else if (segs.IsDefined()) {
        r.parse_issue(segs, "problem.nonlinearity: 'segments' and 'builtin' are exclusive");
    }
}

std::size_t default_points(const RunConfig& c) {
    if (c.grid.kind == GridKind::Radial) return 4096;
    switch (c.problem.N) {
        case 1: return 1024;
        case 2: return 256;
        default: return 64;
    }
}

RunConfig convert(const YAML::Node& root, Reader& r) {
    RunConfig c;
    if (!root.IsDefined() || root.IsNull()) {
        r.parse_issue(root, "empty configuration");
        return c;
    }
    if (!root.IsMap()) {
        r.parse_issue(root, "the configuration must be a mapping of sections");
        return c;
    }
    r.keys(root, "top level",
           {"command", "seed", "problem", "grid", "solver", "fiber", "hypotheses", "sweep", "output"});

    std::string cmd = "solve";
    r.get(root, "command", cmd, "top level");
    if (cmd == "solve") c.command = Command::Solve;
    else if (cmd == "fiber") c.command = Command::Fiber;
    else if (cmd == "check-hypotheses") c.command = Command::CheckHypotheses;
    else if (cmd == "sweep") c.command = Command::Sweep;
    else r.validation(child(root, "command"), "command must be one of solve, fiber, check-hypotheses, sweep (got '" + cmd + "')");
    long long seed = 0;
    if (r.get(root, "seed", seed, "top level")) {
        if (seed < 0) r.validation(child(root, "seed"), "seed must be >= 0");
        else c.seed = static_cast<std::uint64_t>(seed);
    }

    // problem
    const YAML::Node p = child(root, "problem");
    if (!p.IsDefined() || p.IsNull()) r.validation(root, "section 'problem' is required");
    r.keys(p, "problem", {"family", "N", "s", "p", "nonlinearity", "jumps", "delta"});
    std::string fam = "classical";
    r.get(p, "family", fam, "problem");
    if (fam == "fractional") c.problem.family = FamilyKind::FractionalSum;
    else if (fam == "anisotropic") c.problem.family = FamilyKind::Anisotropic;
    else if (fam == "classical") c.problem.family = FamilyKind::Classical;
    else r.validation(child(p, "family"), "problem.family must be fractional, anisotropic or classical (got '" + fam + "')");
    r.get(p, "N", c.problem.N, "problem");
    if (c.problem.N < 1) r.validation(child(p, "N"), "problem.N must be >= 1");
    std::vector<double> s, pl;
    const bool has_s = r.get(p, "s", s, "problem"), has_p = r.get(p, "p", pl, "problem");
    if (c.problem.family == FamilyKind::FractionalSum) {
        if (!has_s) r.validation(p, "problem.s is required for the fractional family");
        if (has_p) r.validation(child(p, "p"), "problem.p only applies to the anisotropic family");
        c.problem.exponents = s;
    } else if (c.problem.family == FamilyKind::Anisotropic) {
        if (!has_p) r.validation(p, "problem.p is required for the anisotropic family");
        if (has_s) r.validation(child(p, "s"), "problem.s only applies to the fractional family");
        c.problem.exponents = pl;
    } else if (has_s || has_p) {
        r.validation(has_s ? child(p, "s") : child(p, "p"), "the classical family takes no exponent list");
    }
    if (p.IsMap()) read_nonlinearity(r, child(p, "nonlinearity"), c.problem.nonlinearity);
    if (p.IsMap() && child(p, "jumps").IsDefined() && !child(p, "jumps").IsNull()) {
        const YAML::Node j = child(p, "jumps");
        if (!j.IsSequence()) r.parse_issue(j, "problem.jumps must be a list of [a, h] pairs");
        else
            for (const auto& e : j) {
                try {
                    const auto ah = e.as<std::vector<double>>();
                    if (ah.size() != 2) throw YAML::Exception(e.Mark(), "pair");
                    c.problem.nonlinearity.jumps.push_back({ah[0], ah[1]});
                } catch (const YAML::Exception&) {
                    r.parse_issue(e, "problem.jumps entries must be [a, h] pairs");
                }
            }
    }
    r.get(p, "delta", c.problem.delta, "problem");
    if (!(c.problem.delta >= 0.0)) r.validation(child(p, "delta"), "problem.delta must be >= 0");

    // grid
    const YAML::Node g = child(root, "grid");
    r.keys(g, "grid", {"kind", "R", "M"});
    c.grid.kind = c.problem.family == FamilyKind::Classical ? GridKind::Radial : GridKind::Box;
    std::string kind;
    if (r.get(g, "kind", kind, "grid")) {
        if (kind == "radial") c.grid.kind = GridKind::Radial;
        else if (kind == "box") c.grid.kind = GridKind::Box;
        else r.validation(child(g, "kind"), "grid.kind must be radial or box (got '" + kind + "')");
    }
    c.grid.R = (c.grid.kind == GridKind::Radial || c.problem.N == 1) ? 20.0 : 10.0;
    c.grid.M = default_points(c);
    r.get(g, "R", c.grid.R, "grid");
    r.get_count(g, "M", c.grid.M, "grid");
    if (!(c.grid.R > 0.0) || !std::isfinite(c.grid.R)) r.validation(child(g, "R"), "grid.R must be positive");
    if (c.grid.M < 8) r.validation(child(g, "M"), "grid.M must be >= 8");

    // solver
    const YAML::Node so = child(root, "solver");
    r.keys(so, "solver",
           {"max_iters", "initial_step", "backtrack", "armijo", "max_halvings", "tol_energy", "stall_window", "tol_el",
            "tol_K", "symmetrize_every", "memory", "anneal_delta", "epsilon_schedule", "inclusion_tol"});
    auto& o = c.solver;
    r.get_count(so, "max_iters", o.max_iters, "solver");
    r.get(so, "initial_step", o.initial_step, "solver");
    r.get(so, "backtrack", o.backtrack, "solver");
    r.get(so, "armijo", o.armijo, "solver");
    r.get(so, "max_halvings", o.max_halvings, "solver");
    r.get(so, "tol_energy", o.tol_energy, "solver");
    r.get_count(so, "stall_window", o.stall_window, "solver");
    r.get(so, "tol_el", o.tol_el, "solver");
    r.get(so, "tol_K", o.tol_K, "solver");
    r.get_count(so, "symmetrize_every", o.symmetrize_every, "solver");
    r.get_count(so, "memory", o.memory, "solver");
    r.get(so, "anneal_delta", o.anneal_delta, "solver");
    r.get(so, "epsilon_schedule", c.epsilon_schedule, "solver");
    r.get(so, "inclusion_tol", c.inclusion_tol, "solver");
    o.seed = c.seed;
    try {
        o.validate();
    } catch (const Error& e) {
        r.validation(so, std::string("solver: ") + e.what());
    }
    for (double e : c.epsilon_schedule)
        if (!(e > 0.0 && e < 0.5)) r.validation(child(so, "epsilon_schedule"), "solver.epsilon_schedule entries must lie in (0, 0.5)");
    if (!(c.inclusion_tol >= 0.0)) r.validation(child(so, "inclusion_tol"), "solver.inclusion_tol must be >= 0");

    // fiber
    const YAML::Node fi = child(root, "fiber");
    r.keys(fi, "fiber", {"profile", "t_min", "t_max", "points"});
    r.get(fi, "profile", c.fiber.profile, "fiber");
    r.get(fi, "t_min", c.fiber.t_min, "fiber");
    r.get(fi, "t_max", c.fiber.t_max, "fiber");
    r.get_count(fi, "points", c.fiber.points, "fiber");
    if (!(c.fiber.t_min > 0.0 && c.fiber.t_min < c.fiber.t_max)) r.validation(fi, "fiber needs 0 < t_min < t_max");
    if (c.fiber.points < 2) r.validation(child(fi, "points"), "fiber.points must be >= 2");

    // hypotheses
    const YAML::Node hy = child(root, "hypotheses");
    r.keys(hy, "hypotheses",
           {"samples", "t_values", "scaling_tol", "cone_tol", "small_ball_samples", "small_ball_radius"});
    auto& h = c.hypotheses;
    r.get_count(hy, "samples", h.samples, "hypotheses");
    r.get(hy, "t_values", h.t_values, "hypotheses");
    r.get(hy, "scaling_tol", h.scaling_tol, "hypotheses");
    r.get(hy, "cone_tol", h.cone_tol, "hypotheses");
    r.get_count(hy, "small_ball_samples", h.small_ball_samples, "hypotheses");
    r.get(hy, "small_ball_radius", h.small_ball_radius, "hypotheses");
    h.seed = c.seed;
    if (h.samples < 1) r.validation(child(hy, "samples"), "hypotheses.samples must be >= 1");
    if (!(h.scaling_tol > 0.0) || !(h.cone_tol > 0.0) || !(h.small_ball_radius > 0.0))
        r.validation(hy, "hypotheses tolerances and small_ball_radius must be > 0");
    for (double t : h.t_values)
        if (!(t > 0.0)) r.validation(child(hy, "t_values"), "hypotheses.t_values must be positive");

    // sweep
    const YAML::Node sw = child(root, "sweep");
    r.keys(sw, "sweep", {"parameter", "values", "parallelism"});
    r.get(sw, "parameter", c.sweep.parameter, "sweep");
    r.get_count(sw, "parallelism", c.sweep.parallelism, "sweep");
    if (sw.IsMap() && child(sw, "values").IsDefined()) {
        if (!child(sw, "values").IsSequence()) r.parse_issue(child(sw, "values"), "sweep.values must be a list");
        else
            for (const auto& v : child(sw, "values")) c.sweep.values.push_back(flow_text(v));
    }
    if (c.sweep.parallelism < 1) r.validation(child(sw, "parallelism"), "sweep.parallelism must be >= 1");
    if (c.command == Command::Sweep) {
        if (!sw.IsDefined() || sw.IsNull()) r.validation(root, "section 'sweep' is required by the sweep command");
        else if (c.sweep.parameter.empty() || c.sweep.values.empty())
            r.validation(sw, "sweep needs a parameter and a nonempty values list");
    }

    // output
    const YAML::Node out = child(root, "output");
    r.keys(out, "output", {"directory", "formats"});
    r.get(out, "directory", c.output.directory, "output");
    if (r.get(out, "formats", c.output.formats, "output")) {
        for (const auto& f : c.output.formats)
            if (f != "txt" && f != "csv" && f != "json")
                r.validation(child(out, "formats"), "output.formats entries must be txt, csv or json (got '" + f + "')");
    }
    if (c.output.directory.empty()) r.validation(out, "output.directory must not be empty");

    // Admissibility, only meaningful once the pieces parsed.
    if (r.parse.empty()) {
        try {
            c.instance().validate();
        } catch (const Error& e) {
            r.instance_kind = e.kind();
            r.validation(p, e.what());
        }
    }
    return c;
}

RunConfig from_node(YAML::Node root, const std::vector<std::string>& overrides, bool check_sweep);

void check_sweep_entries(const YAML::Node& root, const RunConfig& c, Reader& r) {
    for (std::size_t k = 0; k < c.sweep.values.size(); ++k) {
        try {
            YAML::Node copy = YAML::Clone(root);
            apply_override(copy, c.sweep.parameter, YAML::Load(c.sweep.values[k]));
            copy["command"] = "solve";
            from_node(copy, {}, false);
        } catch (const ConfigError& e) {
            for (const auto& i : e.issues())
                r.validation(child(root, "sweep"), "sweep entry " + std::to_string(k) + " (" + c.sweep.parameter + " = " +
                                                c.sweep.values[k] + "): " + i.message);
        }
    }
}

RunConfig from_node(YAML::Node root, const std::vector<std::string>& overrides, bool check_sweep) {
    Reader r;
    for (const auto& ov : overrides) {
        const auto eq = ov.find('=');
        if (eq == std::string::npos || eq == 0) {
            r.parse.push_back({0, 0, "override '" + ov + "' is not of the form path=value"});
            continue;
        }
        try {
            if (!root.IsDefined() || root.IsNull()) root = YAML::Node(YAML::NodeType::Map);
            apply_override(root, ov.substr(0, eq), YAML::Load(ov.substr(eq + 1)));
        } catch (const YAML::Exception& e) {
            r.parse.push_back({0, 0, "override '" + ov + "': " + e.msg});
        }
    }
    RunConfig c = convert(root, r);
    if (r.parse.empty() && r.valid.empty() && check_sweep && c.command == Command::Sweep) check_sweep_entries(root, c, r);
    if (!r.parse.empty()) {
        auto all = r.parse;
        all.insert(all.end(), r.valid.begin(), r.valid.end());
        throw ConfigError(ErrorKind::ParseError, std::move(all));
    }
    if (!r.valid.empty()) {
        // a lone admissibility failure keeps its own kind and exit code
        const ErrorKind kind = r.valid.size() == 1 && r.instance_kind ? *r.instance_kind : ErrorKind::ValidationError;
        throw ConfigError(kind, std::move(r.valid));
    }
    return c;
}

YAML::Node load_text(const std::string& text) {
    try {
        return YAML::Load(text);
    } catch (const YAML::ParserException& e) {
        throw ConfigError(ErrorKind::ParseError, {{e.mark.line + 1, e.mark.column + 1, e.msg}});
    }
}

void emit_double(YAML::Emitter& e, double x) { e << format_double(x); }

void emit_doubles(YAML::Emitter& e, const std::vector<double>& v) {
    e << YAML::Flow << YAML::BeginSeq;
    for (double x : v) emit_double(e, x);
    e << YAML::EndSeq;
}

}  // namespace

ConfigError::ConfigError(ErrorKind kind, std::vector<ConfigIssue> issues)
    : Error(kind, describe(kind, issues)), issues_(std::move(issues)) {}

RunConfig parse_config(const std::string& text, const std::vector<std::string>& overrides) {
    return from_node(load_text(text), overrides, true);
}

RunConfig load_config(const std::string& path, const std::vector<std::string>& overrides) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorKind::Io, "cannot read config '" + path + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str(), overrides);
}

RunConfig with_override(const RunConfig& cfg, const std::string& path, const std::string& value) {
    return parse_config(emit_config(cfg), {path + "=" + value});
}

std::string emit_config(const RunConfig& c) {
    YAML::Emitter e;
    e << YAML::BeginMap;
    e << YAML::Key << "command" << YAML::Value << command_name(c.command);
    e << YAML::Key << "seed" << YAML::Value << c.seed;

    e << YAML::Key << "problem" << YAML::Value << YAML::BeginMap;
    e << YAML::Key << "family" << YAML::Value << family_name(c.problem.family);
    e << YAML::Key << "N" << YAML::Value << c.problem.N;
    if (c.problem.family == FamilyKind::FractionalSum) {
        e << YAML::Key << "s" << YAML::Value;
        emit_doubles(e, c.problem.exponents);
    } else if (c.problem.family == FamilyKind::Anisotropic) {
        e << YAML::Key << "p" << YAML::Value;
        emit_doubles(e, c.problem.exponents);
    }
    const auto& nl = c.problem.nonlinearity;
    e << YAML::Key << "nonlinearity" << YAML::Value;
    if (!nl.builtin.empty() && !nl.tau) {
        e << nl.builtin;
    } else {
        e << YAML::BeginMap;
        if (!nl.builtin.empty()) {
            e << YAML::Key << "builtin" << YAML::Value << nl.builtin;
        } else {
            e << YAML::Key << "name" << YAML::Value << nl.name;
            e << YAML::Key << "segments" << YAML::Value << YAML::BeginSeq;
            for (const auto& s : nl.segments) {
                e << YAML::BeginMap << YAML::Key << "start" << YAML::Value;
                emit_double(e, s.start);
                e << YAML::Key << "terms" << YAML::Value << YAML::Flow << YAML::BeginSeq;
                for (const auto& m : s.terms) emit_doubles(e, {m.coeff, m.power});
                e << YAML::EndSeq << YAML::EndMap;
            }
            e << YAML::EndSeq;
        }
        if (nl.tau) {
            e << YAML::Key << "tau" << YAML::Value;
            emit_double(e, *nl.tau);
        }
        e << YAML::EndMap;
    }
    if (!nl.jumps.empty()) {
        e << YAML::Key << "jumps" << YAML::Value << YAML::Flow << YAML::BeginSeq;
        for (const auto& j : nl.jumps) emit_doubles(e, {j[0], j[1]});
        e << YAML::EndSeq;
    }
    e << YAML::Key << "delta" << YAML::Value;
    emit_double(e, c.problem.delta);
    e << YAML::EndMap;

    e << YAML::Key << "grid" << YAML::Value << YAML::BeginMap;
    e << YAML::Key << "kind" << YAML::Value << grid_kind_name(c.grid.kind);
    e << YAML::Key << "R" << YAML::Value;
    emit_double(e, c.grid.R);
    e << YAML::Key << "M" << YAML::Value << c.grid.M;
    e << YAML::EndMap;

    const auto& o = c.solver;
    e << YAML::Key << "solver" << YAML::Value << YAML::BeginMap;
    e << YAML::Key << "max_iters" << YAML::Value << o.max_iters;
    e << YAML::Key << "initial_step" << YAML::Value;
    emit_double(e, o.initial_step);
    e << YAML::Key << "backtrack" << YAML::Value;
    emit_double(e, o.backtrack);
    e << YAML::Key << "armijo" << YAML::Value;
    emit_double(e, o.armijo);
    e << YAML::Key << "max_halvings" << YAML::Value << o.max_halvings;
    e << YAML::Key << "tol_energy" << YAML::Value;
    emit_double(e, o.tol_energy);
    e << YAML::Key << "stall_window" << YAML::Value << o.stall_window;
    e << YAML::Key << "tol_el" << YAML::Value;
    emit_double(e, o.tol_el);
    e << YAML::Key << "tol_K" << YAML::Value;
    emit_double(e, o.tol_K);
    e << YAML::Key << "symmetrize_every" << YAML::Value << o.symmetrize_every;
    e << YAML::Key << "memory" << YAML::Value << o.memory;
    e << YAML::Key << "anneal_delta" << YAML::Value;
    emit_double(e, o.anneal_delta);
    e << YAML::Key << "epsilon_schedule" << YAML::Value;
    emit_doubles(e, c.epsilon_schedule);
    e << YAML::Key << "inclusion_tol" << YAML::Value;
    emit_double(e, c.inclusion_tol);
    e << YAML::EndMap;

    e << YAML::Key << "fiber" << YAML::Value << YAML::BeginMap;
    e << YAML::Key << "profile" << YAML::Value << YAML::DoubleQuoted << c.fiber.profile;
    e << YAML::Key << "t_min" << YAML::Value;
    emit_double(e, c.fiber.t_min);
    e << YAML::Key << "t_max" << YAML::Value;
    emit_double(e, c.fiber.t_max);
    e << YAML::Key << "points" << YAML::Value << c.fiber.points;
    e << YAML::EndMap;

    const auto& h = c.hypotheses;
    e << YAML::Key << "hypotheses" << YAML::Value << YAML::BeginMap;
    e << YAML::Key << "samples" << YAML::Value << h.samples;
    e << YAML::Key << "t_values" << YAML::Value;
    emit_doubles(e, h.t_values);
    e << YAML::Key << "scaling_tol" << YAML::Value;
    emit_double(e, h.scaling_tol);
    e << YAML::Key << "cone_tol" << YAML::Value;
    emit_double(e, h.cone_tol);
    e << YAML::Key << "small_ball_samples" << YAML::Value << h.small_ball_samples;
    e << YAML::Key << "small_ball_radius" << YAML::Value;
    emit_double(e, h.small_ball_radius);
    e << YAML::EndMap;

    if (!c.sweep.parameter.empty() || !c.sweep.values.empty() || c.command == Command::Sweep) {
        e << YAML::Key << "sweep" << YAML::Value << YAML::BeginMap;
        e << YAML::Key << "parameter" << YAML::Value << YAML::DoubleQuoted << c.sweep.parameter;
        e << YAML::Key << "values" << YAML::Value << YAML::BeginSeq;
        for (const auto& v : c.sweep.values) e << YAML::Load(v);
        e << YAML::EndSeq;
        e << YAML::Key << "parallelism" << YAML::Value << c.sweep.parallelism;
        e << YAML::EndMap;
    }

    e << YAML::Key << "output" << YAML::Value << YAML::BeginMap;
    e << YAML::Key << "directory" << YAML::Value << YAML::DoubleQuoted << c.output.directory;
    e << YAML::Key << "formats" << YAML::Value << YAML::Flow << c.output.formats;
    e << YAML::EndMap;
    e << YAML::EndMap;
    return std::string(e.c_str()) + "\n";
}

}  // namespace pohozaev
