#include "pohozaev/harness.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

#include "pohozaev/calculus.hpp"
#include "pohozaev/error.hpp"
#include "pohozaev/solver.hpp"

namespace pohozaev {

bool HypothesisReport::hard_pass() const {
    return std::all_of(entries.begin(), entries.end(), [](const HypothesisEntry& e) { return e.surrogate || e.passed; });
}

const HypothesisEntry* HypothesisReport::find(const std::string& name) const {
    for (const auto& e : entries)
        if (e.name == name) return &e;
    return nullptr;
}

namespace {

double l2_norm(const GridFunction& u) {
    return std::sqrt(std::max(0.0, quad(u, [](double v) { return v * v; })));
}

double support_radius(const Grid& grid) {
    if (const auto* rg = std::get_if<RadialGrid>(&grid)) return rg->extent();
    const auto& b = std::get<BoxGrid>(grid);
    double r = std::numeric_limits<double>::infinity();
    for (int a = 0; a < b.dim; ++a) r = std::min(r, b.half_width(a));
    return r;
}

// Tracks the worst sample of an entry.
struct Tally {
    HypothesisEntry e;
    bool first = true;

    Tally(std::string name, std::string description, bool surrogate = false) {
        e.name = std::move(name);
        e.description = std::move(description);
        e.surrogate = surrogate;
    }
    void add(double margin, const std::string& witness, const GridFunction* u = nullptr) {
        ++e.samples;
        if (first || margin < e.worst_margin) {
            e.worst_margin = margin;
            if (margin < 0.0 && e.passed) {
                e.witness = witness;
                if (u) e.witness_u = *u;
            }
            first = false;
        }
        if (margin < 0.0) e.passed = false;
    }
    HypothesisEntry done() { return std::move(e); }
};

std::string fmt(double x) {
    std::ostringstream os;
    os.precision(17);
    os << x;
    return os.str();
}

std::vector<double> expected_lambdas(const ProblemInstance& inst) {
    std::vector<double> out;
    switch (inst.kind) {
        case FamilyKind::FractionalSum:
            for (double s : inst.exponents) out.push_back(inst.N - 2.0 * s);
            break;
        case FamilyKind::Anisotropic:
            for (double p : inst.exponents) out.push_back(inst.N - p);
            break;
        case FamilyKind::Classical: out.push_back(inst.N - 2.0); break;
    }
    return out;
}

GridFunction amplified_to_positive_phi(const FunctionalFamily& fam, GridFunction u) {
    for (int k = 0; k < 60 && !(fam.phi(u) > 0.0); ++k)
        for (auto& v : u.values) v *= 1.5;
    return u;
}

// Radial bump of unit height centered on the sphere |x| = c.
GridFunction shell(const Grid& grid, double c, double width, double height) {
    return sample_radial(grid, [&](double r) {
        const double z = (r - c) / width;
        return height * std::exp(-0.5 * z * z);
    });
}

}  // namespace

GridFunction MixtureSampler::operator()() {
    std::uniform_int_distribution<int> terms(1, 3);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    const int n = terms(rng);
    std::vector<double> amp(n), width(n);
    for (int i = 0; i < n; ++i) {
        width[i] = width_scale * std::exp(-std::log(8.0) * unit(rng));
        amp[i] = amplitude_scale * std::exp(std::log(16.0) * (unit(rng) - 0.5));
    }
    GridFunction u = sample_radial(grid, [&](double r) {
        double v = 0.0;
        for (int i = 0; i < n; ++i) v += amp[i] * std::exp(-0.5 * (r / width[i]) * (r / width[i]));
        return v;
    });
    u.monotone = true;
    return u;
}

MixtureSampler instance_sampler(const ProblemInstance& inst, const Grid& grid, std::uint64_t seed) {
    const double R = std::min(support_radius(grid), inst.grid.R);
    return MixtureSampler(grid, R / 8.0, inst.plateau_height(), seed);
}

double family_norm(const FunctionalFamily& fam, const GridFunction& u) {
    const Evaluation ev = evaluate(fam, u);
    return std::sqrt(std::max(0.0, ev.J())) + l2_norm(u);
}

std::vector<HypothesisEntry> check_scalings(const FunctionalFamily& fam, const DilationAction& act,
                                            MixtureSampler& sampler, const HarnessOptions& opts) {
    Tally x1("X1", "psi_i(u_t) = t^lambda_i psi_i(u)");
    Tally x2("X2", "Phi(u_t) = t^lambda_phi Phi(u)");
    Tally x4("X4", "u_0 = 0 and u_1 = u");
    Tally x5("X5", "discrete continuity modulus of t -> u_t at t = 1 and t -> 0+");
    for (std::size_t k = 0; k < opts.samples; ++k) {
        const GridFunction u = sampler();
        const Evaluation ev = evaluate(fam, u);
        for (double t : opts.t_values) {
            const GridFunction ut = act.apply(t, u);
            const Evaluation et = evaluate(fam, ut);
            for (std::size_t i = 0; i < fam.n(); ++i) {
                const double expect = std::pow(t, fam.lambdas[i]) * ev.psi[i];
                const double err = std::abs(et.psi[i] - expect) / std::max(std::abs(expect), 1e-300);
                x1.add(opts.scaling_tol - err,
                       "sample " + std::to_string(k) + ", t = " + fmt(t) + ": psi_" + std::to_string(i + 1) +
                           "(u_t) = " + fmt(et.psi[i]) + " but t^lambda psi = " + fmt(expect),
                       &u);
            }
            const double expect = std::pow(t, fam.lambda_phi) * ev.phi;
            const double err = std::abs(et.phi - expect) / std::max(std::abs(expect), 1e-300);
            x2.add(opts.scaling_tol - err,
                   "sample " + std::to_string(k) + ", t = " + fmt(t) + ": Phi(u_t) = " + fmt(et.phi) +
                       " but t^lambda_phi Phi = " + fmt(expect),
                   &u);
        }

        const GridFunction u0 = act.apply(0.0, u), u1 = act.apply(1.0, u);
        const double zero_norm = max_abs(u0.values);
        x4.add(u1.values == u.values && zero_norm == 0.0 ? 0.0 : -1.0,
               "sample " + std::to_string(k) + ": max|u_0| = " + fmt(zero_norm) +
                   (u1.values == u.values ? "" : ", u_1 differs from u"),
               &u);

        // Continuity at t = 1 through resampling onto the fixed grid, at 0+ through the norm.
        const double base = l2_norm(u);
        double prev = std::numeric_limits<double>::infinity();
        bool decreasing = true;
        double last = 0.0;
        for (double eta : {1e-1, 1e-2, 1e-3, 1e-4}) {
            GridFunction back = resample(act.apply(1.0 + eta, u), u.grid);
            for (std::size_t j = 0; j < back.size(); ++j) back.values[j] -= u.values[j];
            const double d = l2_norm(back) / base;
            decreasing = decreasing && d <= prev;
            prev = d;
            last = d;
        }
        const double small = l2_norm(act.apply(1e-8, u)) / base;
        const double margin = decreasing ? std::min(1e-2 - last, 1e-2 - small) : -1.0;
        x5.add(margin,
               "sample " + std::to_string(k) + ": modulus at eta = 1e-4 is " + fmt(last) + ", ||u_t||/||u|| at t = 1e-8 is " +
                   fmt(small) + (decreasing ? "" : ", modulus not decreasing"),
               &u);
    }
    return {x1.done(), x2.done(), x4.done(), x5.done()};
}

std::vector<HypothesisEntry> check_cone(const FunctionalFamily& fam, MixtureSampler& sampler,
                                        const HarnessOptions& opts) {
    Tally x6("X6", "psi_i(Q(u)) <= psi_i(u) on the nonnegative cone");
    Tally x7("X7", "Phi(Q(u)) >= Phi(u) on the nonnegative cone");
    Tally x8("X8", "dilations keep symmetric nonincreasing functions in the cone");
    for (std::size_t k = 0; k < opts.samples; ++k) {
        const GridFunction u = sampler();
        const GridFunction q = symmetrize(u);
        const Evaluation eu = evaluate(fam, u), eq = evaluate(fam, q);
        for (std::size_t i = 0; i < fam.n(); ++i) {
            const double ratio = eq.psi[i] / std::max(eu.psi[i], 1e-300) - 1.0;
            x6.add(opts.cone_tol - ratio,
                   "sample " + std::to_string(k) + ": psi_" + std::to_string(i + 1) + "(Q(u)) = " + fmt(eq.psi[i]) +
                       " > psi(u) = " + fmt(eu.psi[i]),
                   &u);
        }
        const double mag = std::abs(eu.phi) + quad(u, [](double v) { return v * v; });
        x7.add(opts.cone_tol - (eu.phi - eq.phi) / std::max(mag, 1e-300),
               "sample " + std::to_string(k) + ": Phi(Q(u)) = " + fmt(eq.phi) + " < Phi(u) = " + fmt(eu.phi), &u);
        for (double t : {0.5, 3.0}) {
            const GridFunction qt = scale(q, t);
            const bool ok = qt.monotone && is_radially_nonincreasing(qt);
            x8.add(ok ? 0.0 : -1.0, "sample " + std::to_string(k) + ": Q(u) dilated by " + fmt(t) + " left the cone",
                   &u);
        }
    }
    return {x6.done(), x7.done(), x8.done()};
}

std::vector<HypothesisEntry> check_compactness_surrogates(const ProblemInstance& inst, const FunctionalFamily& fam,
                                                          MixtureSampler& sampler, const HarnessOptions& opts) {
    const Grid& grid = sampler.grid;
    const double tau = inst.plateau_height();
    const double R = std::min(support_radius(grid), inst.grid.R);

    Tally f1("F1", "Phi(0) = 0 and Phi(u) > 0 for some u");
    const GridFunction zero = zeros(grid);
    const Evaluation e0 = evaluate(fam, zero);
    const GridFunction pos = amplified_to_positive_phi(fam, sampler());
    const double phi_pos = fam.phi(pos);
    f1.add(e0.phi == 0.0 && phi_pos > 0.0 ? phi_pos : -1.0,
           "Phi(0) = " + fmt(e0.phi) + ", best amplified sample Phi = " + fmt(phi_pos), &pos);

    Tally f2("F2", "psi_i >= 0 and J(u) = 0 only at u = 0");
    f2.add(e0.J() == 0.0 ? 0.0 : -1.0, "J(0) = " + fmt(e0.J()), &zero);
    for (std::size_t k = 0; k < opts.samples; ++k) {
        const GridFunction u = sampler();
        const Evaluation ev = evaluate(fam, u);
        double m = ev.J() > 0.0 ? std::numeric_limits<double>::infinity() : -1.0;
        for (double p : ev.psi) m = std::min(m, p);
        f2.add(m, "sample " + std::to_string(k) + ": J = " + fmt(ev.J()), &u);
    }

    Tally f3("F3", "K > 0 on a small ball (Pohozaev radius)");
    for (std::size_t k = 0; k < opts.small_ball_samples; ++k) {
        GridFunction u = sampler();
        const double s = opts.small_ball_radius * tau / std::max(max_abs(u.values), 1e-300);
        for (auto& v : u.values) v *= s;
        const Evaluation ev = evaluate(fam, u);
        f3.add(ev.K(fam) / std::max(ev.K_scale(fam), 1e-300), "small sample " + std::to_string(k) + ": K = " + fmt(ev.K(fam)),
               &u);
    }

    // Dilation towards 0 keeps Phi >= 0 and drives J to 0; the norm must follow.
    Tally f4("F4", "Phi >= 0 and J -> 0 force ||u|| -> 0; bounded J bounds ||u||");
    const double crit = inst.critical_q() + 1.0;
    double c3 = 0.0;
    for (std::size_t k = 0; k < std::min<std::size_t>(opts.samples, 50); ++k) {
        const GridFunction u = amplified_to_positive_phi(fam, sampler());
        if (!(fam.phi(u) >= 0.0)) continue;
        std::vector<double> lj, ln;
        bool decreasing = true;
        double prev = std::numeric_limits<double>::infinity();
        for (int j = 0; j <= 10; ++j) {
            const GridFunction ut = scale(u, std::pow(2.0, -j));
            const double J = evaluate(fam, ut).J(), n = family_norm(fam, ut);
            decreasing = decreasing && n < prev;
            prev = n;
            lj.push_back(std::log(J));
            ln.push_back(std::log(n));
        }
        // Least-squares slope of log ||u|| against log J.
        const double mj = std::accumulate(lj.begin(), lj.end(), 0.0) / lj.size();
        const double mn = std::accumulate(ln.begin(), ln.end(), 0.0) / ln.size();
        double sxy = 0.0, sxx = 0.0;
        for (std::size_t j = 0; j < lj.size(); ++j) {
            sxy += (lj[j] - mj) * (ln[j] - mn);
            sxx += (lj[j] - mj) * (lj[j] - mj);
        }
        const double rate = sxx > 0.0 ? sxy / sxx : 0.0;
        f4.add(decreasing ? rate : -1.0,
               "sample " + std::to_string(k) + ": fitted rate " + fmt(rate) + (decreasing ? "" : ", norm not decreasing"),
               &u);
        const double J = evaluate(fam, u).J();
        const double l2 = quad(u, [](double v) { return v * v; });
        c3 = std::max(c3, l2 / (J + std::pow(J, 0.5 * crit)));
    }
    auto e4 = f4.done();
    e4.description += " (fitted C3 = " + fmt(c3) + ")";
    if (!std::isfinite(c3)) {
        e4.passed = false;
        e4.worst_margin = -1.0;
        e4.witness = "C3 not finite";
    }

    // Stand-in weakly convergent sequences: radial shells running to the edge
    // (weak limit 0), and a fixed sample plus such a shell (weak limit the sample).
    Tally f5("F5", "limsup Phi(u_k) <= Phi(u) along shells escaping to infinity", true);
    Tally f6("F6", "psi_i(u) <= liminf psi_i(u_k) along a sample plus escaping shells", true);
    const GridFunction base = sampler();
    const Evaluation eb = evaluate(fam, base);
    const double width = R / 40.0;
    const int N = inst.N;
    double tail_phi = -std::numeric_limits<double>::infinity();
    std::vector<double> min_psi(fam.n(), std::numeric_limits<double>::infinity());
    for (int k = 0; k < 8; ++k) {
        const double c = R * (0.3 + 0.075 * k);
        const double h = tau * std::pow(R * 0.3 / c, 0.5 * (N - 1));
        GridFunction sk = shell(grid, c, width, h);
        if (k >= 5) tail_phi = std::max(tail_phi, fam.phi(sk));
        GridFunction uk = base;
        for (std::size_t j = 0; j < uk.size(); ++j) uk.values[j] += sk.values[j];
        const Evaluation ek = evaluate(fam, uk);
        for (std::size_t i = 0; i < fam.n(); ++i) min_psi[i] = std::min(min_psi[i], ek.psi[i]);
    }
    f5.add(1e-6 - tail_phi, "shell sequence: limsup Phi = " + fmt(tail_phi) + " > Phi(0) = 0");
    for (std::size_t i = 0; i < fam.n(); ++i)
        f6.add(min_psi[i] + 1e-6 * std::max(1.0, eb.psi[i]) - eb.psi[i],
               "psi_" + std::to_string(i + 1) + "(u) = " + fmt(eb.psi[i]) + " > min psi(u_k) = " + fmt(min_psi[i]),
               &base);

    return {f1.done(), f2.done(), f3.done(), std::move(e4), f5.done(), f6.done()};
}

HypothesisReport check_hypotheses(const ProblemInstance& inst, const FunctionalFamily& fam,
                                  const HarnessOptions& opts) {
    HypothesisReport rep;
    rep.family = fam.name;
    rep.seed = opts.seed;
    const Grid grid = inst.make_grid();
    const DilationAction act = DilationAction::grid_dilation();

    std::vector<HypothesisEntry> all;
    {
        MixtureSampler s = instance_sampler(inst, grid, opts.seed);
        for (auto& e : check_scalings(fam, act, s, opts)) all.push_back(std::move(e));
    }

    HypothesisEntry x3;
    x3.name = "X3";
    x3.description = "0 < max lambda_i < lambda_phi, with lambdas re-derived from the instance exponents";
    x3.samples = 1;
    const auto expect = expected_lambdas(inst);
    std::string why;
    try {
        inst.validate();
    } catch (const Error& e) {
        why = e.what();
    }
    const double lmax = fam.lambdas.empty() ? 0.0 : *std::max_element(fam.lambdas.begin(), fam.lambdas.end());
    const double emax = expect.empty() ? 0.0 : *std::max_element(expect.begin(), expect.end());
    x3.worst_margin = std::min({lmax, fam.lambda_phi - lmax, emax, inst.N - emax});
    bool same = fam.lambdas.size() == expect.size() && fam.lambda_phi == inst.N;
    for (std::size_t i = 0; same && i < expect.size(); ++i) same = std::abs(fam.lambdas[i] - expect[i]) <= 1e-12;
    if (why.empty() && !same) why = "declared exponents differ from those of the instance";
    if (why.empty() && x3.worst_margin <= 0.0) why = "max lambda = " + fmt(lmax) + ", lambda_phi = " + fmt(fam.lambda_phi);
    x3.passed = why.empty();
    if (!x3.passed) {
        x3.witness = why;
        x3.worst_margin = std::min(x3.worst_margin, -1.0);
    }
    all.insert(all.begin() + 2, x3);

    {
        MixtureSampler s = instance_sampler(inst, grid, opts.seed + 1);
        for (auto& e : check_cone(fam, s, opts)) all.push_back(std::move(e));
    }
    {
        MixtureSampler s = instance_sampler(inst, grid, opts.seed + 2);
        for (auto& e : check_compactness_surrogates(inst, fam, s, opts)) all.push_back(std::move(e));
    }
    rep.entries = std::move(all);
    return rep;
}

HypothesisReport check_hypotheses(const ProblemInstance& inst, const HarnessOptions& opts) {
    return check_hypotheses(inst, build_family(inst), opts);
}

FunctionalFamily permute_lambdas(const FunctionalFamily& fam) {
    FunctionalFamily out = fam;
    std::vector<double> all = fam.lambdas;
    all.push_back(fam.lambda_phi);
    std::rotate(all.begin(), all.begin() + 1, all.end());
    out.lambda_phi = all.back();
    all.pop_back();
    out.lambdas = std::move(all);
    out.name = fam.name + " (permuted lambdas)";
    return out;
}

std::string to_text(const HypothesisReport& report) {
    std::ostringstream os;
    os << "family: " << report.family << "\nseed: " << report.seed << "\n";
    for (const auto& e : report.entries) {
        os << e.name << (e.surrogate ? " [surrogate]" : "") << ": " << (e.passed ? "pass" : "FAIL")
           << "  samples=" << e.samples << "  worst_margin=" << fmt(e.worst_margin) << "  " << e.description << "\n";
        if (!e.passed) os << "  witness: " << e.witness << "\n";
    }
    os << "hard checks: " << (report.hard_pass() ? "pass" : "FAIL") << "\n";
    return os.str();
}

}  // namespace pohozaev
