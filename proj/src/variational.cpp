#include "pohozaev/variational.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "pohozaev/error.hpp"

namespace pohozaev {

bool FunctionalFamily::has_gradients() const {
    if (psi_grads.size() != psi.size() || !phi_grad) return false;
    return std::all_of(psi_grads.begin(), psi_grads.end(), [](const auto& g) { return static_cast<bool>(g); });
}

void FunctionalFamily::validate() const {
    if (psi.empty() || lambdas.size() != psi.size() || !phi)
        throw Error(ErrorKind::NonadmissibleExponents, "family needs one exponent per psi and a Phi functional");
    const double lmax = *std::max_element(lambdas.begin(), lambdas.end());
    if (!(lmax > 0.0) || !(lmax < lambda_phi)) {
        std::ostringstream os;
        os << "need 0 < max lambda_i < lambda_phi, got max lambda_i = " << lmax << ", lambda_phi = " << lambda_phi;
        throw Error(ErrorKind::NonadmissibleExponents, os.str());
    }
}

double Evaluation::J() const {
    double s = 0.0;
    for (double p : psi) s += p;
    return s;
}

double Evaluation::K(const FunctionalFamily& fam) const {
    double s = 0.0;
    for (std::size_t i = 0; i < psi.size(); ++i) s += fam.lambdas[i] * psi[i];
    return s - fam.lambda_phi * phi;
}

double Evaluation::K_scale(const FunctionalFamily& fam) const {
    double s = 0.0;
    for (std::size_t i = 0; i < psi.size(); ++i) s += fam.lambdas[i] * std::abs(psi[i]);
    return s + fam.lambda_phi * std::abs(phi);
}

Evaluation evaluate(const FunctionalFamily& fam, const GridFunction& u) {
    Evaluation ev;
    ev.psi.reserve(fam.n());
    for (const auto& p : fam.psi) ev.psi.push_back(p(u));
    ev.phi = fam.phi(u);
    for (double p : ev.psi)
        if (!std::isfinite(p)) throw Error(ErrorKind::NonFiniteValue, "psi evaluation is not finite");
    if (!std::isfinite(ev.phi)) throw Error(ErrorKind::NonFiniteValue, "Phi evaluation is not finite");
    return ev;
}

double eval_K(const FunctionalFamily& fam, const GridFunction& u) { return evaluate(fam, u).K(fam); }
double eval_I(const FunctionalFamily& fam, const GridFunction& u) { return evaluate(fam, u).I(); }

GridFunction scale(const GridFunction& u, double t) {
    if (!(t >= 0.0) || !std::isfinite(t)) throw Error(ErrorKind::ValidationError, "dilation factor must be >= 0");
    if (t == 0.0) return GridFunction(u.grid, std::vector<double>(u.size(), 0.0), u.monotone);
    GridFunction out = u;
    if (auto* rg = std::get_if<RadialGrid>(&out.grid)) {
        const double tn = std::pow(t, rg->dim);
        for (auto& r : rg->radii) r *= t;
        for (auto& w : rg->weights) w *= tn;
    } else {
        for (auto& h : std::get<BoxGrid>(out.grid).spacing) h *= t;
    }
    return out;
}

DilationAction DilationAction::grid_dilation() {
    return DilationAction{[](double t, const GridFunction& u) { return scale(u, t); }};
}

namespace {

double fiber_h(const Evaluation& ev, const FunctionalFamily& fam, double t) {
    double h = 0.0;
    for (std::size_t i = 0; i < ev.psi.size(); ++i) h += std::pow(t, fam.lambdas[i]) * ev.psi[i];
    return h - std::pow(t, fam.lambda_phi) * ev.phi;
}

double fiber_K(const Evaluation& ev, const FunctionalFamily& fam, double t) {
    double k = 0.0;
    for (std::size_t i = 0; i < ev.psi.size(); ++i) k += fam.lambdas[i] * std::pow(t, fam.lambdas[i]) * ev.psi[i];
    return k - fam.lambda_phi * std::pow(t, fam.lambda_phi) * ev.phi;
}

}  // namespace

FiberProfile fiber(const FunctionalFamily& fam, const DilationAction& act, const GridFunction& u,
                   const std::vector<double>& t_grid, const VariationalOptions& opts) {
    const Evaluation ev = evaluate(fam, u);
    if (!(ev.phi > 0.0)) throw Error(ErrorKind::PhiNonpositive, "fiber needs Phi(u) > 0");
    FiberProfile fp;
    fp.t_samples = t_grid;
    for (double t : t_grid) {
        if (!(t > 0.0)) throw Error(ErrorKind::ValidationError, "fiber samples must be positive");
        fp.h_values.push_back(fiber_h(ev, fam, t));
        fp.k_values.push_back(fiber_K(ev, fam, t));
    }
    fp.t_star = pohozaev_root(ev.psi, ev.phi, fam.lambdas, fam.lambda_phi, opts);
    fp.h_star = fiber_h(ev, fam, fp.t_star);
    const Evaluation star = evaluate(fam, act.apply(fp.t_star, u));
    fp.k_residual = std::abs(star.K(fam));
    fp.k_scale = star.K_scale(fam);
    if (!t_grid.empty()) {
        const auto it = std::max_element(t_grid.begin(), t_grid.end());
        fp.tail_negative = fp.h_values[static_cast<std::size_t>(it - t_grid.begin())] < 0.0;
    }
    return fp;
}

double pohozaev_root(const std::vector<double>& psi, double phi, const std::vector<double>& lambdas, double lambda_phi,
                     const VariationalOptions& opts) {
    if (!(phi > 0.0)) throw Error(ErrorKind::PhiNonpositive, "projection needs Phi(u) > 0");
    double lmax = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < psi.size(); ++i)
        if (psi[i] > 0.0) lmax = std::max(lmax, lambdas[i]);
    if (!std::isfinite(lmax)) throw Error(ErrorKind::BracketNotFound, "every psi_i vanishes, no scale to balance");

    // After dividing by t^{lmax} the balance g(x), x = log t, is strictly
    // decreasing: tied top exponents become a constant, the rest decay.
    auto g = [&](double x, double* dg) {
        double v = 0.0, d = 0.0;
        for (std::size_t i = 0; i < psi.size(); ++i) {
            if (!(psi[i] > 0.0)) continue;
            const double e = lambdas[i] - lmax;
            const double term = lambdas[i] * psi[i] * std::exp(e * x);
            v += term;
            d += e * term;
        }
        const double e = lambda_phi - lmax;
        const double term = lambda_phi * phi * std::exp(e * x);
        v -= term;
        d -= e * term;
        if (dg) *dg = d;
        return v;
    };

    const double step = std::log(2.0);
    const double xlim = 60.0 * step;
    double lo = 0.0, hi = 0.0;
    const double g0 = g(0.0, nullptr);
    if (g0 == 0.0) return 1.0;
    if (g0 > 0.0) {
        lo = 0.0;
        hi = step;
        while (g(hi, nullptr) > 0.0) {
            lo = hi;
            hi += step;
            if (hi > xlim + 1e-9) throw Error(ErrorKind::BracketNotFound, "no sign change of K on [2^-60, 2^60]");
        }
    } else {
        hi = 0.0;
        lo = -step;
        while (g(lo, nullptr) < 0.0) {
            hi = lo;
            lo -= step;
            if (lo < -xlim - 1e-9) throw Error(ErrorKind::BracketNotFound, "no sign change of K on [2^-60, 2^60]");
        }
    }

    double x = 0.5 * (lo + hi);
    for (int it = 0; it < 200; ++it) {
        double d = 0.0;
        const double v = g(x, &d);
        if (v == 0.0) return std::exp(x);
        if (v > 0.0) lo = x; else hi = x;
        if (hi - lo <= opts.tol_t * 1e-2) break;
        double xn = (d < 0.0) ? x - v / d : 0.5 * (lo + hi);
        if (!(xn > lo && xn < hi)) xn = 0.5 * (lo + hi);
        const double dx = std::abs(xn - x);
        x = xn;
        if (dx <= opts.tol_t * 1e-2) break;
    }
    return std::exp(x);
}

PohozaevState make_state(const FunctionalFamily& fam, GridFunction u, const VariationalOptions& opts) {
    const Evaluation ev = evaluate(fam, u);
    PohozaevState st;
    st.K_value = ev.K(fam);
    st.I_value = ev.I();
    st.on_manifold = std::abs(st.K_value) <= opts.tol_K * ev.K_scale(fam) && max_abs(u.values) > 0.0;
    st.u = std::move(u);
    return st;
}

Projection project_to_pohozaev(const FunctionalFamily& fam, const GridFunction& u, const VariationalOptions& opts) {
    const Evaluation ev = evaluate(fam, u);
    Projection pr;
    pr.t_star = pohozaev_root(ev.psi, ev.phi, fam.lambdas, fam.lambda_phi, opts);
    pr.state = make_state(fam, scale(u, pr.t_star), opts);
    return pr;
}

double pohozaev_identity_check(const FunctionalFamily& fam, const PohozaevState& st, const VariationalOptions& opts) {
    if (!st.on_manifold) throw Error(ErrorKind::NotOnManifold, "state is not flagged as a member of the Pohozaev set");
    const Evaluation ev = evaluate(fam, st.u);
    if (std::abs(ev.K(fam)) > opts.tol_K * ev.K_scale(fam))
        throw Error(ErrorKind::NotOnManifold, "K(u) does not vanish within tolerance");
    double rhs = 0.0;
    for (std::size_t i = 0; i < ev.psi.size(); ++i) rhs += (1.0 - fam.lambdas[i] / fam.lambda_phi) * ev.psi[i];
    const double I = ev.I();
    return std::abs(I - rhs) / std::max(std::abs(I), std::numeric_limits<double>::epsilon());
}

std::vector<double> log_spaced(double lo, double hi, std::size_t count) {
    std::vector<double> t(count);
    const double a = std::log(lo), b = std::log(hi);
    for (std::size_t i = 0; i < count; ++i)
        t[i] = std::exp(a + (b - a) * static_cast<double>(i) / static_cast<double>(count > 1 ? count - 1 : 1));
    return t;
}

}  // namespace pohozaev
