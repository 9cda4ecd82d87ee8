#include "pohozaev/solver.hpp"

#include <math.h>  // pchip in Boost 1.74 calls isnan unqualified

#include <boost/math/interpolators/pchip.hpp>
#include <boost/math/tools/minima.hpp>

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <numeric>
#include <optional>
#include <sstream>

#include "fft.hpp"
#include "pohozaev/calculus.hpp"
#include "pohozaev/nonlinearity.hpp"

namespace pohozaev {

void SolverOptions::validate() const {
    auto fail = [](const std::string& m) { throw Error(ErrorKind::ValidationError, m); };
    if (max_iters < 1) fail("max_iters must be >= 1");
    if (!(initial_step > 0.0)) fail("initial_step must be > 0");
    if (!(backtrack > 0.0 && backtrack < 1.0)) fail("backtrack must lie in (0, 1)");
    if (!(armijo > 0.0 && armijo < 1.0)) fail("armijo must lie in (0, 1)");
    if (max_halvings < 1) fail("max_halvings must be >= 1");
    if (!(tol_energy > 0.0) || !(tol_el > 0.0) || !(tol_K > 0.0)) fail("tolerances must be > 0");
    if (stall_window < 1) fail("stall_window must be >= 1");
    if (symmetrize_every < 1) fail("symmetrize_every must be >= 1");
    if (!(anneal_delta >= 0.0)) fail("anneal_delta must be >= 0");
}

const char* stop_reason_name(StopReason r) {
    switch (r) {
        case StopReason::Converged: return "converged";
        case StopReason::Stalled: return "stalled";
        case StopReason::MaxIters: return "max_iters";
    }
    return "?";
}

namespace {

double dot(const std::vector<double>& a, const std::vector<double>& b) {
    return std::inner_product(a.begin(), a.end(), b.begin(), 0.0);
}

}  // namespace

bool pinned_index(FamilyKind kind, std::size_t n, std::size_t i) {
    if (kind != FamilyKind::FractionalSum) return i == 0;
    const std::size_t pad = n / 4;
    return i <= pad || i >= n - pad;
}

void pin(FamilyKind kind, const Grid& grid, std::vector<double>& g) {
    if (g.empty()) return;
    if (std::holds_alternative<RadialGrid>(grid)) {
        g.back() = 0.0;
        return;
    }
    const auto& b = std::get<BoxGrid>(grid);
    const auto st = b.strides();
    for (std::size_t j = 0; j < g.size(); ++j)
        for (int a = 0; a < b.dim; ++a)
            if (pinned_index(kind, b.points[a], (j / st[a]) % b.points[a])) {
                g[j] = 0.0;
                break;
            }
}

namespace {

// C^infinity step: 1 for x <= 0, 0 for x >= 1.
double smooth_step(double x) {
    if (x <= 0.0) return 1.0;
    if (x >= 1.0) return 0.0;
    const double a = std::exp(-1.0 / (1.0 - x)), b = std::exp(-1.0 / x);
    return a / (a + b);
}

// Keys cubic kernel, a = -1/2.
double keys(double x) {
    x = std::abs(x);
    if (x < 1.0) return (1.5 * x - 2.5) * x * x + 1.0;
    if (x < 2.0) return ((-0.5 * x + 2.5) * x - 4.0) * x + 2.0;
    return 0.0;
}

}  // namespace

GridFunction initial_guess(const ProblemInstance& inst, const Grid& grid) {
    const FunctionalFamily fam = build_family(inst);
    const double tau = inst.plateau_height();
    double amp = 1.0;
    for (int k = 0; k <= 40; ++k) {
        GridFunction u = sample_radial(grid, [&](double r) { return amp * tau * smooth_step(2.0 * (r - 1.0)); });
        pin(inst.kind, grid, u.values);
        u.monotone = true;
        // Besides Phi > 0, ask that the fiber maximum sits at t* <= 2 so the
        // projected guess still fits the truncated domain.
        const Evaluation ev = evaluate(fam, u);
        if (ev.phi > 0.0) {
            if (k == 40) return u;
            try {
                if (pohozaev_root(ev.psi, ev.phi, fam.lambdas, fam.lambda_phi) <= 2.0) return u;
            } catch (const Error&) {
                return u;
            }
        }
        amp *= 1.5;
    }
    std::ostringstream os;
    os << "Phi stayed <= 0 for 40 amplifications of the plateau at tau = " << tau;
    throw Error(ErrorKind::PhiNeverPositive, os.str());
}

Preconditioner::Preconditioner(const ProblemInstance& inst, const Grid& grid)
    : grid_(grid), kind_(inst.kind), exponents_(inst.exponents) {
    if (const auto* rg = std::get_if<RadialGrid>(&grid_)) {
        const std::size_t n = rg->size();
        lower_.assign(n, 0.0);
        upper_.assign(n, 0.0);
        diag_ = rg->weights;
        for (std::size_t j = 0; j + 1 < n; ++j) {
            const double dr = rg->radii[j + 1] - rg->radii[j];
            const double c = rg->shell_volume(j) / (dr * dr);
            diag_[j] += c;
            diag_[j + 1] += c;
            upper_[j] = -c;
            lower_[j + 1] = -c;
        }
        diag_[n - 1] = 1.0;
        lower_[n - 1] = 0.0;
        upper_[n - 2] = 0.0;
    }
}

void Preconditioner::mask(std::vector<double>& g) const { pin(kind_, grid_, g); }

std::vector<double> Preconditioner::solve(const std::vector<double>& r) const {
    if (std::holds_alternative<RadialGrid>(grid_)) {
        // Thomas algorithm; the matrix is symmetric positive definite.
        const std::size_t n = diag_.size();
        std::vector<double> c(n), x(r);
        pin(kind_, grid_, x);
        double b = diag_[0];
        c[0] = upper_[0] / b;
        x[0] /= b;
        for (std::size_t j = 1; j < n; ++j) {
            b = diag_[j] - lower_[j] * c[j - 1];
            c[j] = upper_[j] / b;
            x[j] = (x[j] - lower_[j] * x[j - 1]) / b;
        }
        for (std::size_t j = n - 1; j-- > 0;) x[j] -= c[j] * x[j + 1];
        return x;
    }
    const auto& g = std::get<BoxGrid>(grid_);
    auto& fft = detail::fft_for(g);
    const auto spec = detail::spectrum_for(g);
    std::vector<double> rm(r);
    pin(kind_, grid_, rm);
    std::vector<std::complex<double>> U(fft.spectrum_size());
    fft.forward(rm.data(), U.data());
    const double hN = g.cell_volume();
    for (std::size_t k = 0; k < U.size(); ++k) {
        double sym = 0.0;
        if (kind_ == FamilyKind::FractionalSum) {
            for (double s : exponents_) sym += spec->xi2[k] == 0.0 ? 0.0 : std::pow(spec->xi2[k], s);
        } else {
            sym = spec->laplacian[k];
        }
        U[k] /= hN * (sym + 1.0);
    }
    std::vector<double> x(r.size());
    fft.backward(U.data(), x.data());
    const double inv = 1.0 / static_cast<double>(g.size());
    for (auto& v : x) v *= inv;
    pin(kind_, grid_, x);
    return x;
}

double Preconditioner::dual_norm(const std::vector<double>& r) const {
    std::vector<double> m(r);
    pin(kind_, grid_, m);
    return std::sqrt(std::max(0.0, dot(m, solve(m))));
}

std::vector<double> energy_gradient(const ProblemInstance& inst, const FunctionalFamily& fam, const GridFunction& u) {
    if (!fam.has_gradients()) throw Error(ErrorKind::MissingGradient, "family '" + fam.name + "' has no gradient hooks");
    std::vector<double> g = fam.phi_grad(u);
    for (auto& x : g) x = -x;
    for (const auto& pg : fam.psi_grads) {
        const auto gi = pg(u);
        for (std::size_t j = 0; j < g.size(); ++j) g[j] += gi[j];
    }
    pin(inst.kind, u.grid, g);
    return g;
}

std::vector<std::vector<double>> gradient_parts(const ProblemInstance& inst, const FunctionalFamily& fam, const GridFunction& u) {
    if (!fam.has_gradients()) throw Error(ErrorKind::MissingGradient, "family '" + fam.name + "' has no gradient hooks");
    std::vector<std::vector<double>> parts;
    for (const auto& pg : fam.psi_grads) parts.push_back(pg(u));
    parts.push_back(fam.phi_grad(u));
    for (auto& p : parts) pin(inst.kind, u.grid, p);
    return parts;
}

double el_residual(const ProblemInstance& inst, const FunctionalFamily& fam, const GridFunction& u) {
    const auto g = energy_gradient(inst, fam, u);
    return Preconditioner(inst, u.grid).dual_norm(g);
}

GridFunction resample(const GridFunction& u, const Grid& target) {
    if (const auto* src = u.radial()) {
        const auto* dst = std::get_if<RadialGrid>(&target);
        if (!dst) throw Error(ErrorKind::ValidationError, "resample needs matching grid kinds");
        const std::size_t n = src->size();
        const double h = src->radii[1] - src->radii[0];
        bool uniform = true;
        for (std::size_t j = 1; j < n && uniform; ++j)
            uniform = std::abs(src->radii[j] - src->radii[j - 1] - h) <= 1e-9 * h;
        const double rmax = src->radii.back();
        GridFunction out = zeros(target);
        if (uniform) {
            // Keys kernel with the even extension across r = 0, zero beyond the last node.
            auto at = [&](long long k) {
                k = std::llabs(k);
                return k < static_cast<long long>(n) ? u.values[static_cast<std::size_t>(k)] : 0.0;
            };
            for (std::size_t j = 0; j < dst->size(); ++j) {
                const double pos = dst->radii[j] / h;
                const auto base = static_cast<long long>(std::floor(pos));
                double v = 0.0;
                for (long long k = base - 1; k <= base + 2; ++k) v += keys(pos - static_cast<double>(k)) * at(k);
                out.values[j] = dst->radii[j] <= rmax ? v : 0.0;
            }
        } else {
            std::vector<double> x = src->radii, y = u.values;
            using boost::math::interpolators::pchip;
            auto spline = pchip<std::vector<double>>(std::move(x), std::move(y));
            for (std::size_t j = 0; j < dst->size(); ++j) {
                const double r = dst->radii[j];
                out.values[j] = r <= rmax ? spline(r) : 0.0;
            }
        }
        out.values.back() = 0.0;
        out.monotone = u.monotone && is_radially_nonincreasing(out);
        return out;
    }
    const auto& src = *u.box();
    const auto* dst = std::get_if<BoxGrid>(&target);
    if (!dst || dst->dim != src.dim) throw Error(ErrorKind::ValidationError, "resample needs matching grid kinds");

    // Separable pass per axis with periodic wrap.
    std::vector<std::size_t> shape = src.points;
    std::vector<double> cur = u.values;
    for (int a = 0; a < src.dim; ++a) {
        const std::size_t ns = src.points[a], nt = dst->points[a];
        std::size_t outer = 1, inner = 1;
        for (int b = 0; b < a; ++b) outer *= shape[b];
        for (int b = a + 1; b < src.dim; ++b) inner *= shape[b];
        std::vector<double> next(outer * nt * inner);
        for (std::size_t jt = 0; jt < nt; ++jt) {
            const double x = dst->coordinate(a, jt);
            const double pos = x / src.spacing[a] + static_cast<double>(ns / 2);
            const auto base = static_cast<long long>(std::floor(pos));
            double w[4];
            std::size_t idx[4];
            for (int m = 0; m < 4; ++m) {
                const long long k = base - 1 + m;
                w[m] = keys(pos - static_cast<double>(k));
                const auto n = static_cast<long long>(ns);
                idx[m] = static_cast<std::size_t>(((k % n) + n) % n);
            }
            for (std::size_t o = 0; o < outer; ++o)
                for (std::size_t i = 0; i < inner; ++i) {
                    double v = 0.0;
                    for (int m = 0; m < 4; ++m) v += w[m] * cur[(o * ns + idx[m]) * inner + i];
                    next[(o * nt + jt) * inner + i] = v;
                }
        }
        shape[a] = nt;
        cur = std::move(next);
    }
    return GridFunction(*dst, std::move(cur), false);
}

namespace {

struct Iterate {
    GridFunction u;
    Evaluation ev;
    double t = 1.0;  // accumulated dilation of this projection
};

// Projection onto the Pohozaev set of the working grid: dilation by t*,
// sampled back onto the grid, repeated while that keeps shrinking |t* - 1|.
// Resampling cannot be exact (periodic boxes wrap the tail), so Newton steps
// along P^{-1} grad K remove what is left of K. Throws NotOnManifold when K
// does not vanish.
Iterate project(const ProblemInstance& inst, const FunctionalFamily& fam, GridFunction v,
                const VariationalOptions& vo) {
    pin(inst.kind, v.grid, v.values);
    Iterate it;
    it.ev = evaluate(fam, v);
    const Grid grid = v.grid;
    double last = std::numeric_limits<double>::infinity();
    for (int pass = 0; pass < 6; ++pass) {
        const double t = pohozaev_root(it.ev.psi, it.ev.phi, fam.lambdas, fam.lambda_phi, vo);
        const double dev = std::abs(t - 1.0);
        if (dev <= 1e-14 || dev > 0.1 * last) break;
        last = dev;
        it.t *= t;
        v = resample(scale(v, t), grid);
        pin(inst.kind, grid, v.values);
        it.ev = evaluate(fam, v);
    }
    const double tol = 1e-2 * vo.tol_K;
    std::optional<Preconditioner> P;
    for (int k = 0;; ++k) {
        const double K = it.ev.K(fam);
        if (std::abs(K) <= tol * it.ev.K_scale(fam)) break;
        if (k == 30) throw Error(ErrorKind::NotOnManifold, "projection did not reach K = 0");
        if (!P) P.emplace(inst, grid);
        const auto parts = gradient_parts(inst, fam, v);
        std::vector<double> gK(v.size(), 0.0);
        for (std::size_t i = 0; i < parts.size(); ++i) {
            const double c = i < fam.n() ? fam.lambdas[i] : -fam.lambda_phi;
            for (std::size_t j = 0; j < gK.size(); ++j) gK[j] += c * parts[i][j];
        }
        const auto d = P->solve(gK);
        const double slope = dot(gK, d);
        if (!(slope > 0.0)) throw Error(ErrorKind::NotOnManifold, "K has no normal direction");
        const double c = -K / slope;
        for (std::size_t j = 0; j < v.size(); ++j) v.values[j] += c * d[j];
        v.monotone = false;
        it.ev = evaluate(fam, v);
    }
    it.u = std::move(v);
    return it;
}

class Descent {
public:
    Descent(const ProblemInstance& inst, const FunctionalFamily& fam, const SolverOptions& opts, SolveReport& rep)
        : inst_(inst), fam_(fam), opts_(opts), rep_(rep) {
        vo_.tol_K = opts.tol_K;
    }

    // Runs until convergence, stall or the iteration budget; returns the final iterate.
    Iterate run(Iterate it, std::size_t budget) {
        P_.emplace(inst_, it.u.grid);
        std::vector<double> energies{it.ev.I()};
        bool have_prev = false;
        std::vector<double> prev_u, prev_g, prev_Pg;
        std::size_t k = 0;
        for (;;) {
            // Tangent part of the gradient: remove the P-orthogonal component along grad K.
            const auto parts = gradient_parts(inst_, fam_, it.u);
            std::vector<double> gI(it.u.size(), 0.0), gK(it.u.size(), 0.0);
            for (std::size_t i = 0; i <= fam_.n(); ++i) {
                const double lam = i < fam_.n() ? fam_.lambdas[i] : fam_.lambda_phi;
                const double sgn = i < fam_.n() ? 1.0 : -1.0;
                for (std::size_t j = 0; j < gI.size(); ++j) {
                    gI[j] += sgn * parts[i][j];
                    gK[j] += sgn * lam * parts[i][j];
                }
            }
            const auto PgI = P_->solve(gI), PgK = P_->solve(gK);
            const double kk = dot(gK, PgK);
            const double mu = kk > 0.0 ? dot(gK, PgI) / kk : 0.0;
            std::vector<double> g(gI.size()), Pg(gI.size());
            for (std::size_t j = 0; j < g.size(); ++j) {
                g[j] = gI[j] - mu * gK[j];
                Pg[j] = PgI[j] - mu * PgK[j];
            }
            const double res2 = std::max(0.0, dot(g, Pg));
            const double res = std::sqrt(res2);
            const double Krel = std::abs(it.ev.K(fam_)) / std::max(it.ev.K_scale(fam_), 1e-300);
            if (res <= opts_.tol_el && Krel <= opts_.tol_K) {
                const ScaledResidual sr = scaled_el_residual(inst_, fam_, it.u);
                if (sr.value <= opts_.tol_el) {
                    rep_.stop = StopReason::Converged;
                    break;
                }
            }
            if (k >= budget) {
                rep_.stop = StopReason::MaxIters;
                break;
            }

            // Limited-memory BFGS on the tangent gradient with P^{-1} as the
            // initial inverse Hessian; falls back to -P^{-1} g when the
            // two-loop direction is not a descent direction.
            if (have_prev) {
                std::vector<double> sk(g.size()), yk(g.size()), Pyk(g.size());
                for (std::size_t j = 0; j < g.size(); ++j) {
                    sk[j] = it.u.values[j] - prev_u[j];
                    yk[j] = g[j] - prev_g[j];
                    Pyk[j] = Pg[j] - prev_Pg[j];
                }
                const double sy = dot(sk, yk);
                if (sy > 1e-14 * std::sqrt(dot(sk, sk) * dot(yk, yk))) {
                    hist_.push_back({std::move(sk), std::move(yk), std::move(Pyk), sy});
                    if (hist_.size() > opts_.memory) hist_.erase(hist_.begin());
                }
            }
            std::vector<double> dir = two_loop(g, Pg);
            if (kk > 0.0) {
                // Keep the direction tangent (grad K . dir = 0) so the projection
                // back onto the set is second order.
                const double c = dot(gK, dir) / kk;
                for (std::size_t j = 0; j < dir.size(); ++j) dir[j] -= c * PgK[j];
            }
            double slope = dot(g, dir);
            if (!(slope < 0.0)) {
                hist_.clear();
                for (std::size_t j = 0; j < dir.size(); ++j) dir[j] = -Pg[j];
                slope = -res2;
            }
            double alpha = opts_.initial_step;

            const double E = it.ev.I();
            bool accepted = false;
            int phi_failures = 0;
            int halvings = 0;
            Iterate next;
            for (; halvings <= opts_.max_halvings; ++halvings, alpha *= opts_.backtrack) {
                GridFunction v = it.u;
                for (std::size_t j = 0; j < v.size(); ++j) v.values[j] += alpha * dir[j];
                v.monotone = false;
                try {
                    next = project(inst_, fam_, std::move(v), vo_);
                } catch (const Error& e) {
                    if (e.kind() == ErrorKind::PhiNonpositive) ++phi_failures;
                    else if (e.kind() != ErrorKind::BracketNotFound && e.kind() != ErrorKind::NonFiniteValue &&
                             e.kind() != ErrorKind::NotOnManifold)
                        throw;
                    continue;
                }
                if (next.ev.I() <= E + opts_.armijo * alpha * slope) {
                    accepted = true;
                    break;
                }
            }
            if (!accepted) {
                if (phi_failures > opts_.max_halvings)
                    throw Error(ErrorKind::PhiNonpositive, "every trial step left the region Phi > 0");
                rep_.stop = StopReason::Stalled;
                break;
            }

            prev_u = it.u.values;
            prev_g = std::move(g);
            prev_Pg = std::move(Pg);
            have_prev = true;
            it = std::move(next);
            ++k;
            ++rep_.iterations;

            IterationRecord rec;
            rec.iter = rep_.iterations;
            rec.step = alpha;
            rec.halvings = halvings;
            rec.t_star = it.t;
            rec.el_residual = res;

            if (rep_.iterations % opts_.symmetrize_every == 0) {
                try {
                    Iterate q = project(inst_, fam_, symmetrize(it.u), vo_);
                    const double Eq = q.ev.I(), Ec = it.ev.I();
                    if (Eq <= Ec) {
                        rec.t_star *= q.t;
                        it = std::move(q);
                        rec.symmetrized = true;
                        have_prev = false;
                        hist_.clear();
                    }
                } catch (const Error& e) {
                    if (e.kind() != ErrorKind::PhiNonpositive && e.kind() != ErrorKind::BracketNotFound &&
                        e.kind() != ErrorKind::NotOnManifold)
                        throw;
                }
            }

            rec.energy = it.ev.I();
            rec.K = it.ev.K(fam_);
            const double inc = rec.energy - energies.back();
            if (inc > opts_.tol_energy * std::abs(energies.back())) rep_.monotone = false;
            rep_.max_energy_increase = std::max(rep_.max_energy_increase, inc);
            energies.push_back(rec.energy);
            rep_.t_star_history.push_back(rec.t_star);
            rep_.trace.push_back(rec);

            const std::size_t w = opts_.stall_window;
            if (energies.size() > w) {
                const double e0 = energies[energies.size() - 1 - w], e1 = energies.back();
                if (std::abs(e0 - e1) <= opts_.tol_energy * std::abs(e1)) {
                    rep_.stop = StopReason::Stalled;
                    break;
                }
            }
        }
        return it;
    }

private:
    struct Pair {
        std::vector<double> s, y, Py;
        double sy;
    };

    std::vector<double> two_loop(const std::vector<double>& g, const std::vector<double>& Pg) const {
        if (hist_.empty()) {
            std::vector<double> d(Pg.size());
            for (std::size_t j = 0; j < d.size(); ++j) d[j] = -Pg[j];
            return d;
        }
        std::vector<double> q = g;
        std::vector<double> a(hist_.size());
        for (std::size_t k = hist_.size(); k-- > 0;) {
            const Pair& h = hist_[k];
            a[k] = dot(h.s, q) / h.sy;
            for (std::size_t j = 0; j < q.size(); ++j) q[j] -= a[k] * h.y[j];
        }
        const Pair& last = hist_.back();
        const double gamma = last.sy / dot(last.y, last.Py);
        std::vector<double> r = P_->solve(q);
        for (auto& v : r) v *= gamma;
        for (std::size_t k = 0; k < hist_.size(); ++k) {
            const Pair& h = hist_[k];
            const double b = dot(h.y, r) / h.sy;
            for (std::size_t j = 0; j < r.size(); ++j) r[j] += (a[k] - b) * h.s[j];
        }
        for (auto& v : r) v = -v;
        return r;
    }

    std::vector<Pair> hist_;
    const ProblemInstance& inst_;
    const FunctionalFamily& fam_;
    const SolverOptions& opts_;
    SolveReport& rep_;
    std::optional<Preconditioner> P_;
    VariationalOptions vo_;
};

std::string echo(const ProblemInstance& inst) {
    std::ostringstream os;
    os << family_name(inst.kind) << " N=" << inst.N;
    if (!inst.exponents.empty()) {
        os << " exponents=[";
        for (std::size_t i = 0; i < inst.exponents.size(); ++i) os << (i ? "," : "") << inst.exponents[i];
        os << "]";
    }
    os << " f=" << inst.nonlinearity.name << " grid=" << grid_kind_name(inst.grid.kind) << "(R=" << inst.grid.R
       << ",M=" << inst.grid.M << ")";
    return os.str();
}

}  // namespace

ScaledResidual scaled_el_residual(const ProblemInstance& inst, const FunctionalFamily& fam, const GridFunction& u) {
    const auto parts = gradient_parts(inst, fam, u);
    const std::size_t m = parts.size();
    std::vector<double> alpha(m);
    for (std::size_t i = 0; i < m; ++i) alpha[i] = i + 1 < m ? fam.lambdas[i] : fam.lambda_phi;

    // S(x) = |sum_i e^{alpha_i x} b_i|^2 in the dual norm of the working grid,
    // with b_i = grad psi_i and b_m = -grad Phi.
    const Preconditioner P(inst, u.grid);
    std::vector<std::vector<double>> Pb(m);
    for (std::size_t i = 0; i < m; ++i) Pb[i] = P.solve(parts[i]);
    std::vector<double> Q(m * m);
    for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = 0; j < m; ++j) {
            const double sij = (i + 1 < m ? 1.0 : -1.0) * (j + 1 < m ? 1.0 : -1.0);
            Q[i * m + j] = sij * dot(parts[i], Pb[j]);
        }
    auto S = [&](double x, int order) {
        double v = 0.0;
        for (std::size_t i = 0; i < m; ++i)
            for (std::size_t j = 0; j < m; ++j) {
                const double a = alpha[i] + alpha[j];
                v += std::pow(a, order) * Q[i * m + j] * std::exp(a * x);
            }
        return v;
    };
    const auto brent = boost::math::tools::brent_find_minima([&](double x) { return S(x, 0); }, -1.0, 1.0, 40);
    double x = brent.first;
    for (int k = 0; k < 20; ++k) {
        const double d1 = S(x, 1), d2 = S(x, 2);
        if (!(d2 > 0.0)) break;
        const double dx = -d1 / d2;
        if (!std::isfinite(dx) || std::abs(dx) > 0.1) break;
        x += dx;
        if (std::abs(dx) < 1e-16) break;
    }

    ScaledResidual out;
    out.tau = std::exp(x);
    const GridFunction scaled = scale(u, out.tau);
    std::vector<double> r(u.size(), 0.0);
    for (std::size_t i = 0; i < m; ++i) {
        const double c = (i + 1 < m ? 1.0 : -1.0) * std::pow(out.tau, alpha[i]);
        for (std::size_t j = 0; j < r.size(); ++j) r[j] += c * parts[i][j];
    }
    out.value = Preconditioner(inst, scaled.grid).dual_norm(r);
    return out;
}

SolveReport minimize(const ProblemInstance& inst, const FunctionalFamily& fam, const GridFunction& u0,
                     const SolverOptions& opts) {
    opts.validate();
    if (!fam.has_gradients()) throw Error(ErrorKind::MissingGradient, "family '" + fam.name + "' has no gradient hooks");
    if (!(fam.phi(u0) > 0.0)) throw Error(ErrorKind::PhiNonpositive, "initial state has Phi <= 0");

    SolveReport rep;
    rep.problem = echo(inst);
    rep.delta = inst.kind == FamilyKind::Anisotropic ? inst.delta : 0.0;
    VariationalOptions vo;
    vo.tol_K = opts.tol_K;

    Iterate it = project(inst, fam, u0, vo);
    rep.t_star_history.push_back(it.t);
    Descent main(inst, fam, opts, rep);
    it = main.run(std::move(it), opts.max_iters);

    ProblemInstance used = inst;
    FunctionalFamily final_fam = fam;
    const bool anneal = inst.kind == FamilyKind::Anisotropic && opts.anneal_delta > 0.0 &&
                        opts.anneal_delta < inst.delta && rep.stop != StopReason::MaxIters;
    if (anneal) {
        used.delta = opts.anneal_delta;
        final_fam = build_family(used);
        it = project(used, final_fam, it.u, vo);
        const std::size_t spent = rep.iterations;
        Descent late(used, final_fam, opts, rep);
        it = late.run(std::move(it), spent < opts.max_iters ? opts.max_iters - spent : 0);
        rep.delta = used.delta;
    }

    const Evaluation ev = evaluate(final_fam, it.u);
    rep.u = it.u;
    rep.psi = ev.psi;
    rep.phi = ev.phi;
    rep.energy = ev.I();
    rep.K_value = ev.K(final_fam);
    rep.K_relative = std::abs(rep.K_value) / std::max(ev.K_scale(final_fam), 1e-300);
    const ScaledResidual sr = scaled_el_residual(used, final_fam, it.u);
    rep.el_residual = sr.value;
    rep.el_tau = sr.tau;
    rep.el_raw = el_residual(used, final_fam, it.u);
    rep.converged = rep.stop == StopReason::Converged;
    if (rep.stop == StopReason::MaxIters) {
        std::ostringstream os;
        os << "no convergence after " << rep.iterations << " iterations (EL residual " << rep.el_residual
           << ", relative K " << rep.K_relative << ")";
        throw NoConvergence(os.str(), std::move(rep));
    }
    return rep;
}

SolveReport solve(const ProblemInstance& inst, const SolverOptions& opts) {
    const FunctionalFamily fam = build_family(inst);
    const Grid grid = inst.make_grid();
    return minimize(inst, fam, initial_guess(inst, grid), opts);
}

std::vector<double> operator_field(const ProblemInstance& inst, const GridFunction& u) {
    const auto w = node_weights(u.grid);
    std::vector<double> g;
    switch (inst.kind) {
        case FamilyKind::Classical: g = dirichlet_gradient(u, Difference::Forward); break;
        case FamilyKind::FractionalSum: {
            g.assign(u.size(), 0.0);
            for (double s : inst.exponents) {
                const auto gi = fractional_seminorm_gradient(u, s);
                for (std::size_t j = 0; j < g.size(); ++j) g[j] += 0.5 * gi[j];
            }
            break;
        }
        case FamilyKind::Anisotropic: {
            g.assign(u.size(), 0.0);
            for (int a = 0; a < inst.N; ++a) {
                const auto gi = axis_energy_gradient(u, a, inst.exponents[a], inst.delta, Difference::Forward);
                for (std::size_t j = 0; j < g.size(); ++j) g[j] += gi[j];
            }
            break;
        }
    }
    std::vector<double> field(u.size());
    for (std::size_t j = 0; j < u.size(); ++j) field[j] = g[j] / w[j] + inst.mass_derivative(u.values[j]);
    pin(inst.kind, u.grid, field);
    return field;
}

DiscontinuousReport solve_discontinuous(const ProblemInstance& inst, const std::vector<double>& eps_factors,
                                        const SolverOptions& opts, double inclusion_tol) {
    if (inst.kind != FamilyKind::Classical)
        throw Error(ErrorKind::ValidationError, "the mollified route is implemented for the classical family");
    DiscontinuousReport out;
    out.inclusion_tol = inclusion_tol;
    const NonlinearitySpec& base = inst.nonlinearity;
    const double gap = base.has_jumps() ? base.min_jump_gap() : 0.0;
    const Grid grid = inst.make_grid();

    std::vector<double> factors = eps_factors;
    if (factors.empty() || !base.has_jumps()) factors.assign(1, 0.0);

    GridFunction warm;
    for (double factor : factors) {
        ProblemInstance stage = inst;
        const double eps = base.has_jumps() ? factor * gap : 0.0;
        if (base.has_jumps()) stage.nonlinearity = mollify(base, eps).smoothed;
        const FunctionalFamily fam = build_family(stage);
        GridFunction u0 = warm.size() ? resample(warm, grid) : initial_guess(stage, grid);
        if (!(fam.phi(u0) > 0.0)) u0 = initial_guess(stage, grid);
        SolveReport rep = minimize(stage, fam, u0, opts);

        StageResult sr;
        sr.epsilon = eps;
        sr.energy = rep.energy;
        sr.el_residual = rep.el_residual;
        sr.iterations = rep.iterations;
        // The equation holds on the grid dilated by el_tau, see scaled_el_residual.
        const GridFunction at = scale(rep.u, rep.el_tau);
        const auto field = operator_field(stage, at);
        sr.violation = inclusion_check(base, at, field, inclusion_tol);
        const auto w = node_weights(at.grid);
        for (std::size_t j = 0; j < w.size(); ++j)
            if (at.values[j] > 0.0) sr.support += w[j];
        out.stages.push_back(sr);
        warm = rep.u;
        out.final = std::move(rep);
    }
    return out;
}

}  // namespace pohozaev
