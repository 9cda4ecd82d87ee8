#include "pohozaev/problem.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "pohozaev/calculus.hpp"
#include "pohozaev/error.hpp"

namespace pohozaev {

const char* family_name(FamilyKind kind) {
    switch (kind) {
        case FamilyKind::FractionalSum: return "fractional";
        case FamilyKind::Anisotropic: return "anisotropic";
        case FamilyKind::Classical: return "classical";
    }
    return "?";
}

const char* grid_kind_name(GridKind kind) { return kind == GridKind::Radial ? "radial" : "box"; }

Grid ProblemInstance::make_grid() const {
    if (grid.kind == GridKind::Radial) return RadialGrid::uniform(N, grid.R, grid.M);
    // The nonlocal seminorm sees the whole period, so fractional boxes carry a
    // zero pad of the same width on every side.
    if (kind == FamilyKind::FractionalSum) return BoxGrid::cube(N, 2.0 * grid.R, 2 * grid.M);
    return BoxGrid::cube(N, grid.R, grid.M);
}

double anisotropic_critical_exponent(int N, const std::vector<double>& p) {
    double s = 0.0;
    for (double x : p) s += 1.0 / x;
    return N / (s - 1.0);
}

void ProblemInstance::validate() const {
    std::ostringstream os;
    if (N < 1) throw Error(ErrorKind::ValidationError, "N >= 1 required");
    if (!(grid.R > 0.0) || grid.M < 4) throw Error(ErrorKind::ValidationError, "grid needs R > 0 and M >= 4");
    switch (kind) {
        case FamilyKind::FractionalSum: {
            if (exponents.empty()) throw Error(ErrorKind::ValidationError, "fractional family needs at least one s");
            for (double s : exponents)
                if (!(s > 0.0 && s < 1.0)) throw Error(ErrorKind::ValidationError, "every s_i must lie in (0, 1)");
            if (!std::is_sorted(exponents.begin(), exponents.end()))
                throw Error(ErrorKind::ValidationError, "s_1 <= .. <= s_n required");
            if (!(N > 2.0 * exponents.back())) {
                os << "N > 2·s_n required (N = " << N << ", s_n = " << exponents.back() << ")";
                throw Error(ErrorKind::NonadmissibleExponents, os.str());
            }
            if (grid.kind != GridKind::Box) throw Error(ErrorKind::ValidationError, "fractional family needs a box grid");
            break;
        }
        case FamilyKind::Anisotropic: {
            if (static_cast<int>(exponents.size()) != N)
                throw Error(ErrorKind::ValidationError, "anisotropic family needs one p_i per axis");
            if (!std::is_sorted(exponents.begin(), exponents.end()))
                throw Error(ErrorKind::ValidationError, "p_1 <= .. <= p_N required");
            if (!(exponents.front() > 1.0) || !(exponents.back() < N)) {
                os << "1 < p_1 and p_N < N required (N = " << N << ", p_1 = " << exponents.front()
                   << ", p_N = " << exponents.back() << ")";
                throw Error(ErrorKind::NonadmissibleExponents, os.str());
            }
            if (grid.kind != GridKind::Box) throw Error(ErrorKind::ValidationError, "anisotropic family needs a box grid");
            if (!(delta >= 0.0)) throw Error(ErrorKind::ValidationError, "delta must be >= 0");
            break;
        }
        case FamilyKind::Classical: {
            if (N < 3) {
                os << "N >= 3 required so that lambda = N - 2 > 0 (N = " << N << ")";
                throw Error(ErrorKind::NonadmissibleExponents, os.str());
            }
            break;
        }
    }
}

double ProblemInstance::critical_q() const {
    switch (kind) {
        case FamilyKind::FractionalSum: {
            const double s = exponents.back();
            return 2.0 * N / (N - 2.0 * s) - 1.0;
        }
        case FamilyKind::Anisotropic: return anisotropic_critical_exponent(N, exponents);
        case FamilyKind::Classical: return 2.0 * N / (N - 2.0) - 1.0;
    }
    return 0.0;
}

double ProblemInstance::mass(double s) const {
    if (kind == FamilyKind::Anisotropic) {
        const double p1 = exponents.front();
        return std::pow(std::abs(s), p1) / p1;
    }
    return 0.5 * s * s;
}

double ProblemInstance::plateau_height() const {
    if (std::isfinite(nonlinearity.tau)) return nonlinearity.tau;
    for (int k = -40; k <= 40; ++k) {
        const double t = std::pow(2.0, 0.5 * k);
        if (G(t) > 0.0) return t;
    }
    return 1.0;
}

double ProblemInstance::mass_derivative(double s) const {
    if (kind == FamilyKind::Anisotropic) {
        const double p1 = exponents.front();
        if (s == 0.0) return 0.0;
        return std::pow(std::abs(s), p1 - 1.0) * (s > 0 ? 1.0 : -1.0);
    }
    return s;
}

FunctionalFamily build_family(const ProblemInstance& inst) {
    inst.validate();
    FunctionalFamily fam;
    fam.name = family_name(inst.kind);
    fam.lambda_phi = inst.N;
    const auto nl = inst.nonlinearity;

    // Phi(u) = integral of F(u) - m(u), shared by all three families.
    fam.phi = [inst, nl](const GridFunction& u) {
        const auto w = node_weights(u.grid);
        double s = 0.0;
        for (std::size_t j = 0; j < u.size(); ++j) s += w[j] * (nl.F(u.values[j]) - inst.mass(u.values[j]));
        return s;
    };
    fam.phi_grad = [inst, nl](const GridFunction& u) {
        auto g = node_weights(u.grid);
        for (std::size_t j = 0; j < u.size(); ++j) g[j] *= nl.f(u.values[j]) - inst.mass_derivative(u.values[j]);
        return g;
    };

    switch (inst.kind) {
        case FamilyKind::FractionalSum:
            for (double s : inst.exponents) {
                fam.lambdas.push_back(inst.N - 2.0 * s);
                fam.psi.push_back([s](const GridFunction& u) { return 0.5 * fractional_seminorm_unchecked(u, s).value; });
                fam.psi_grads.push_back([s](const GridFunction& u) {
                    auto g = fractional_seminorm_gradient(u, s);
                    for (auto& x : g) x *= 0.5;
                    return g;
                });
            }
            break;
        case FamilyKind::Anisotropic:
            for (int a = 0; a < inst.N; ++a) {
                const double p = inst.exponents[a];
                const double delta = inst.delta;
                fam.lambdas.push_back(inst.N - p);
                fam.psi.push_back(
                    [a, p, delta](const GridFunction& u) { return axis_energy(u, a, p, delta, Difference::Forward); });
                fam.psi_grads.push_back([a, p, delta](const GridFunction& u) {
                    return axis_energy_gradient(u, a, p, delta, Difference::Forward);
                });
            }
            break;
        case FamilyKind::Classical:
            fam.lambdas.push_back(inst.N - 2.0);
            fam.psi.push_back([](const GridFunction& u) { return dirichlet_energy(u, Difference::Forward); });
            fam.psi_grads.push_back([](const GridFunction& u) { return dirichlet_gradient(u, Difference::Forward); });
            break;
    }
    fam.validate();
    return fam;
}

}  // namespace pohozaev
