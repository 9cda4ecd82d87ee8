#pragma once

#include <string>
#include <vector>

#include "pohozaev/grid.hpp"
#include "pohozaev/nonlinearity.hpp"
#include "pohozaev/variational.hpp"

namespace pohozaev {

enum class FamilyKind { FractionalSum, Anisotropic, Classical };
enum class GridKind { Radial, Box };

const char* family_name(FamilyKind kind);
const char* grid_kind_name(GridKind kind);

struct GridTemplate {
    GridKind kind = GridKind::Radial;
    double R = 20.0;
    std::size_t M = 4096;  // radial cells, or box points per axis
    bool operator==(const GridTemplate&) const = default;
};

struct ProblemInstance {
    FamilyKind kind = FamilyKind::Classical;
    int N = 3;
    std::vector<double> exponents;  // s_1 <= .. <= s_n, or p_1 <= .. <= p_N
    NonlinearitySpec nonlinearity = NonlinearitySpec::builtin("cubic");
    GridTemplate grid;
    double delta = 1e-8;  // anisotropic gradient regularization

    // Fractional boxes are [-2R, 2R]^N with 2M points per axis, the outer half
    // being a pinned zero pad.
    Grid make_grid() const;
    // Throws NonadmissibleExponents or ValidationError naming the violated bound.
    void validate() const;
    // Upper end of the growth window for q (f grows like s^{q-1}).
    double critical_q() const;
    // Mass term m(s) in Phi = integral F(u) - m(u).
    double mass(double s) const;
    double mass_derivative(double s) const;
    // G(tau) = F(tau) - m(tau).
    double G(double tau) const { return nonlinearity.F(tau) - mass(tau); }
    // The declared tau of the nonlinearity, else the first 2^{k/2} (k >= -40)
    // with G > 0, else 1.
    double plateau_height() const;

    bool operator==(const ProblemInstance&) const = default;
};

double anisotropic_critical_exponent(int N, const std::vector<double>& p);

// psi_i and Phi with exponents N - 2 s_i, N - p_i or N - 2, and lambda_phi = N.
FunctionalFamily build_family(const ProblemInstance& inst);

}  // namespace pohozaev
