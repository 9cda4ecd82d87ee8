#pragma once

#include <functional>
#include <vector>

#include "pohozaev/grid.hpp"

namespace pohozaev {

// Sum of weight * integrand(value) over the nodes.
double quad(const GridFunction& u, const std::function<double(double)>& integrand);
double integrate(const Grid& grid, const std::vector<double>& values);

// Radially symmetric decreasing rearrangement of max(u, 0) on the same grid.
// Radial grids: descending sort against cumulative volume, then monotone
// linear interpolation back to the nodes (the identity on nonincreasing data).
// Box grids: lattice rearrangement by distance from the center node, with
// values averaged over nodes at exactly equal distance.
GridFunction symmetrize(const GridFunction& u);

struct SpectralValue {
    double value = 0.0;
    double high_fraction = 0.0;  // share carried by the top third of the spectrum
};

// Integral of |xi|^{2s} |u^|^2 through the DFT with Plancherel normalization.
// Radial inputs are first embedded in a symmetric box. Throws GridTooCoarse when
// more than 1% of the value sits in the top third of the spectrum.
double fractional_seminorm(const GridFunction& u, double s);
SpectralValue fractional_seminorm_unchecked(const GridFunction& u, double s);
// Gradient of the seminorm value with respect to the nodal values.
std::vector<double> fractional_seminorm_gradient(const GridFunction& u, double s);
GridFunction embed_in_box(const GridFunction& radial);

enum class Difference { Centered, Forward };

// Per-axis (1/p_i) * integral of (sqrt(d^2 + delta^2) - delta)^{p_i}, d the
// difference quotient along axis i. The centered variant throws GridTooCoarse
// when it disagrees with one-sided differences by more than 5%.
std::vector<double> anisotropic_energy(const GridFunction& u, const std::vector<double>& p, double delta,
                                       Difference scheme = Difference::Centered);
double axis_energy(const GridFunction& u, int axis, double p, double delta, Difference scheme);
std::vector<double> axis_energy_gradient(const GridFunction& u, int axis, double p, double delta,
                                         Difference scheme);

// (1/2) integral |grad u|^2. Radial grids differentiate in r cell by cell; box
// grids follow anisotropic_energy with p = 2 on every axis.
double dirichlet_energy(const GridFunction& u, Difference scheme = Difference::Centered);
std::vector<double> dirichlet_gradient(const GridFunction& u, Difference scheme = Difference::Forward);

}  // namespace pohozaev
