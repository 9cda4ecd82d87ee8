#pragma once

#include <vector>

#include "pohozaev/grid.hpp"
#include "pohozaev/nonlinearity.hpp"

namespace pohozaev {

struct ShootingOptions {
    double r0 = 1e-6;       // series start
    double r_max = 80.0;
    double tol_a = 1e-12;   // relative bracket width on u(0)
    double rtol = 1e-12;
    double atol = 1e-16;
    double cutoff = 1e-6;   // profile ends where u < cutoff * u(0)
};

// Radial ground state of u'' + (N-1)/r u' = u - f(u), u'(0) = 0, u -> 0,
// found by bisection on u(0) between undershoot (u' turns positive) and
// overshoot (u crosses zero).
struct OracleProfile {
    int N = 3;
    double a = 0.0;  // u(0)
    std::vector<double> r, u, v;
    double r_cut = 0.0;
    double psi = 0.0;  // (1/2) integral |u'|^2
    double phi = 0.0;  // integral F(u) - u^2/2
    double energy() const { return psi - phi; }
    double K() const { return (N - 2.0) * psi - N * phi; }

    double operator()(double radius) const;
    GridFunction sample(const Grid& grid) const;
};

// Throws BracketNotFound when no undershoot/overshoot pair shows up in the scan.
OracleProfile shooting_oracle(int N, const NonlinearitySpec& spec, const ShootingOptions& opts = {});

}  // namespace pohozaev
