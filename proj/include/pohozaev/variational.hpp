#pragma once

#include <functional>
#include <string>
#include <vector>

#include "pohozaev/grid.hpp"

namespace pohozaev {

using ScalarMap = std::function<double(const GridFunction&)>;
using GradientMap = std::function<std::vector<double>(const GridFunction&)>;

// I = sum psi_i - Phi, with psi_i(u_t) = t^{lambda_i} psi_i(u) and
// Phi(u_t) = t^{lambda_phi} Phi(u) under the dilation u_t(x) = u(x/t).
struct FunctionalFamily {
    std::string name;
    std::vector<ScalarMap> psi;
    ScalarMap phi;
    std::vector<double> lambdas;
    double lambda_phi = 0.0;
    std::vector<GradientMap> psi_grads;  // empty when not available
    GradientMap phi_grad;

    std::size_t n() const { return psi.size(); }
    bool has_gradients() const;
    // Throws NonadmissibleExponents unless 0 < max lambda_i < lambda_phi.
    void validate() const;
};

struct VariationalOptions {
    double tol_K = 1e-10;
    double tol_t = 1e-12;
};

struct Evaluation {
    std::vector<double> psi;
    double phi = 0.0;

    double J() const;
    double I() const { return J() - phi; }
    double K(const FunctionalFamily& fam) const;
    // Natural size of K: sum lambda_i psi_i + lambda_phi |Phi|.
    double K_scale(const FunctionalFamily& fam) const;
};

Evaluation evaluate(const FunctionalFamily& fam, const GridFunction& u);
double eval_K(const FunctionalFamily& fam, const GridFunction& u);
double eval_I(const FunctionalFamily& fam, const GridFunction& u);

// u_t(x) = u(x/t) realized by dilating the grid: radial radii scale by t and
// weights by t^N, box spacings scale by t. t = 0 gives the zero function.
GridFunction scale(const GridFunction& u, double t);

struct DilationAction {
    std::function<GridFunction(double, const GridFunction&)> apply;
    static DilationAction grid_dilation();
};

struct FiberProfile {
    std::vector<double> t_samples;
    std::vector<double> h_values;
    std::vector<double> k_values;
    double t_star = 0.0;
    double h_star = 0.0;
    double k_residual = 0.0;  // |K(u_{t*})| measured on the dilated function
    double k_scale = 0.0;
    bool tail_negative = false;  // h < 0 at the largest sampled t
};

// h(t) = sum t^{lambda_i} psi_i(u) - t^{lambda_phi} Phi(u) from cached values.
FiberProfile fiber(const FunctionalFamily& fam, const DilationAction& act, const GridFunction& u,
                   const std::vector<double>& t_grid, const VariationalOptions& opts = {});

// Unique t > 0 with sum lambda_i t^{lambda_i} psi_i = lambda_phi t^{lambda_phi} Phi.
double pohozaev_root(const std::vector<double>& psi, double phi, const std::vector<double>& lambdas, double lambda_phi,
                     const VariationalOptions& opts = {});

struct PohozaevState {
    GridFunction u;
    bool on_manifold = false;
    double K_value = 0.0;
    double I_value = 0.0;
};

PohozaevState make_state(const FunctionalFamily& fam, GridFunction u, const VariationalOptions& opts = {});

struct Projection {
    double t_star = 1.0;
    PohozaevState state;
};

Projection project_to_pohozaev(const FunctionalFamily& fam, const GridFunction& u, const VariationalOptions& opts = {});

// Relative gap |I - sum (1 - lambda_i/lambda_phi) psi_i| / max(|I|, eps).
double pohozaev_identity_check(const FunctionalFamily& fam, const PohozaevState& st,
                               const VariationalOptions& opts = {});

std::vector<double> log_spaced(double lo, double hi, std::size_t count);

}  // namespace pohozaev
