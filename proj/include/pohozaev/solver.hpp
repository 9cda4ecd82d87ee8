#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "pohozaev/error.hpp"
#include "pohozaev/grid.hpp"
#include "pohozaev/problem.hpp"
#include "pohozaev/variational.hpp"

namespace pohozaev {

struct SolverOptions {
    std::size_t max_iters = 4000;
    double initial_step = 1.0;
    double backtrack = 0.5;
    double armijo = 1e-4;
    int max_halvings = 40;
    double tol_energy = 1e-13;  // relative energy change over stall_window iterations
    std::size_t stall_window = 25;
    double tol_el = 1e-6;
    double tol_K = 1e-10;  // relative to sum lambda_i psi_i + lambda_phi |Phi|
    std::size_t symmetrize_every = 10;
    std::size_t memory = 8;  // L-BFGS pairs
    double anneal_delta = 1e-12;  // final anisotropic regularization, 0 keeps the instance value
    std::uint64_t seed = 0;

    void validate() const;
    bool operator==(const SolverOptions&) const = default;
};

enum class StopReason { Converged, Stalled, MaxIters };
const char* stop_reason_name(StopReason r);

struct IterationRecord {
    std::size_t iter = 0;
    double energy = 0.0;  // projected energy after the step
    double K = 0.0;
    double el_residual = 0.0;
    double step = 0.0;
    double t_star = 1.0;
    int halvings = 0;
    bool symmetrized = false;
};

struct SolveReport {
    std::string problem;
    GridFunction u;
    double energy = 0.0;
    std::vector<double> psi;
    double phi = 0.0;
    double K_value = 0.0;
    double K_relative = 0.0;
    double el_residual = 0.0;
    std::size_t iterations = 0;
    StopReason stop = StopReason::MaxIters;
    bool converged = false;
    std::vector<double> t_star_history;
    std::vector<IterationRecord> trace;
    // Projected energies never rose by more than tol_energy between accepted steps.
    bool monotone = true;
    double max_energy_increase = 0.0;
    // Euler-Lagrange residual on the working grid, and the grid dilation tau
    // at which el_residual is attained.
    double el_raw = 0.0;
    double el_tau = 1.0;
    double delta = 0.0;  // anisotropic regularization in force at the end
};

class NoConvergence : public Error {
public:
    NoConvergence(const std::string& message, SolveReport report)
        : Error(ErrorKind::NoConvergence, message), report_(std::move(report)) {}
    const SolveReport& report() const { return report_; }

private:
    SolveReport report_;
};

// Smooth radial plateau of height tau on B_1 cut off by r = 3/2, amplified by
// 1.5 until Phi > 0 and the fiber maximum lies at t* <= 2. Throws
// PhiNeverPositive when Phi is still <= 0 after 40 amplifications.
GridFunction initial_guess(const ProblemInstance& inst, const Grid& grid);

// Pinned nodes carry the truncation boundary: the outermost radial node, the
// seam (index 0 on some axis) of a local box, the zero pad of a fractional box.
// Without them a periodic box admits near-constant members of the Pohozaev set
// with vanishing energy.
bool pinned_index(FamilyKind kind, std::size_t points, std::size_t index);
void pin(FamilyKind kind, const Grid& grid, std::vector<double>& values);

// Energy-metric preconditioner P = (quadratic part Hessian) + mass. Pinned
// nodes (outermost radial node, seam of the box) are held at zero.
class Preconditioner {
public:
    Preconditioner(const ProblemInstance& inst, const Grid& grid);
    std::vector<double> solve(const std::vector<double>& r) const;
    double dual_norm(const std::vector<double>& r) const;
    // Zeroes entries of pinned nodes.
    void mask(std::vector<double>& g) const;

private:
    Grid grid_;
    FamilyKind kind_;
    std::vector<double> exponents_;
    std::vector<double> lower_, diag_, upper_;  // radial tridiagonal
};

// Gradient of I with respect to the nodal values, pinned nodes zeroed.
std::vector<double> energy_gradient(const ProblemInstance& inst, const FunctionalFamily& fam, const GridFunction& u);

// Dual norm sqrt(r^T P^{-1} r) of the discrete weak-form residual of the
// Euler-Lagrange equation. Throws MissingGradient without gradient hooks.
double el_residual(const ProblemInstance& inst, const FunctionalFamily& fam, const GridFunction& u);

// Gradients of psi_1..psi_n and Phi with pinned nodes zeroed.
std::vector<std::vector<double>> gradient_parts(const ProblemInstance& inst, const FunctionalFamily& fam,
                                                const GridFunction& u);

// On a fixed grid the constrained minimizer is critical only up to the
// dilation direction. This residual is the smallest dual norm of
// sum tau^{lambda_i} grad psi_i - tau^{lambda_phi} grad Phi over tau in
// [1/e, e], i.e. the residual of the same nodal values on the grid dilated by
// tau; for a single exponent it vanishes at the constrained minimizer.
struct ScaledResidual {
    double value = 0.0;
    double tau = 1.0;
};
ScaledResidual scaled_el_residual(const ProblemInstance& inst, const FunctionalFamily& fam, const GridFunction& u);

// Samples u(x / t) back on `target` (cubic interpolation; zero outside the
// source support for radial grids, periodic wrap for boxes).
GridFunction resample(const GridFunction& u, const Grid& target);

// Works on the grid of u0. Projects onto the Pohozaev set (dilation, then
// resampling back onto the grid), then preconditioned L-BFGS on the tangent
// gradient with Armijo backtracking, re-projecting after
// every step and symmetrizing every symmetrize_every iterations.
SolveReport minimize(const ProblemInstance& inst, const FunctionalFamily& fam, const GridFunction& u0,
                     const SolverOptions& opts = {});

// initial_guess on the instance grid followed by minimize.
SolveReport solve(const ProblemInstance& inst, const SolverOptions& opts = {});

struct StageResult {
    double epsilon = 0.0;
    double energy = 0.0;
    double violation = 0.0;  // measure of nodes violating the inclusion
    double support = 0.0;    // measure of {u > 0}
    double el_residual = 0.0;
    std::size_t iterations = 0;
};

struct DiscontinuousReport {
    SolveReport final;
    std::vector<StageResult> stages;
    double inclusion_tol = 0.0;
};

// Residual field -Delta u + u on the grid of u, from the discrete weak form
// divided by the node weights.
std::vector<double> operator_field(const ProblemInstance& inst, const GridFunction& u);

// Mollified solves for eps = factor * min_jump_gap along the schedule, warm
// started, with the inclusion checked against the unmollified envelopes on the
// grid dilated by the el_tau of each stage.
DiscontinuousReport solve_discontinuous(const ProblemInstance& inst, const std::vector<double>& eps_factors,
                                        const SolverOptions& opts = {}, double inclusion_tol = 1e-3);

}  // namespace pohozaev
