#pragma once

#include <limits>
#include <string>
#include <vector>

#include "pohozaev/grid.hpp"

namespace pohozaev {

struct Monomial {
    double coeff = 0.0;
    double power = 0.0;
    bool operator==(const Monomial&) const = default;
};

// f(s) = sum coeff * s^power for s in [start, next start).
struct Segment {
    double start = 0.0;
    std::vector<Monomial> terms;
    bool operator==(const Segment&) const = default;
};

// Piecewise generalized polynomial on s >= 0, zero for s < 0. Jumps sit at
// segment starts where the left limit differs from the right value. A nonzero
// `smoothing` replaces each jump by a linear ramp of half width `smoothing`
// (a box-kernel average of the jump part only).
struct NonlinearitySpec {
    std::string name;
    double tau = std::numeric_limits<double>::quiet_NaN();  // NaN: search for one
    double A = 0.0, B = 0.0, q = 1.0;                        // |f(s)| <= A|s| + B|s|^q
    double smoothing = 0.0;

    // "cubic", "power(p)", "cubic-jump(a,h)", "zero"
    static NonlinearitySpec builtin(const std::string& text);
    static NonlinearitySpec table(std::vector<Segment> segments, std::string name = "table");

    const std::vector<Segment>& segments() const { return segments_; }
    double f(double s) const;
    double F(double s) const;
    double left_limit(double s) const;
    double lower(double s) const;
    double upper(double s) const;
    const std::vector<double>& jump_points() const { return jumps_; }
    const std::vector<double>& jump_heights() const { return heights_; }
    // Smallest of the first jump point and the gaps between jump points.
    double min_jump_gap() const;
    bool has_jumps() const { return !jump_points().empty(); }

    bool operator==(const NonlinearitySpec& o) const;

private:
    std::vector<Segment> segments_;
    std::vector<double> cum_;  // F at segment starts, unsmoothed
    std::vector<double> jumps_;
    std::vector<double> heights_;
    void prepare();
    std::size_t segment_of(double s) const;
    double raw_f(double s) const;
    double raw_F(double s) const;
};

struct MollifiedNonlinearity {
    NonlinearitySpec base;
    double epsilon = 0.0;
    NonlinearitySpec smoothed;
    double f_eps(double s) const { return smoothed.f(s); }
    double F_eps(double s) const { return smoothed.F(s); }
};

// Throws EpsilonTooLarge unless eps < min_jump_gap / 2.
MollifiedNonlinearity mollify(const NonlinearitySpec& spec, double eps);

struct ConditionResult {
    std::string name;
    bool passed = true;
    bool advisory = false;  // reported but not a hard requirement
    std::string witness;
};

struct NonlinearityReport {
    std::vector<ConditionResult> conditions;
    bool passed() const;
};

// Samples the small-s, growth, positivity and G(tau) > 0 conditions. The growth
// window (1, upper_q) is family dependent and only advisory.
NonlinearityReport validate_nonlinearity(const NonlinearitySpec& spec, double upper_q = 0.0);

// G(tau) = integral of f - s from 0 to tau by adaptive quadrature.
double quadratic_G(const NonlinearitySpec& spec, double tau);

// Cell volume of nodes where residual is outside [lower(u) - tol, upper(u) + tol].
double inclusion_check(const NonlinearitySpec& spec, const GridFunction& u, const std::vector<double>& residual,
                       double tol);

}  // namespace pohozaev
