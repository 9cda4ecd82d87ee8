#include "pohozaev/shooting.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/numeric/odeint.hpp>

#include <algorithm>
#include <array>
#include <cmath>

#include "pohozaev/error.hpp"

namespace pohozaev {

namespace {

using State = std::array<double, 4>;  // u, u', psi density integral, Phi density integral
namespace odeint = boost::numeric::odeint;

enum class Outcome { Undershoot, Overshoot, Undecided };

struct Shot {
    Outcome outcome = Outcome::Undecided;
    std::vector<double> r, u, v;
    State end{};
    double r_end = 0.0;
};

// Integrates from the series start; with `keep` the trajectory is recorded
// until u drops below the cutoff.
Shot shoot(int N, const NonlinearitySpec& f, double a, const ShootingOptions& o, bool keep) {
    const double omega = sphere_area(N);
    auto rhs = [&](const State& y, State& dy, double r) {
        const double u = y[0], v = y[1];
        const double rn = omega * std::pow(r, N - 1);
        dy[0] = v;
        dy[1] = u - f.f(u) - (N - 1) / r * v;
        dy[2] = 0.5 * v * v * rn;
        dy[3] = (f.F(u) - 0.5 * u * u) * rn;
    };
    const double c = (a - f.f(a)) / (2.0 * N);
    const double r0 = o.r0;
    State y{a + c * r0 * r0, 2.0 * c * r0, 0.0, 0.0};
    // Integrals over [0, r0] from the series.
    y[2] = 0.5 * 4.0 * c * c * omega * std::pow(r0, N + 2) / (N + 2);
    y[3] = (f.F(a) - 0.5 * a * a) * omega * std::pow(r0, N) / N;

    auto stepper = odeint::make_controlled(o.atol, o.rtol, odeint::runge_kutta_dopri5<State>());
    Shot s;
    double r = r0, dt = 1e-3;
    if (keep) {
        s.r.push_back(0.0);
        s.u.push_back(a);
        s.v.push_back(0.0);
    }
    int fails = 0;
    while (r < o.r_max) {
        State prev = y;
        const double rp = r;
        if (stepper.try_step(rhs, y, r, dt) != odeint::success) {
            if (++fails > 100000) break;
            continue;
        }
        if (y[0] < 0.0) {
            s.outcome = Outcome::Overshoot;
            y = prev;
            r = rp;
            break;
        }
        if (y[1] > 0.0) {
            s.outcome = Outcome::Undershoot;
            y = prev;
            r = rp;
            break;
        }
        if (keep) {
            if (y[0] < o.cutoff * a) {
                y = prev;
                r = rp;
                break;
            }
            s.r.push_back(r);
            s.u.push_back(y[0]);
            s.v.push_back(y[1]);
        }
        dt = std::min(dt, 0.5);
    }
    s.end = y;
    s.r_end = r;
    return s;
}

// Decaying tail u ~ u_c (r_c/r)^{(N-1)/2} e^{-(r - r_c)} beyond the cut.
double tail_u(int N, double rc, double uc, double r) {
    return uc * std::pow(rc / r, 0.5 * (N - 1)) * std::exp(-(r - rc));
}

}  // namespace

double OracleProfile::operator()(double radius) const {
    if (radius <= 0.0) return a;
    if (radius >= r_cut) return tail_u(N, r_cut, u.back(), radius);
    const auto it = std::upper_bound(r.begin(), r.end(), radius);
    const std::size_t j = static_cast<std::size_t>(it - r.begin()) - 1;
    const double h = r[j + 1] - r[j], s = (radius - r[j]) / h;
    const double h00 = (1 + 2 * s) * (1 - s) * (1 - s), h10 = s * (1 - s) * (1 - s);
    const double h01 = s * s * (3 - 2 * s), h11 = s * s * (s - 1);
    return h00 * u[j] + h10 * h * v[j] + h01 * u[j + 1] + h11 * h * v[j + 1];
}

GridFunction OracleProfile::sample(const Grid& grid) const {
    GridFunction g = sample_radial(grid, [&](double x) { return (*this)(x); });
    if (g.radial()) g.values.back() = 0.0;
    return g;
}

OracleProfile shooting_oracle(int N, const NonlinearitySpec& spec, const ShootingOptions& opts) {
    if (N < 3) throw Error(ErrorKind::ValidationError, "the radial oracle needs N >= 3");
    if (spec.has_jumps()) throw Error(ErrorKind::ValidationError, "the radial oracle needs a continuous nonlinearity");

    // Scan u(0) upward for an undershoot followed by an overshoot.
    double lo = 0.0, hi = 0.0;
    bool found = false;
    Outcome last = Outcome::Undecided;
    double last_a = 0.0;
    for (int k = -16; k <= 64 && !found; ++k) {
        const double a = std::pow(2.0, 0.25 * k);
        const Outcome o = shoot(N, spec, a, opts, false).outcome;
        if (o == Outcome::Overshoot && last == Outcome::Undershoot) {
            lo = last_a;
            hi = a;
            found = true;
        }
        last = o;
        last_a = a;
    }
    if (!found) throw Error(ErrorKind::BracketNotFound, "no undershoot/overshoot pair for u(0) in [2^-4, 2^16]");

    while (hi - lo > opts.tol_a * hi) {
        const double mid = 0.5 * (lo + hi);
        const Outcome o = shoot(N, spec, mid, opts, false).outcome;
        if (o == Outcome::Overshoot) hi = mid;
        else lo = mid;
    }

    OracleProfile p;
    p.N = N;
    p.a = lo;
    Shot s = shoot(N, spec, lo, opts, true);
    p.r = std::move(s.r);
    p.u = std::move(s.u);
    p.v = std::move(s.v);
    p.r_cut = p.r.back();
    p.psi = s.end[2];
    p.phi = s.end[3];

    // Tail contributions from the asymptotic form.
    const double rc = p.r_cut, uc = p.u.back();
    const double omega = sphere_area(N);
    auto dens = [&](double r, bool kinetic) {
        const double u = tail_u(N, rc, uc, r);
        const double du = -u * (1.0 + 0.5 * (N - 1) / r);
        const double rn = omega * std::pow(r, N - 1);
        return kinetic ? 0.5 * du * du * rn : (spec.F(u) - 0.5 * u * u) * rn;
    };
    using boost::math::quadrature::gauss_kronrod;
    p.psi += gauss_kronrod<double, 31>::integrate([&](double r) { return dens(r, true); }, rc, rc + 60.0, 10, 1e-12);
    p.phi += gauss_kronrod<double, 31>::integrate([&](double r) { return dens(r, false); }, rc, rc + 60.0, 10, 1e-12);
    return p;
}

}  // namespace pohozaev
