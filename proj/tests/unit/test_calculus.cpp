#include <cmath>
#include <random>

#include "doctest.h"
#include "pohozaev/calculus.hpp"
#include "pohozaev/error.hpp"

using namespace pohozaev;

namespace {

GridFunction gaussian(const Grid& g) {
    return sample_radial(g, [](double r) { return std::exp(-0.5 * r * r); });
}

// Central difference of `f` along direction v, step h.
template <class F>
double central(F&& f, const GridFunction& u, const std::vector<double>& v, double h) {
    GridFunction a = u, b = u;
    for (std::size_t j = 0; j < u.size(); ++j) {
        a.values[j] += h * v[j];
        b.values[j] -= h * v[j];
    }
    return (f(a) - f(b)) / (2.0 * h);
}

double dot(const std::vector<double>& a, const std::vector<double>& b) {
    double s = 0.0;
    for (std::size_t j = 0; j < a.size(); ++j) s += a[j] * b[j];
    return s;
}

std::vector<double> bump_direction(const GridFunction& u, std::mt19937_64& rng) {
    std::normal_distribution<double> n(0.0, 1.0);
    const double c = n(rng), w = 1.0 + std::abs(n(rng));
    std::vector<double> v(u.size());
    const GridFunction b = sample_radial(u.grid, [&](double r) { return c * std::exp(-r * r / (w * w)); });
    for (std::size_t j = 0; j < v.size(); ++j) v[j] = b.values[j];
    return v;
}

}  // namespace

TEST_CASE("quadrature of a radial Gaussian") {
    const Grid g = RadialGrid::uniform(3, 12.0, 4000);
    // integral of exp(-r^2) over R^3 is pi^{3/2}
    CHECK(quad(gaussian(g), [](double v) { return v * v; }) == doctest::Approx(std::pow(M_PI, 1.5)).epsilon(1e-5));
    const Grid b = BoxGrid::cube(2, 10.0, 128);
    CHECK(integrate(b, gaussian(b).values) == doctest::Approx(2.0 * M_PI).epsilon(1e-10));
}

TEST_CASE("Dirichlet energy of Gaussians against closed forms") {
    // (1/2) integral |grad e^{-r^2/2}|^2 = (N/4) pi^{N/2}
    const Grid r3 = RadialGrid::uniform(3, 12.0, 4000);
    CHECK(dirichlet_energy(gaussian(r3)) == doctest::Approx(0.75 * std::pow(M_PI, 1.5)).epsilon(1e-5));
    const Grid b1 = BoxGrid::cube(1, 12.0, 2048);
    CHECK(dirichlet_energy(gaussian(b1)) == doctest::Approx(0.25 * std::sqrt(M_PI)).epsilon(1e-4));
    const Grid b2 = BoxGrid::cube(2, 10.0, 512);
    CHECK(dirichlet_energy(gaussian(b2)) == doctest::Approx(0.5 * M_PI).epsilon(1e-3));
}

// On a periodic box of side L the seminorm is the lattice sum of the exact
// transform e^{-|xi|^2/2} over xi in (2 pi / L) Z^N; it tends to Gamma(s + 1/2)
// (1-D) and pi Gamma(s + 1) (2-D) as L grows.
double lattice_sum(int dim, double L, double s) {
    const double dxi = 2.0 * M_PI / L;
    double total = 0.0;
    const int K = static_cast<int>(12.0 / dxi);
    if (dim == 1) {
        for (int k = -K; k <= K; ++k) {
            const double xi = k * dxi;
            total += dxi * std::pow(std::abs(xi), 2 * s) * std::exp(-xi * xi);
        }
    } else {
        for (int a = -K; a <= K; ++a)
            for (int b = -K; b <= K; ++b) {
                const double r2 = dxi * dxi * (a * a + b * b);
                total += dxi * dxi * std::pow(r2, s) * std::exp(-r2);
            }
    }
    return total;
}

TEST_CASE("fractional seminorm of Gaussians against the lattice sum of the exact transform") {
    const Grid b1 = BoxGrid::cube(1, 20.0, 1024);
    for (double s : {0.2, 0.3, 0.5, 0.75})
        CHECK(fractional_seminorm(gaussian(b1), s) == doctest::Approx(lattice_sum(1, 40.0, s)).epsilon(1e-10));
    const Grid b2 = BoxGrid::cube(2, 10.0, 128);
    CHECK(fractional_seminorm(gaussian(b2), 0.4) == doctest::Approx(lattice_sum(2, 20.0, 0.4)).epsilon(1e-10));
    // the whole-space values are approached as the period grows
    const Grid wide = BoxGrid::cube(1, 320.0, 16384);
    CHECK(fractional_seminorm(gaussian(wide), 0.3) == doctest::Approx(std::tgamma(0.8)).epsilon(3e-3));
    // s = 1 is twice the Dirichlet energy
    CHECK(fractional_seminorm(gaussian(b1), 1.0) == doctest::Approx(2.0 * dirichlet_energy(gaussian(b1))).epsilon(1e-3));
}

TEST_CASE("a spectrum piled at the Nyquist end is rejected") {
    const BoxGrid b = BoxGrid::cube(1, 10.0, 64);
    GridFunction u = zeros(b);
    for (std::size_t j = 0; j < u.size(); ++j) u.values[j] = j % 2 ? 1.0 : -1.0;
    CHECK_THROWS_AS(fractional_seminorm(u, 0.3), Error);
    CHECK(fractional_seminorm_unchecked(u, 0.3).high_fraction > 0.5);
}

TEST_CASE("anisotropic axis energies of a separable Gaussian") {
    const Grid b = BoxGrid::cube(2, 10.0, 256);
    const GridFunction u = gaussian(b);
    for (double p : {1.6, 1.9}) {
        // (1/p) Gamma((p+1)/2) (p/2)^{-(p+1)/2} sqrt(2 pi / p)
        const double expect = std::tgamma(0.5 * (p + 1)) * std::pow(0.5 * p, -0.5 * (p + 1)) * std::sqrt(2 * M_PI / p) / p;
        const auto e = anisotropic_energy(u, {p, p}, 0.0);
        CHECK(e[0] == doctest::Approx(expect).epsilon(2e-3));
        CHECK(e[1] == doctest::Approx(e[0]).epsilon(1e-12));
    }
}

TEST_CASE("symmetrization is equimeasurable and fixes the cone") {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> U(0.0, 1.0);
    const Grid r = RadialGrid::uniform(3, 10.0, 500);
    const GridFunction g = gaussian(r);
    const GridFunction qg = symmetrize(g);
    for (std::size_t j = 0; j < g.size(); ++j) CHECK(qg.values[j] == doctest::Approx(g.values[j]).epsilon(1e-12));

    // Ties in distance are averaged, so mass and maximum are kept exactly and
    // higher moments can only drop.
    const Grid b = BoxGrid::cube(2, 5.0, 32);
    GridFunction u = zeros(b);
    for (double& v : u.values) v = U(rng);
    const GridFunction q = symmetrize(u);
    CHECK(is_radially_nonincreasing(q));
    auto id = [](double v) { return std::max(v, 0.0); };
    CHECK(quad(q, id) == doctest::Approx(quad(u, id)).epsilon(1e-12));
    for (int k : {2, 4}) {
        auto m = [k](double v) { return std::pow(std::max(v, 0.0), k); };
        CHECK(quad(q, m) <= quad(u, m) * (1 + 1e-12));
    }
    CHECK(max_abs(q.values) == max_abs(u.values));
}

TEST_CASE("symmetrization forgets lattice translations") {
    const BoxGrid b = BoxGrid::cube(2, 8.0, 64);
    const GridFunction centered = gaussian(b);
    GridFunction shifted = zeros(b);
    for (std::size_t i = 0; i < 64; ++i)
        for (std::size_t j = 0; j < 64; ++j) shifted.values[((i + 5) % 64) * 64 + (j + 61) % 64] = centered.values[i * 64 + j];
    const GridFunction q = symmetrize(shifted);
    for (std::size_t k = 0; k < q.size(); ++k) CHECK(q.values[k] == doctest::Approx(centered.values[k]).epsilon(1e-12));
    CHECK(dirichlet_energy(q) == doctest::Approx(dirichlet_energy(shifted)).epsilon(1e-12));
}

TEST_CASE("gradients match central differences") {
    std::mt19937_64 rng(3);
    const Grid r3 = RadialGrid::uniform(3, 10.0, 400);
    const GridFunction ur = gaussian(r3);
    for (int k = 0; k < 5; ++k) {
        const auto v = bump_direction(ur, rng);
        const double fd = central([](const GridFunction& w) { return dirichlet_energy(w, Difference::Forward); }, ur, v, 1e-4);
        CHECK(dot(dirichlet_gradient(ur, Difference::Forward), v) == doctest::Approx(fd).epsilon(1e-7));
    }
    const Grid b1 = BoxGrid::cube(1, 20.0, 512);
    const GridFunction ub = gaussian(b1);
    for (int k = 0; k < 5; ++k) {
        const auto v = bump_direction(ub, rng);
        const double fd = central([](const GridFunction& w) { return fractional_seminorm(w, 0.3); }, ub, v, 1e-4);
        CHECK(dot(fractional_seminorm_gradient(ub, 0.3), v) == doctest::Approx(fd).epsilon(1e-7));
    }
    const Grid b2 = BoxGrid::cube(2, 8.0, 64);
    const GridFunction u2 = gaussian(b2);
    for (int axis : {0, 1}) {
        const auto v = bump_direction(u2, rng);
        auto f = [axis](const GridFunction& w) { return axis_energy(w, axis, 1.7, 1e-3, Difference::Forward); };
        CHECK(dot(axis_energy_gradient(u2, axis, 1.7, 1e-3, Difference::Forward), v) ==
              doctest::Approx(central(f, u2, v, 1e-5)).epsilon(1e-6));
    }
}
