#include <cmath>
#include <random>

#include "doctest.h"
#include "pohozaev/error.hpp"
#include "pohozaev/problem.hpp"
#include "pohozaev/variational.hpp"

using namespace pohozaev;

namespace {

ProblemInstance classical(std::size_t M = 1024) {
    ProblemInstance inst;
    inst.kind = FamilyKind::Classical;
    inst.N = 3;
    inst.grid = {GridKind::Radial, 20.0, M};
    return inst;
}

GridFunction bump(const Grid& g, double a, double w) {
    return sample_radial(g, [&](double r) { return a * std::exp(-r * r / (w * w)); });
}

}  // namespace

TEST_CASE("Pohozaev root against closed forms") {
    // one term: t = (lambda psi / (lambda_phi Phi))^{1/(lambda_phi - lambda)}
    const double t1 = pohozaev_root({2.0}, 0.5, {1.0}, 3.0);
    CHECK(t1 == doctest::Approx(std::pow(2.0 / 1.5, 0.5)).epsilon(1e-12));
    // lambdas 1, 2 against 3: 3 Phi t^2 - 2 psi_2 t - psi_1 = 0
    const double p1 = 0.7, p2 = 1.3, phi = 0.4;
    const double t2 = pohozaev_root({p1, p2}, phi, {1.0, 2.0}, 3.0);
    CHECK(t2 == doctest::Approx((2 * p2 + std::sqrt(4 * p2 * p2 + 12 * phi * p1)) / (6 * phi)).epsilon(1e-12));
    // a vanishing psi drops out
    CHECK(pohozaev_root({0.0, 2.0}, 0.5, {0.4, 1.0}, 3.0) == doctest::Approx(t1).epsilon(1e-12));
    CHECK_THROWS_AS(pohozaev_root({1.0}, 0.0, {1.0}, 3.0), Error);
    CHECK_THROWS_AS(pohozaev_root({0.0}, 1.0, {1.0}, 3.0), Error);
}

TEST_CASE("dilation multiplies the classical functionals by powers of t") {
    const ProblemInstance inst = classical();
    const FunctionalFamily fam = build_family(inst);
    REQUIRE(fam.lambdas == std::vector<double>{1.0});
    REQUIRE(fam.lambda_phi == 3.0);
    const GridFunction u = bump(inst.make_grid(), 3.0, 1.5);
    const Evaluation e = evaluate(fam, u);
    for (double t : {0.5, 1.0, 2.0, 3.7}) {
        const Evaluation et = evaluate(fam, scale(u, t));
        CHECK(et.psi[0] == doctest::Approx(t * e.psi[0]).epsilon(1e-12));
        CHECK(et.phi == doctest::Approx(t * t * t * e.phi).epsilon(1e-12));
    }
    CHECK(max_abs(scale(u, 0.0).values) == 0.0);
    CHECK(scale(u, 1.0) == u);
    CHECK_THROWS_AS(scale(u, -1.0), Error);
}

TEST_CASE("fiber has one interior maximum at the root of K") {
    const ProblemInstance inst = classical();
    const FunctionalFamily fam = build_family(inst);
    const GridFunction u = bump(inst.make_grid(), 4.0, 1.0);
    const auto ts = log_spaced(1e-3, 1e3, 1000);
    const FiberProfile fp = fiber(fam, DilationAction::grid_dilation(), u, ts);
    int changes = 0;
    for (std::size_t i = 1; i < ts.size(); ++i) {
        CHECK(fp.h_values[i] <= fp.h_star * (1 + 1e-12));
        if ((fp.k_values[i] > 0) != (fp.k_values[i - 1] > 0)) ++changes;
    }
    CHECK(changes == 1);
    CHECK(fp.tail_negative);
    CHECK(fp.k_residual <= 1e-8 * fp.k_scale);
}

TEST_CASE("projection lands on the Pohozaev set and satisfies the identity") {
    const ProblemInstance inst = classical();
    const FunctionalFamily fam = build_family(inst);
    std::mt19937_64 rng(5);
    // Phi > 0 needs A > 2^{5/4} for these bumps
    std::uniform_real_distribution<double> A(3.0, 6.0), W(0.5, 3.0);
    for (int k = 0; k < 20; ++k) {
        const GridFunction u = bump(inst.make_grid(), A(rng), W(rng));
        const Projection p = project_to_pohozaev(fam, u);
        REQUIRE(p.state.on_manifold);
        const Evaluation e = evaluate(fam, p.state.u);
        CHECK(std::abs(e.K(fam)) <= 1e-8 * e.K_scale(fam));
        // I = (1 - 1/3) psi on the set
        CHECK(e.I() == doctest::Approx(2.0 / 3.0 * e.psi[0]).epsilon(1e-7));
        CHECK(pohozaev_identity_check(fam, p.state) <= 1e-7);
    }
}

TEST_CASE("a state with Phi <= 0 cannot be projected") {
    const ProblemInstance inst = classical();
    const FunctionalFamily fam = build_family(inst);
    const GridFunction small = bump(inst.make_grid(), 0.1, 1.0);
    CHECK(evaluate(fam, small).phi < 0.0);
    CHECK_THROWS_AS(project_to_pohozaev(fam, small), Error);
    CHECK_FALSE(make_state(fam, small).on_manifold);
}

TEST_CASE("family validation enforces 0 < max lambda_i < lambda_phi") {
    FunctionalFamily fam = build_family(classical());
    CHECK_NOTHROW(fam.validate());
    fam.lambda_phi = 0.5;
    CHECK_THROWS_AS(fam.validate(), Error);
}

TEST_CASE("log-spaced samples") {
    const auto t = log_spaced(1e-2, 1e2, 5);
    REQUIRE(t.size() == 5);
    CHECK(t.front() == doctest::Approx(1e-2));
    CHECK(t[2] == doctest::Approx(1.0));
    CHECK(t.back() == doctest::Approx(1e2));
}
