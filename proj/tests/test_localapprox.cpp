#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "richberg/localapprox.hpp"

using namespace richberg;

namespace {

double sq(double x) { return x * x; }

GridField quadratic_on_ball(const BallDomain& ball, double h) {
    GridField f = make_ball_grid(ball, h);
    fill_from(f, [](const Vec& x) { return 0.5 * dot(x, x); });
    return f;
}

std::vector<std::uint8_t> radius_core(const GridField& f, const Vec& center, double r) {
    std::vector<std::uint8_t> core(f.size(), 0);
    for (std::size_t k = 0; k < f.size(); ++k) {
        const Vec x = f.node_position(f.unflat(k));
        double d2 = 0.0;
        for (std::size_t d = 0; d < center.size(); ++d) d2 += sq(x[d] - center[d]);
        core[k] = d2 <= r * r + 1e-12;
    }
    return core;
}

}  // namespace

TEST_CASE("coordinate ball quadratic") {
    const BallDomain ball(Vec{0.5, -0.5}, 2.0, 0.75);
    const QuadraticSpec rho = coordinate_ball_rho(ball);
    CHECK(rho.value(ball.center) == doctest::Approx(-0.5 * 0.75 * 4.0));
    CHECK(rho.value(Vec{2.5, -0.5}) == doctest::Approx(0.0).scale(1.0));
    const Jet2 j = jet_of_quadratic(rho, Vec{1.5, -0.5});
    CHECK(j.p[0] == doctest::Approx(0.75 * 1.0));
    CHECK(j.p[1] == doctest::Approx(0.0));
    CHECK(j.A(0, 0) == doctest::Approx(0.75));
    CHECK(j.A(0, 1) == doctest::Approx(0.0));

    CHECK_THROWS_AS(BallDomain(Vec{0.0}, -1.0, 1.0), std::invalid_argument);
    CHECK_THROWS_AS(BallDomain(Vec{0.0}, 1.0, 0.0), std::invalid_argument);
}

TEST_CASE("coordinate ball condition per fiber") {
    CHECK(coordinate_ball_condition(FiberSpec::trace_cone(2), 0.5));
    CHECK(coordinate_ball_condition(FiberSpec::psd_cone(3), 0.1));
    SymMat n(2);
    n.set(0, 0, 1.0);
    n.set(1, 1, 1.0);
    CHECK(coordinate_ball_condition(FiberSpec::halfspace(n), 0.5));
    // offset two traces away: (2c - 2c) / 2 = 0, not strictly inside
    CHECK(!coordinate_ball_condition(FiberSpec::halfspace(n, 2.0), 1.0));
    CHECK_THROWS_AS(coordinate_ball_condition(FiberSpec::fn_cone(2), 0.5), std::invalid_argument);
    CHECK_THROWS_AS(coordinate_ball_condition(FiberSpec::trace_cone(2), 0.0), std::invalid_argument);
}

TEST_CASE("ball mask follows the half-spacing rule") {
    // 1D, delta = 0.5, h = 0.25: interior iff |x| < 0.375
    GridField f(Vec{-1.0}, 0.25, {9});
    apply_ball_mask(f, BallDomain(Vec{0.0}, 0.5, 1.0));
    for (std::size_t k = 0; k < f.size(); ++k) {
        const double x = f.node_position(f.unflat(k))[0];
        if (std::abs(x) < 0.375 - 1e-12)
            CHECK(f.mask[k] == kInterior);
        else if (std::abs(std::abs(x) - 0.5) < 1e-12)
            CHECK(f.mask[k] == kBoundary);
        else
            CHECK(f.mask[k] == kOutside);
    }
}

TEST_CASE("ball grids center on a node and separate the three mask classes") {
    const BallDomain ball(Vec{0.3, -0.1}, 1.0, 1.0);
    GridField f = make_ball_grid(ball, 1.0 / 16.0);
    bool center_found = false;
    std::size_t interior = 0, boundary = 0;
    for (std::size_t k = 0; k < f.size(); ++k) {
        const Vec x = f.node_position(f.unflat(k));
        if (std::abs(x[0] - 0.3) < 1e-12 && std::abs(x[1] + 0.1) < 1e-12) {
            center_found = true;
            CHECK(f.mask[k] == kInterior);
        }
        const double r = std::hypot(x[0] - 0.3, x[1] + 0.1);
        if (f.mask[k] == kInterior) CHECK(r < ball.radius - 0.5 * f.spacing);
        if (f.mask[k] == kBoundary) {
            CHECK(r >= ball.radius - 0.5 * f.spacing - 1e-12);
            CHECK(r < ball.radius + 2.0 * f.spacing);  // ring hugs the sphere
            ++boundary;
        }
        if (f.mask[k] == kInterior) ++interior;
    }
    CHECK(center_found);
    CHECK(interior > 700);  // pi r^2 / h^2 ~ 804 nodes
    CHECK(interior < 900);
    CHECK(boundary > 50);
    // boundary nodes are exactly the outside nodes touching the interior
    for (std::size_t k = 0; k < f.size(); ++k) {
        if (f.mask[k] != kInterior) continue;
        const auto idx = f.unflat(k);
        REQUIRE(f.has_full_stencil(idx));
    }
}

TEST_CASE("box grids have a boundary shell") {
    GridField f = make_box_grid(Vec{0.0, 0.0}, 0.5, {4, 5});
    std::size_t boundary = 0;
    for (std::size_t k = 0; k < f.size(); ++k)
        if (f.mask[k] == kBoundary) ++boundary;
    CHECK(boundary == 4 * 5 - 2 * 3);
    CHECK(f.mask[f.flat({1, 1})] == kInterior);
    CHECK(f.mask[f.flat({0, 2})] == kBoundary);
}

TEST_CASE("convolution smoothing preserves constants and affine fields") {
    GridField f = make_box_grid(Vec{0.0, 0.0}, 0.1, {9, 9});
    fill_from(f, [](const Vec& x) { return 2.0 - 3.0 * x[0] + 0.5 * x[1]; });
    const GridField g = convolution_smooth(f, 0.3);  // reach 2

    std::size_t kept = 0;
    for (std::size_t k = 0; k < g.size(); ++k) {
        if (g.mask[k] == kOutside) continue;
        ++kept;
        const Vec x = g.node_position(g.unflat(k));
        CHECK(std::abs(g.values[k] - (2.0 - 3.0 * x[0] + 0.5 * x[1])) < 1e-13);
        const auto idx = g.unflat(k);
        for (int d = 0; d < 2; ++d) {
            CHECK(idx[d] >= 2);
            CHECK(idx[d] <= 6);
        }
    }
    CHECK(kept == 25);
    CHECK_THROWS_AS(convolution_smooth(f, 0.15), std::invalid_argument);
}

TEST_CASE("convolution smoothing flattens bumps monotonically") {
    GridField f = make_box_grid(Vec{-1.0}, 0.1, {21});
    fill_from(f, [](const Vec& x) { return std::abs(x[0]) < 0.05 ? 1.0 : 0.0; });
    const GridField g = convolution_smooth(f, 0.25);
    const std::size_t mid = f.flat({10});
    CHECK(g.mask[mid] == kInterior);
    CHECK(g.values[mid] < 1.0);
    CHECK(g.values[mid] > 0.2);
    double total_in = 0.0, total_out = 0.0;
    for (std::size_t k = 0; k < f.size(); ++k) {
        if (g.mask[k] == kOutside) continue;
        total_in += f.values[k];
        total_out += g.values[k];
    }
    CHECK(total_out == doctest::Approx(total_in).epsilon(1e-12));  // mass moves, not vanishes
}

TEST_CASE("laplace solve interpolates linearly in 1D") {
    GridField f = make_box_grid(Vec{-1.0}, 0.25, {9});
    f.values[0] = 2.0;
    f.values[8] = 5.0;
    SolveStats stats;
    const GridField h = solve_laplace_dirichlet(f, &stats);
    CHECK(stats.residual <= 1e-10);
    for (std::size_t k = 0; k < h.size(); ++k) {
        const double x = h.node_position(h.unflat(k))[0];
        CHECK(h.values[k] == doctest::Approx(3.5 + 1.5 * x).epsilon(1e-9));
    }
}

TEST_CASE("laplace solve reproduces discrete-harmonic polynomials on a box") {
    GridField f = make_box_grid(Vec{-1.0, -1.0}, 0.125, {17, 17});
    fill_from(f, [](const Vec& x) { return sq(x[0]) - sq(x[1]); }, true);
    const GridField h = solve_laplace_dirichlet(f);
    double worst = 0.0;
    for (std::size_t k = 0; k < h.size(); ++k)
        worst = std::max(worst, std::abs(h.values[k] - (sq(h.node_position(h.unflat(k))[0]) -
                                                        sq(h.node_position(h.unflat(k))[1]))));
    CHECK(worst < 1e-8);
    CHECK(max_principle_slack(h) >= -1e-12);
}

TEST_CASE("poisson solve reproduces manufactured quadratics") {
    GridField f = make_box_grid(Vec{-1.0, -1.0, -1.0}, 0.25, {9, 9, 9});
    fill_from(f, [](const Vec& x) { return dot(x, x); }, true);
    const GridField v = solve_poisson_dirichlet(f, [](const Vec&) { return 6.0; });
    double worst = 0.0;
    for (std::size_t k = 0; k < v.size(); ++k)
        worst = std::max(worst, std::abs(v.values[k] - dot(v.node_position(v.unflat(k)),
                                                           v.node_position(v.unflat(k)))));
    CHECK(worst < 1e-8);
}

TEST_CASE("laplace solve on a lattice disc") {
    const BallDomain ball(Vec{0.0, 0.0}, 1.0, 1.0);
    GridField f = make_ball_grid(ball, 1.0 / 16.0);
    fill_from(f, [](const Vec& x) { return sq(x[0]) - sq(x[1]); }, true);
    SolveStats stats;
    const GridField h = solve_laplace_dirichlet(f, &stats);
    CHECK(stats.iterations < 2000);
    double worst = 0.0;
    for (std::size_t k = 0; k < h.size(); ++k) {
        if (!h.available(k)) continue;
        const Vec x = h.node_position(h.unflat(k));
        worst = std::max(worst, std::abs(h.values[k] - (sq(x[0]) - sq(x[1]))));
    }
    // the saddle is discrete-harmonic on the 5-point stencil, so the solve
    // nails it to solver tolerance
    CHECK(worst < 1e-8);
}

TEST_CASE("solver rejects malformed domains") {
    GridField f(Vec{0.0, 0.0}, 0.5, {4, 4});
    CHECK_THROWS_AS(solve_laplace_dirichlet(f), std::invalid_argument);  // no interior
    f.mask[f.flat({0, 0})] = kInterior;                                  // interior on the edge
    CHECK_THROWS_AS(solve_laplace_dirichlet(f), std::invalid_argument);
}

TEST_CASE("homogeneous approximants differ from the majorant by rho over k") {
    const BallDomain ball(Vec{0.0, 0.0}, 1.0, 0.8);
    GridField f = quadratic_on_ball(ball, 1.0 / 8.0);
    const GridField h = solve_laplace_dirichlet(f);
    const QuadraticSpec rho = coordinate_ball_rho(ball);
    const auto vs = homogeneous_approximants(h, ball, {1, 3, 7});
    REQUIRE(vs.size() == 3);
    const int ks[] = {1, 3, 7};
    for (int i = 0; i < 3; ++i)
        for (std::size_t k = 0; k < h.size(); ++k) {
            if (!h.available(k)) continue;
            const double want = h.values[k] + rho.value(h.node_position(h.unflat(k))) / ks[i];
            REQUIRE(vs[i].values[k] == doctest::Approx(want).epsilon(1e-14));
        }
    CHECK_THROWS_AS(homogeneous_approximants(h, ball, {0}), std::invalid_argument);
}

TEST_CASE("inhomogeneous approximants bracket the majorant") {
    const BallDomain ball(Vec{0.0, 0.0}, 1.0, 1.0);
    GridField f = quadratic_on_ball(ball, 1.0 / 16.0);
    const InhomogeneousResult res = inhomogeneous_approximants(f, ball, {0.5, 0.05});
    CHECK(res.report.brackets_hold);
    CHECK(res.report.lower_violation[0] <= res.report.tolerance);
    CHECK(res.report.upper_violation[0] <= res.report.tolerance);
    // discrete linearity: v_eps = H + eps * Z exactly, so sup|H - v| is
    // exactly linear in eps up to solver tolerance
    const double ratio = res.report.sup_diff[0] / res.report.sup_diff[1];
    CHECK(std::abs(ratio - 10.0) < 1e-4);
    CHECK_THROWS_AS(inhomogeneous_approximants(f, ball, {-0.1}), std::invalid_argument);
}

TEST_CASE("quasi approximants from a uniformly close field") {
    const BallDomain ball(Vec{0.0, 0.0}, 1.0, 1.0);
    GridField u = quadratic_on_ball(ball, 1.0 / 16.0);
    const auto core = radius_core(u, ball.center, 0.5);
    // v = u is "uniformly within eta = 0"; pushing down by rho + s opens (A)
    const QuasiResult q = quasi_from_uniform(u, u, ball, core, 0.5, 0.1875);
    CHECK(q.report.core_gap > 0.0);
    CHECK(q.report.boundary_gap > 0.0);
    // (A) margin at the core edge: -delta (rho + s) = 0.5 * (0.375 - 0.1875)
    CHECK(q.report.core_gap == doctest::Approx(0.5 * 0.1875).epsilon(0.05));

    // an s too large for the core violates the precondition
    CHECK_THROWS_WITH_AS(quasi_from_uniform(u, u, ball, core, 0.5, 0.5),
                         doctest::Contains("rho + s"), std::invalid_argument);
}

TEST_CASE("dirichlet-solver route produces a quasi approximant") {
    const BallDomain ball(Vec{0.0, 0.0}, 1.0, 1.0);
    GridField u = quadratic_on_ball(ball, 1.0 / 16.0);
    const auto core = radius_core(u, ball.center, 0.5);
    const FiberSpec fiber = FiberSpec::trace_cone(2);

    const QuasiResult q = quasi_via_dp(fiber, u, core, ball, 0.5);
    CHECK(q.k >= 1);
    CHECK(q.s == doctest::Approx(0.1875).epsilon(1e-6));
    CHECK(q.report.core_gap > 0.0);
    CHECK(q.report.boundary_gap > 0.0);
    CHECK(max_principle_slack(q.H) >= -1e-12);
    // the approximant keeps strictness c / k up to stencil truncation
    const StrictnessReport strict = field_strictness(fiber, q.v, 0.0);
    CHECK(strict.min_slack == doctest::Approx(ball.c / q.k).epsilon(1e-4));

    // u barely strict: margin 1 cannot absorb eps * c = 1.2
    CHECK_THROWS_WITH_AS(quasi_via_dp(fiber, u, core, ball, 1.2),
                         doctest::Contains("not strict enough"), std::invalid_argument);
}
