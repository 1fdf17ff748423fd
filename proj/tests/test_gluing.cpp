#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "richberg/gluing.hpp"

using namespace richberg;

namespace {

constexpr double kG1 = 1.0, kG1p = 0.5;

GridField parabola_1d(double h) {
    GridField u = make_box_grid(Vec{-2.0}, h, {static_cast<int>(std::lround(4.0 / h)) + 1});
    fill_from(u, [](const Vec& x) { return x[0] * x[0]; });
    return u;
}

/// Two overlapping pieces along the line, cores covering [-1.1, 1.1].
GluingProblem line_problem(double h = 1.0 / 32.0) {
    GluingProblem pr;
    pr.fiber = FiberSpec::trace_cone(1);
    pr.u = parabola_1d(h);
    pr.g = [](const Vec&) { return kG1; };
    pr.g_prime = [](const Vec&) { return kG1p; };
    pr.allowance = [](const Vec&) { return 5.0; };
    const double c = 1.2, quasi_eps = 1.5;
    pr.pieces.push_back(make_cover_piece("left", BallDomain(Vec{-0.55}, 0.95, c), 0.88, 0.55,
                                         pr.u, pr.fiber, quasi_eps));
    pr.pieces.push_back(make_cover_piece("right", BallDomain(Vec{0.55}, 0.95, c), 0.88, 0.55,
                                         pr.u, pr.fiber, quasi_eps));
    pr.domain = union_of_cores(pr);
    return pr;
}

GridField half_norm_2d(double h) {
    const int n = static_cast<int>(std::lround(2.5 / h)) + 1;
    GridField u = make_box_grid(Vec{-1.25, -1.25}, h, {n, n});
    fill_from(u, [](const Vec& x) { return 0.5 * dot(x, x); });
    return u;
}

GluingProblem plane_problem(double h = 1.0 / 32.0) {
    GluingProblem pr;
    pr.fiber = FiberSpec::trace_cone(2);
    pr.u = half_norm_2d(h);
    pr.g = [](const Vec&) { return 0.2; };
    pr.g_prime = [](const Vec&) { return 0.05; };
    pr.allowance = [](const Vec&) { return 2.0; };
    // omega must sit close to the v-ball: condition (B) needs v < u on the
    // omega boundary, while the stencil layer needs a gap above (1 + sqrt 2) h
    const double c = 0.5, quasi_eps = 1.8;
    pr.pieces.push_back(make_cover_piece("west", BallDomain(Vec{-0.3, 0.0}, 0.85, c), 0.77, 0.45,
                                         pr.u, pr.fiber, quasi_eps));
    pr.pieces.push_back(make_cover_piece("east", BallDomain(Vec{0.3, 0.0}, 0.85, c), 0.77, 0.45,
                                         pr.u, pr.fiber, quasi_eps));
    pr.domain = union_of_cores(pr);
    return pr;
}

}  // namespace

TEST_CASE("cover pieces are built with nested masks and measured strictness") {
    GluingProblem pr = line_problem();
    for (const CoverPiece& piece : pr.pieces) {
        std::size_t cores = 0;
        for (std::size_t f = 0; f < pr.u.size(); ++f) {
            if (piece.core[f]) {
                ++cores;
                REQUIRE(piece.omega_interior[f]);
            }
            if (piece.omega_interior[f]) REQUIRE(piece.v.mask[f] == kInterior);
            REQUIRE(!(piece.omega_interior[f] && piece.omega_boundary[f]));
        }
        CHECK(cores > 20);
        CHECK(piece.k >= 1);
        CHECK(piece.s == doctest::Approx(0.18).epsilon(1e-6));
        CHECK(piece.max_principle >= -1e-12);
        // v = H + rho / k keeps margin c / k on the line
        CHECK(piece.strictness ==
              doctest::Approx(piece.outer.c / piece.k).epsilon(1e-6));
    }
}

TEST_CASE("cover piece construction rejects bad geometry") {
    GridField u = parabola_1d(1.0 / 16.0);
    const FiberSpec fiber = FiberSpec::trace_cone(1);
    CHECK_THROWS_WITH_AS(
        make_cover_piece("wide", BallDomain(Vec{0.0}, 2.1, 1.2), 0.9, 0.5, u, fiber, 1.5),
        doctest::Contains("does not fit"), std::invalid_argument);
    CHECK_THROWS_AS(
        make_cover_piece("inverted", BallDomain(Vec{0.0}, 0.9, 1.2), 0.95, 0.5, u, fiber, 1.5),
        std::invalid_argument);
}

TEST_CASE("line gluing end to end") {
    GluingProblem pr = line_problem();
    GlueOutcome out = run_gluing(pr);
    CHECK(out.pass);

    // condition (C): oscillation of x^2 over [-1.5, 0.4] is about 2.25
    CHECK(out.condition_c.pass);
    CHECK(out.condition_c.entries[0].oscillation == doctest::Approx(2.25).epsilon(0.1));
    CHECK(out.condition_c.entries[0].min_allowance == 5.0);

    // epsilon selection: both pieces symmetric, eps = min gap / 2
    REQUIRE(out.epsilons.entries.size() == 2);
    for (const EpsilonEntry& e : out.epsilons.entries) {
        CHECK(e.core_gap > 0.0);
        CHECK(e.boundary_gap > 0.0);
        CHECK(e.budget_gap == doctest::Approx(kG1 - kG1p));
        CHECK(e.eps == doctest::Approx(
                           0.5 * std::min(e.core_gap, std::min(e.boundary_gap, e.budget_gap))));
        // ballpark from the closed forms: core gap 0.105, boundary gap 0.084
        CHECK(e.core_gap == doctest::Approx(0.105).epsilon(0.6));
        CHECK(e.boundary_gap == doctest::Approx(0.084).epsilon(0.6));
        CHECK(e.strict_slack > 0.0);  // margin 1.2 vs g = 1
    }
    const double e0 = out.epsilons.entries[0].eps, e1 = out.epsilons.entries[1].eps;
    CHECK(e0 == doctest::Approx(e1).epsilon(1e-9));  // mirror symmetry

    // sandwich and strictness
    CHECK(out.sandwich.pass);
    CHECK(out.sandwich.min_lower_gap > 0.0);
    CHECK(out.sandwich.min_upper_gap > 1.0);  // allowance 5 is generous
    CHECK(out.margins.pass);
    CHECK(out.margins.min_slack > 0.5);  // glued margin ~1.2 vs g' = 0.5
    CHECK(out.locality.pass);
    CHECK(out.locality.boundary_checks > 0);
    CHECK(out.locality.min_prune_slack > 0.0);
}

TEST_CASE("glued value stays within the smoothed-max envelope") {
    GluingProblem pr = line_problem();
    run_gluing(pr);
    // probe the overlap midpoint x = 0
    const std::size_t node = pr.u.flat({static_cast<int>(std::lround(2.0 / pr.u.spacing))});
    const std::vector<int> cand = candidate_pieces(pr, node);
    REQUIRE(cand.size() == 2);
    double tmax = -1e300, emax = 0.0;
    for (int a : cand) {
        tmax = std::max(tmax, pr.pieces[a].v.values[node]);
        emax = std::max(emax, pr.pieces[a].eps);
    }
    const double w = glue_value(pr, node);
    CHECK(w >= tmax);
    CHECK(w <= tmax + emax + 1e-12);

    const std::vector<int> act = active_pieces(pr, node);
    for (int a : act) CHECK(std::find(cand.begin(), cand.end(), a) != cand.end());
}

TEST_CASE("far from the overlap only one piece is active and w equals it") {
    GluingProblem pr = line_problem();
    run_gluing(pr);
    const std::size_t node = pr.u.flat({static_cast<int>(std::lround(1.0 / pr.u.spacing))});
    // x = -1: only the left omega is open here
    REQUIRE(candidate_pieces(pr, node) == std::vector<int>{0});
    CHECK(glue_value(pr, node) == pr.pieces[0].v.values[node]);
    const Jet2 j = glue_jet(pr, pr.u.unflat(node));
    const Jet2 direct = finite_difference_jet(pr.pieces[0].v, pr.u.unflat(node));
    CHECK(j.r == direct.r);
    CHECK(j.p[0] == direct.p[0]);
    CHECK(j.A(0, 0) == direct.A(0, 0));
}

TEST_CASE("glue_field masks uncovered nodes") {
    GluingProblem pr = line_problem();
    run_gluing(pr);
    const GridField w = glue_field(pr);
    const std::size_t far = pr.u.flat({1});  // x close to -2
    CHECK(w.mask[far] == kOutside);
    CHECK_THROWS_WITH_AS(glue_value(pr, far), doctest::Contains("not covered"),
                         std::runtime_error);
    std::size_t defined = 0;
    for (std::size_t f = 0; f < w.size(); ++f)
        if (w.mask[f] == kInterior) ++defined;
    CHECK(defined > 80);
}

TEST_CASE("condition (C) failure names the piece") {
    GluingProblem pr = line_problem();
    pr.allowance = [](const Vec&) { return 0.1; };
    CHECK_THROWS_WITH_AS(run_gluing(pr), doctest::Contains("condition (C)"), std::runtime_error);
    try {
        run_gluing(pr);
    } catch (const std::runtime_error& e) {
        const std::string msg = e.what();
        CHECK(msg.find("left") != std::string::npos);
        CHECK(msg.find("oscillation") != std::string::npos);
    }
}

TEST_CASE("a sunken approximant fails condition (A) with the node named") {
    GluingProblem pr = line_problem();
    pr.pieces[1] = make_cover_piece("right", BallDomain(Vec{0.55}, 0.95, 1.2), 0.88, 0.55, pr.u,
                                    pr.fiber, 1.5, -0.2);
    CHECK_THROWS_WITH_AS(run_gluing(pr), doctest::Contains("condition (A)"), std::runtime_error);
    try {
        run_gluing(pr);
    } catch (const std::runtime_error& e) {
        const std::string msg = e.what();
        CHECK(msg.find("right") != std::string::npos);
        CHECK(msg.find("at node") != std::string::npos);
    }
}

TEST_CASE("a lifted approximant fails condition (B)") {
    GluingProblem pr = line_problem();
    pr.pieces[0] = make_cover_piece("left", BallDomain(Vec{-0.55}, 0.95, 1.2), 0.88, 0.55, pr.u,
                                    pr.fiber, 1.5, +0.2);
    CHECK_THROWS_WITH_AS(run_gluing(pr), doctest::Contains("condition (B)"), std::runtime_error);
}

TEST_CASE("an empty strictness budget is rejected") {
    GluingProblem pr = line_problem();
    pr.g_prime = [](const Vec&) { return 2.0; };  // above g
    CHECK_THROWS_WITH_AS(run_gluing(pr), doctest::Contains("budget"), std::runtime_error);
}

TEST_CASE("uncovered domain nodes fail the cover check") {
    GluingProblem pr = line_problem();
    pr.domain[pr.u.flat({2})] = 1;  // x near -1.94, outside both cores
    CHECK_THROWS_WITH_AS(run_gluing(pr), doctest::Contains("outside every core"),
                         std::invalid_argument);
}

TEST_CASE("off-lattice pieces fail the cover check") {
    GluingProblem pr = line_problem();
    pr.pieces[0].v.origin[0] += 0.001;
    CHECK_THROWS_WITH_AS(run_gluing(pr), doctest::Contains("shared lattice"),
                         std::invalid_argument);
}

TEST_CASE("plane gluing end to end") {
    GluingProblem pr = plane_problem();
    GlueOutcome out = run_gluing(pr);
    CHECK(out.pass);
    CHECK(out.sandwich.min_lower_gap > 0.0);
    CHECK(out.margins.min_slack > 0.0);
    CHECK(out.locality.pass);

    // probe deep inside the west core at (-0.5, 0): single active piece
    const std::vector<int> probe{static_cast<int>(std::lround(0.75 / pr.u.spacing)),
                                 static_cast<int>(std::lround(1.25 / pr.u.spacing))};
    const std::size_t pnode = pr.u.flat(probe);
    REQUIRE(candidate_pieces(pr, pnode) == std::vector<int>{0});
    const GridField w = glue_field(pr);
    CHECK(w.values[pnode] == pr.pieces[0].v.values[pnode]);
    const Jet2 composed = glue_jet(pr, probe);
    const Jet2 fd = finite_difference_jet(w, probe);
    CHECK(std::abs(composed.r - fd.r) < 1e-12);
    CHECK(std::abs(composed.p[0] - fd.p[0]) < 1e-12);
    CHECK(std::abs(composed.A(0, 1) - fd.A(0, 1)) < 1e-12);
}
