#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <Eigen/Dense>

#include "richberg/core.hpp"

using namespace richberg;

TEST_CASE("gauss_legendre integrates polynomials of degree 2n-1 exactly") {
    for (int n : {2, 5, 8, 24}) {
        const QuadRule& q = gauss_legendre(n);
        REQUIRE(static_cast<int>(q.nodes.size()) == n);
        for (int k = 0; k <= 2 * n - 1; ++k) {
            double acc = 0.0;
            for (std::size_t i = 0; i < q.nodes.size(); ++i)
                acc += q.weights[i] * std::pow(q.nodes[i], k);
            const double exact = (k % 2 == 0) ? 2.0 / (k + 1) : 0.0;
            CHECK(std::abs(acc - exact) < 1e-13);
        }
    }
}

TEST_CASE("gauss_legendre handles smooth non-polynomial integrands") {
    const QuadRule& q = gauss_legendre(24);
    double acc = 0.0;
    for (std::size_t i = 0; i < q.nodes.size(); ++i) acc += q.weights[i] * std::exp(q.nodes[i]);
    CHECK(std::abs(acc - (std::exp(1.0) - std::exp(-1.0))) < 1e-14);
}

TEST_CASE("SymMat stores symmetric entries and basic forms") {
    SymMat m(3);
    m.set(0, 1, 2.0);
    m.set(2, 2, -1.0);
    CHECK(m(1, 0) == 2.0);
    CHECK(m.trace() == -1.0);
    m.add(0, 1, 0.5);
    CHECK(m(0, 1) == 2.5);
    CHECK(m(1, 0) == 2.5);

    SymMat id = SymMat::identity(3);
    CHECK(m.inner(id) == m.trace());

    Vec v{1.0, 2.0, 0.0};
    CHECK(m.quad_form(v) == doctest::Approx(2.0 * 2.5 * 2.0).epsilon(1e-15));
}

TEST_CASE("add_sym_outer adds the symmetrized rank-two update") {
    SymMat m(2);
    Vec p{1.0, 2.0}, q{3.0, -1.0};
    m.add_sym_outer(2.0, p, q);
    // 2 * sym(p q^T) = p q^T + q p^T
    CHECK(m(0, 0) == doctest::Approx(2.0 * 3.0));
    CHECK(m(1, 1) == doctest::Approx(2.0 * -2.0));
    CHECK(m(0, 1) == doctest::Approx(1.0 * -1.0 + 2.0 * 3.0));
    CHECK(m(0, 1) == m(1, 0));
}

TEST_CASE("eigenvalues of fixed matrices") {
    SymMat m(2);
    m.set(0, 0, 2.0);
    m.set(1, 1, 2.0);
    m.set(0, 1, 1.0);
    auto ev = sym_eigenvalues(m);
    CHECK(ev[0] == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(ev[1] == doctest::Approx(3.0).epsilon(1e-14));
    CHECK(lambda_min(m) == doctest::Approx(1.0));
    CHECK(lambda_max(m) == doctest::Approx(3.0));
    CHECK(operator_norm(m) == doctest::Approx(3.0));
    CHECK(nuclear_norm(m) == doctest::Approx(4.0));

    SymMat d(3);
    d.set(0, 0, -5.0);
    d.set(1, 1, 0.0);
    d.set(2, 2, 7.0);
    CHECK(operator_norm(d) == doctest::Approx(7.0));
    CHECK(nuclear_norm(d) == doctest::Approx(12.0));
}

TEST_CASE("jacobi eigenvalues agree with an independent solver") {
    Rng rng(20240817);
    double worst = 0.0;
    for (int trial = 0; trial < 500; ++trial) {
        const int n = rng.uniform_int(1, 6);
        SymMat m(n);
        Eigen::MatrixXd em(n, n);
        for (int i = 0; i < n; ++i)
            for (int j = i; j < n; ++j) {
                const double v = rng.uniform(-3.0, 3.0);
                m.set(i, j, v);
                em(i, j) = v;
                em(j, i) = v;
            }
        const auto mine = sym_eigenvalues(m);
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(em, Eigen::EigenvaluesOnly);
        for (int i = 0; i < n; ++i) worst = std::max(worst, std::abs(mine[i] - es.eigenvalues()[i]));
    }
    CHECK(worst < 1e-9);
}

TEST_CASE("rng is deterministic and in range") {
    Rng a(42), b(42);
    for (int i = 0; i < 1000; ++i) REQUIRE(a.next_u64() == b.next_u64());

    Rng r(7);
    for (int i = 0; i < 10000; ++i) {
        const double u = r.uniform01();
        REQUIRE(u >= 0.0);
        REQUIRE(u < 1.0);
        const int k = r.uniform_int(-3, 5);
        REQUIRE(k >= -3);
        REQUIRE(k <= 5);
    }
}

TEST_CASE("rng normal moments") {
    Rng r(123456);
    const int n = 200000;
    double s1 = 0.0, s2 = 0.0;
    for (int i = 0; i < n; ++i) {
        const double x = r.normal();
        s1 += x;
        s2 += x * x;
    }
    CHECK(std::abs(s1 / n) < 0.01);
    CHECK(std::abs(s2 / n - 1.0) < 0.02);
}

TEST_CASE("format_double round-trips exactly") {
    Rng r(99);
    for (int i = 0; i < 2000; ++i) {
        const double x = (r.uniform01() - 0.5) * std::pow(10.0, r.uniform_int(-12, 12));
        CHECK(std::stod(format_double(x)) == x);
    }
    CHECK(format_double(0.5) == "0.5");
    CHECK(format_double(-0.0) == "-0");
}
