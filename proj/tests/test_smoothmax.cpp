#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "richberg/smoothmax.hpp"

using namespace richberg;

namespace {

const SmoothMaxEngine& engine() {
    static SmoothMaxEngine e;
    return e;
}

Vec random_t(Rng& rng, int m, double spread) {
    Vec t(m);
    for (int j = 0; j < m; ++j) t[j] = rng.uniform(-spread, spread);
    return t;
}

Vec random_eps(Rng& rng, int m) {
    Vec e(m);
    for (int j = 0; j < m; ++j) e[j] = rng.uniform(0.2, 1.5);
    return e;
}

}  // namespace

TEST_CASE("mollifier kernel shape and normalization") {
    const Mollifier& phi = engine().mollifier();
    CHECK(phi.value(1.0) == 0.0);
    CHECK(phi.value(-1.0) == 0.0);
    CHECK(phi.value(1.7) == 0.0);
    CHECK(phi.value(0.3) == phi.value(-0.3));
    CHECK(phi.normalization() == doctest::Approx(2.2522836210435813).epsilon(1e-12));
    CHECK(phi.peak() == doctest::Approx(phi.normalization() * std::exp(-1.0)).epsilon(1e-15));
}

TEST_CASE("mollifier cdf endpoints, symmetry, and accuracy") {
    const Mollifier& phi = engine().mollifier();
    CHECK(phi.cdf(-1.0) == 0.0);
    CHECK(phi.cdf(1.0) == 1.0);
    CHECK(phi.cdf(-3.0) == 0.0);
    CHECK(phi.cdf(5.0) == 1.0);
    CHECK(phi.cdf(0.0) == doctest::Approx(0.5).epsilon(1e-13));
    Rng rng(404);
    for (int i = 0; i < 50; ++i) {
        const double s = rng.uniform(-0.999, 0.999);
        // independent route: composite Gauss-Legendre from -1 to s
        const auto& rule = gauss_legendre(64);
        double acc = 0.0;
        const int panels = 8;
        for (int p = 0; p < panels; ++p) {
            const double a = -1.0 + (s + 1.0) * p / panels;
            const double b = -1.0 + (s + 1.0) * (p + 1) / panels;
            for (std::size_t q = 0; q < rule.nodes.size(); ++q)
                acc += 0.5 * (b - a) * rule.weights[q] *
                       phi.value(0.5 * (a + b) + 0.5 * (b - a) * rule.nodes[q]);
        }
        CHECK(std::abs(phi.cdf(s) - acc) < 1e-12);
        CHECK(std::abs(phi.cdf(s) + phi.cdf(-s) - 1.0) < 1e-13);
    }
}

TEST_CASE("mollifier derivatives match finite differences") {
    const Mollifier& phi = engine().mollifier();
    const double h = 1e-6;
    for (double s : {-0.8, -0.3, 0.0, 0.45, 0.9}) {
        const double d1 = (phi.value(s + h) - phi.value(s - h)) / (2.0 * h);
        CHECK(std::abs(phi.derivative(s) - d1) < 1e-5);
        const double d2 = (phi.derivative(s + h) - phi.derivative(s - h)) / (2.0 * h);
        CHECK(std::abs(phi.second_derivative(s) - d2) < 1e-4);
    }
}

TEST_CASE("engine rejects bad configuration and inputs") {
    CHECK_THROWS_AS(SmoothMaxEngine(4), std::invalid_argument);
    CHECK_THROWS_AS(SmoothMaxEngine(24, -1.0), std::invalid_argument);
    CHECK_THROWS_AS(SmoothMaxEngine(24, 0.0, 0.0), std::invalid_argument);
    CHECK_THROWS_AS(engine().smooth_max({}, {}), std::invalid_argument);
    CHECK_THROWS_AS(engine().smooth_max({0.0}, {0.0}), std::invalid_argument);
    CHECK_THROWS_AS(engine().smooth_max({0.0}, {1.0, 1.0}), std::invalid_argument);
    CHECK_THROWS_AS(engine().smooth_max({0.0, 1.0 / 0.0}, {1.0, 1.0}), std::invalid_argument);
    // seven arguments that all stay active
    CHECK_THROWS_AS(engine().smooth_max(Vec(7, 0.0), Vec(7, 1.0)), std::invalid_argument);
}

TEST_CASE("pinned two-argument value") {
    CHECK(std::abs(engine().smooth_max({0.0, 0.0}, {1.0, 1.0}) - 0.22873597990353589) < 1e-9);
}

TEST_CASE("pinned three-argument value") {
    CHECK(std::abs(engine().smooth_max({0.0, 0.3, -0.2}, {0.5, 0.4, 0.8}) - 0.323207796222075) <
          1e-9);
}

TEST_CASE("single argument is returned exactly") {
    const SmoothMaxResult r = engine().evaluate({3.25}, {0.7});
    CHECK(r.value == 3.25);
    CHECK(r.gradient[0] == 1.0);
    CHECK(r.hessian(0, 0) == 0.0);
}

TEST_CASE("iterated pruning") {
    CHECK(engine().active_set({0.0, 10.0}, {1.0, 1.0}) == std::vector<int>{1});
    CHECK(engine().smooth_max({0.0, 10.0}, {1.0, 1.0}) == 10.0);
    // knocking out one argument lowers the bar for the next
    CHECK(engine().active_set({0.0, 1.9, 10.0}, {1.0, 1.0, 1.0}) == std::vector<int>{2});
    // removal is inclusive at equality
    CHECK(engine().active_set({0.0, 2.0}, {1.0, 1.0}) == std::vector<int>{1});
    CHECK(engine().active_set({0.0, 1.999}, {1.0, 1.0}) == (std::vector<int>{0, 1}));
    // a positive pruning tolerance widens the cut
    const SmoothMaxEngine loose(24, 0.1);
    CHECK(loose.active_set({0.0, 1.95}, {1.0, 1.0}) == std::vector<int>{1});
}

TEST_CASE("dropping a pruned argument does not move the value") {
    const SmoothMaxResult full = engine().evaluate({-5.0, 0.0, 0.5}, {1.0, 1.0, 0.6});
    const SmoothMaxResult cut = engine().evaluate({0.0, 0.5}, {1.0, 0.6});
    CHECK(std::abs(full.value - cut.value) < 1e-15);
    CHECK(full.gradient[0] == 0.0);
    CHECK(std::abs(full.gradient[1] - cut.gradient[0]) < 1e-15);
    CHECK(std::abs(full.gradient[2] - cut.gradient[1]) < 1e-15);
    CHECK(full.hessian(0, 0) == 0.0);
    CHECK(full.hessian(0, 1) == 0.0);
}

TEST_CASE("translation, sandwich, monotonicity, permutation invariance") {
    Rng rng(6021023);
    for (int trial = 0; trial < 40; ++trial) {
        const int m = rng.uniform_int(2, 5);
        const Vec t = random_t(rng, m, 2.0);
        const Vec e = random_eps(rng, m);
        const double v = engine().smooth_max(t, e);

        // sandwich: max t <= M <= max(t + eps)
        double mt = t[0], mte = t[0] + e[0];
        for (int j = 0; j < m; ++j) {
            mt = std::max(mt, t[j]);
            mte = std::max(mte, t[j] + e[j]);
        }
        CHECK(v >= mt - 1e-11);
        CHECK(v <= mte + 1e-11);

        // translation by s along the diagonal
        const double s = rng.uniform(-2.0, 2.0);
        Vec ts(t);
        for (double& x : ts) x += s;
        CHECK(std::abs(engine().smooth_max(ts, e) - (v + s)) < 1e-11);

        // monotone in each argument
        Vec tu(t);
        const int bump = rng.uniform_int(0, m - 1);
        tu[bump] += rng.uniform(0.0, 1.0);
        CHECK(engine().smooth_max(tu, e) >= v - 1e-11);

        // permutation invariance (reverse both vectors)
        Vec tr(t.rbegin(), t.rend()), er(e.rbegin(), e.rend());
        CHECK(std::abs(engine().smooth_max(tr, er) - v) < 1e-11);
    }
}

TEST_CASE("gradient is a probability vector and matches finite differences") {
    Rng rng(778899);
    for (int trial = 0; trial < 12; ++trial) {
        const int m = rng.uniform_int(2, 4);
        const Vec t = random_t(rng, m, 1.0);
        const Vec e = random_eps(rng, m);
        const SmoothMaxResult r = engine().evaluate(t, e);

        double sum = 0.0;
        for (int j = 0; j < m; ++j) {
            CHECK(r.gradient[j] >= -1e-12);
            sum += r.gradient[j];
        }
        CHECK(std::abs(sum - 1.0) < 1e-11);

        const double h = 1e-5;
        for (int j = 0; j < m; ++j) {
            Vec tp(t), tm(t);
            tp[j] += h;
            tm[j] -= h;
            const double fd = (engine().smooth_max(tp, e) - engine().smooth_max(tm, e)) / (2.0 * h);
            CHECK(std::abs(fd - r.gradient[j]) < 1e-6);
        }
    }
}

TEST_CASE("hessian has zero row sums, is PSD, and matches finite differences") {
    Rng rng(13579);
    for (int trial = 0; trial < 8; ++trial) {
        const int m = rng.uniform_int(2, 4);
        const Vec t = random_t(rng, m, 0.8);
        const Vec e = random_eps(rng, m);
        const SmoothMaxResult r = engine().evaluate(t, e);

        for (int i = 0; i < m; ++i) {
            double row = 0.0;
            for (int j = 0; j < m; ++j) row += r.hessian(i, j);
            CHECK(std::abs(row) < 1e-12);
        }
        CHECK(lambda_min(r.hessian) >= -1e-12);

        const double h = 1e-5;
        for (int i = 0; i < m; ++i) {
            Vec tp(t), tm(t);
            tp[i] += h;
            tm[i] -= h;
            const Vec gp = engine().smooth_max_gradient(tp, e);
            const Vec gm = engine().smooth_max_gradient(tm, e);
            for (int j = 0; j < m; ++j)
                CHECK(std::abs((gp[j] - gm[j]) / (2.0 * h) - r.hessian(i, j)) < 1e-6);
        }
    }
}

TEST_CASE("midpoint convexity in t") {
    Rng rng(24680);
    for (int trial = 0; trial < 25; ++trial) {
        const int m = rng.uniform_int(2, 5);
        const Vec a = random_t(rng, m, 2.0), b = random_t(rng, m, 2.0);
        const Vec e = random_eps(rng, m);
        Vec mid(m);
        for (int j = 0; j < m; ++j) mid[j] = 0.5 * (a[j] + b[j]);
        CHECK(engine().smooth_max(mid, e) <=
              0.5 * (engine().smooth_max(a, e) + engine().smooth_max(b, e)) + 1e-11);
    }
}

TEST_CASE("error term is bounded by the largest width and is shift invariant") {
    Rng rng(1000003);
    for (int trial = 0; trial < 20; ++trial) {
        const int m = rng.uniform_int(2, 5);
        const Vec t = random_t(rng, m, 2.0);
        const Vec e = random_eps(rng, m);
        const double err = engine().error_term(t, e);
        double emax = 0.0;
        for (int j = 0; j < m; ++j) emax = std::max(emax, e[j]);
        CHECK(std::abs(err) <= emax + 1e-10);

        Vec ts(t);
        const double s = rng.uniform(-3.0, 3.0);
        for (double& x : ts) x += s;
        CHECK(std::abs(engine().error_term(ts, e) - err) < 1e-10);
    }
}

TEST_CASE("monte carlo oracle agrees with the quadrature route") {
    const Vec t{0.0, 0.0}, e{1.0, 1.0};
    const McEstimate mc = engine().mc_oracle_smooth_max(t, e, 400000, 20250816);
    const double exact = engine().smooth_max(t, e);
    CHECK(std::abs(mc.mean - exact) < 4.0 * mc.standard_error);
    CHECK(mc.standard_error < 2e-3);
    CHECK_THROWS_AS(engine().mc_oracle_smooth_max(t, e, 100, 1), std::invalid_argument);
}

TEST_CASE("composed jet matches finite differences through quadratics") {
    // u1 = |x|^2 / 2, u2 = shifted saddle-free quadratic, composed in 2D
    const QuadraticSpec u1(0.0, Vec{0.0, 0.0}, SymMat::identity(2), Vec{0.0, 0.0});
    SymMat a2(2);
    a2.set(0, 0, 0.5);
    a2.set(1, 1, 2.0);
    a2.set(0, 1, 0.3);
    const QuadraticSpec u2(0.05, Vec{0.4, -0.2}, a2, Vec{0.3, 0.1});
    const Vec eps{0.15, 0.2};

    auto value_at = [&](const Vec& x) {
        return engine().smooth_max({0.5 * dot(x, x), u2.value(x)}, eps);
    };

    const Vec x{0.12, -0.07};
    const std::vector<Jet2> jets{jet_of_quadratic(u1, x), jet_of_quadratic(u2, x)};
    const Vec t{jets[0].r, jets[1].r};
    const Jet2 w = engine().compose_jet(jets, t, eps);

    CHECK(w.r == doctest::Approx(value_at(x)).epsilon(1e-13));

    const double h = 1e-5;
    for (int d = 0; d < 2; ++d) {
        Vec xp(x), xm(x);
        xp[d] += h;
        xm[d] -= h;
        CHECK(std::abs((value_at(xp) - value_at(xm)) / (2.0 * h) - w.p[d]) < 1e-6);
        for (int d2 = 0; d2 < 2; ++d2) {
            Vec xpp(xp), xpm(xp), xmp(xm), xmm(xm);
            xpp[d2] += h;
            xpm[d2] -= h;
            xmp[d2] += h;
            xmm[d2] -= h;
            const double fd =
                (value_at(xpp) - value_at(xpm) - value_at(xmp) + value_at(xmm)) / (4.0 * h * h);
            CHECK(std::abs(fd - w.A(d, d2)) < 2e-4);
        }
    }

    // curvature correction P = A_w - sum g_j A_j must be PSD
    const SmoothMaxResult r = engine().evaluate(t, eps);
    SymMat p = w.A;
    p.axpy(-r.gradient[0], jets[0].A);
    p.axpy(-r.gradient[1], jets[1].A);
    CHECK(lambda_min(p) >= -1e-12);

    // value mismatch between t and jets is rejected
    CHECK_THROWS_AS(engine().compose_jet(jets, {t[0] + 0.1, t[1]}, eps), std::invalid_argument);
}

TEST_CASE("compose_jet reproduces the affine case exactly") {
    // both inputs affine with the same slope: M_eps differs from each input
    // by a constant, so the composed Hessian must vanish
    SymMat zero(2);
    const Jet2 j1(0.3, Vec{1.0, -2.0}, zero), j2(0.1, Vec{1.0, -2.0}, zero);
    const Jet2 w = engine().compose_jet({j1, j2}, {0.3, 0.1}, {0.25, 0.25});
    CHECK(std::abs(w.p[0] - 1.0) < 1e-12);
    CHECK(std::abs(w.p[1] + 2.0) < 1e-12);
    CHECK(operator_norm(w.A) < 1e-12);
}
