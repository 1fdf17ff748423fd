#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <numeric>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "richberg/core.hpp"
#include "richberg/gluing.hpp"
#include "richberg/jets.hpp"
#include "richberg/localapprox.hpp"
#include "richberg/smoothmax.hpp"
#include "richberg/subequations.hpp"

namespace richberg {

// One CSV row of a property run. `max_violation <= tolerance` decides pass,
// so a row is auditable without rerunning anything.
struct SuiteRow {
    std::string module;
    std::string property;
    long trials = 0;
    double max_violation = 0.0;
    double tolerance = 0.0;
    bool pass = false;
};

struct SuiteOptions {
    std::uint64_t seed = 0;
    int quadrature_degree = 24;
    double tol_scale = 1.0;
};

struct CheckOutcome {
    long trials = 0;
    double max_violation = 0.0;
};

namespace suites_detail {

struct SmInput {
    Vec t, eps;
};

inline SmInput random_input(Rng& rng, int max_m, double eps_lo = 0.05, double eps_hi = 0.6) {
    const int m = rng.uniform_int(1, max_m);
    SmInput in;
    in.t.resize(m);
    in.eps.resize(m);
    for (int j = 0; j < m; ++j) {
        in.t[j] = rng.uniform(-2.0, 2.0);
        in.eps[j] = rng.uniform(eps_lo, eps_hi);
    }
    return in;
}

inline void bump(double& worst, double violation) { worst = std::max(worst, violation); }

// Cycles through every convex catalogued fiber, shifted variants included.
inline FiberSpec random_convex_fiber(Rng& rng, int index) {
    const int n = 2 + index % 2;
    switch (index % 5) {
        case 0:
            return FiberSpec::trace_cone(n);
        case 1:
            return FiberSpec::psd_cone(n);
        case 2: {
            SymMat normal = detail::random_psd(rng, n);
            normal.add(0, 0, 0.3);  // keep the normal away from zero
            return FiberSpec::halfspace(normal, 0.0);
        }
        case 3:
            return FiberSpec::grassmannian(PlaneList::axes(n)).shifted();
        default:
            return FiberSpec::trace_cone(n).shifted();
    }
}

}  // namespace suites_detail

// ---------------------------------------------------------------------------
// Smoothed-max checks. Each returns the worst violation over `trials` seeded
// random inputs; the suite and the acceptance gate share these bodies and
// differ only in trial counts and tolerances.

inline CheckOutcome check_smoothmax_monotonicity(const SmoothMaxEngine& engine, std::uint64_t seed,
                                                 long trials, int max_m = 4) {
    Rng rng(seed);
    CheckOutcome out{trials, 0.0};
    for (long i = 0; i < trials; ++i) {
        auto in = suites_detail::random_input(rng, max_m);
        Vec higher = in.t;
        for (double& v : higher) v += rng.uniform(0.0, 0.5);
        suites_detail::bump(out.max_violation,
                            engine.smooth_max(in.t, in.eps) - engine.smooth_max(higher, in.eps));
    }
    return out;
}

inline CheckOutcome check_smoothmax_translation(const SmoothMaxEngine& engine, std::uint64_t seed,
                                                long trials, int max_m = 4) {
    Rng rng(seed);
    CheckOutcome out{trials, 0.0};
    for (long i = 0; i < trials; ++i) {
        auto in = suites_detail::random_input(rng, max_m);
        const double s = rng.uniform(-1.0, 1.0);
        Vec shifted = in.t;
        for (double& v : shifted) v += s;
        suites_detail::bump(out.max_violation,
                            std::abs(engine.smooth_max(shifted, in.eps) -
                                     engine.smooth_max(in.t, in.eps) - s));
    }
    return out;
}

inline CheckOutcome check_smoothmax_sandwich(const SmoothMaxEngine& engine, std::uint64_t seed,
                                             long trials, int max_m = 4) {
    Rng rng(seed);
    CheckOutcome out{trials, 0.0};
    for (long i = 0; i < trials; ++i) {
        auto in = suites_detail::random_input(rng, max_m);
        const double value = engine.smooth_max(in.t, in.eps);
        double lo = -std::numeric_limits<double>::infinity(), hi = lo;
        for (std::size_t j = 0; j < in.t.size(); ++j) {
            lo = std::max(lo, in.t[j]);
            hi = std::max(hi, in.t[j] + in.eps[j]);
        }
        suites_detail::bump(out.max_violation, std::max(lo - value, value - hi));
    }
    return out;
}

inline CheckOutcome check_smoothmax_permutation(const SmoothMaxEngine& engine, std::uint64_t seed,
                                                long trials, int max_m = 4) {
    Rng rng(seed);
    CheckOutcome out{trials, 0.0};
    for (long i = 0; i < trials; ++i) {
        auto in = suites_detail::random_input(rng, max_m);
        const std::size_t m = in.t.size();
        std::vector<std::size_t> perm(m);
        std::iota(perm.begin(), perm.end(), std::size_t{0});
        for (std::size_t j = m; j > 1; --j)
            std::swap(perm[j - 1], perm[static_cast<std::size_t>(rng.uniform_int(0, static_cast<int>(j) - 1))]);
        Vec pt(m), pe(m);
        for (std::size_t j = 0; j < m; ++j) {
            pt[j] = in.t[perm[j]];
            pe[j] = in.eps[perm[j]];
        }
        suites_detail::bump(out.max_violation, std::abs(engine.smooth_max(pt, pe) -
                                                        engine.smooth_max(in.t, in.eps)));
    }
    return out;
}

inline CheckOutcome check_smoothmax_convexity(const SmoothMaxEngine& engine, std::uint64_t seed,
                                              long trials, int max_m = 4) {
    Rng rng(seed);
    CheckOutcome out{trials, 0.0};
    for (long i = 0; i < trials; ++i) {
        auto in = suites_detail::random_input(rng, max_m);
        Vec other(in.t.size());
        for (double& v : other) v = rng.uniform(-2.0, 2.0);
        const double lam = rng.uniform01();
        Vec mid(in.t.size());
        for (std::size_t j = 0; j < mid.size(); ++j) mid[j] = lam * in.t[j] + (1.0 - lam) * other[j];
        suites_detail::bump(out.max_violation,
                            engine.smooth_max(mid, in.eps) -
                                lam * engine.smooth_max(in.t, in.eps) -
                                (1.0 - lam) * engine.smooth_max(other, in.eps));
    }
    return out;
}

inline CheckOutcome check_smoothmax_gradient_simplex(const SmoothMaxEngine& engine,
                                                     std::uint64_t seed, long trials,
                                                     int max_m = 4) {
    Rng rng(seed);
    CheckOutcome out{trials, 0.0};
    for (long i = 0; i < trials; ++i) {
        auto in = suites_detail::random_input(rng, max_m);
        const Vec grad = engine.smooth_max_gradient(in.t, in.eps);
        double sum = 0.0;
        for (double gj : grad) {
            sum += gj;
            suites_detail::bump(out.max_violation, std::max(-gj, gj - 1.0));
        }
        suites_detail::bump(out.max_violation, std::abs(sum - 1.0));
    }
    return out;
}

inline CheckOutcome check_smoothmax_hessian_psd(const SmoothMaxEngine& engine, std::uint64_t seed,
                                                long trials, int max_m = 4) {
    Rng rng(seed);
    CheckOutcome out{trials, 0.0};
    for (long i = 0; i < trials; ++i) {
        auto in = suites_detail::random_input(rng, max_m);
        suites_detail::bump(out.max_violation,
                            -lambda_min(engine.smooth_max_hessian(in.t, in.eps)));
    }
    return out;
}

inline CheckOutcome check_smoothmax_hessian_rowsum(const SmoothMaxEngine& engine,
                                                   std::uint64_t seed, long trials, int max_m = 4) {
    Rng rng(seed);
    CheckOutcome out{trials, 0.0};
    for (long i = 0; i < trials; ++i) {
        auto in = suites_detail::random_input(rng, max_m);
        const SymMat hess = engine.smooth_max_hessian(in.t, in.eps);
        for (int r = 0; r < hess.n(); ++r) {
            double row = 0.0;
            for (int c = 0; c < hess.n(); ++c) row += hess(r, c);
            suites_detail::bump(out.max_violation, std::abs(row));
        }
    }
    return out;
}

inline CheckOutcome check_smoothmax_error_bound(const SmoothMaxEngine& engine, std::uint64_t seed,
                                                long trials, int max_m = 4) {
    Rng rng(seed);
    CheckOutcome out{trials, 0.0};
    for (long i = 0; i < trials; ++i) {
        auto in = suites_detail::random_input(rng, max_m);
        const double cap = *std::max_element(in.eps.begin(), in.eps.end());
        suites_detail::bump(out.max_violation, std::abs(engine.error_term(in.t, in.eps)) - cap);
    }
    return out;
}

// Property (4): force one coordinate below the pruning threshold and demand
// the full and reduced evaluations agree.
inline CheckOutcome check_smoothmax_pruning(const SmoothMaxEngine& engine, std::uint64_t seed,
                                            long trials, int max_m = 4) {
    Rng rng(seed);
    CheckOutcome out{trials, 0.0};
    for (long i = 0; i < trials; ++i) {
        const int m = rng.uniform_int(2, std::max(2, max_m));
        Vec t(m), eps(m);
        for (int j = 0; j < m; ++j) {
            t[j] = rng.uniform(-1.0, 1.0);
            eps[j] = rng.uniform(0.05, 0.4);
        }
        const int drop = rng.uniform_int(0, m - 1);
        double other = -std::numeric_limits<double>::infinity();
        for (int j = 0; j < m; ++j)
            if (j != drop) other = std::max(other, t[j] - eps[j]);
        t[drop] = other - eps[drop] - rng.uniform(0.0, 1.0);
        Vec t2, e2;
        for (int j = 0; j < m; ++j)
            if (j != drop) {
                t2.push_back(t[j]);
                e2.push_back(eps[j]);
            }
        suites_detail::bump(out.max_violation,
                            std::abs(engine.smooth_max(t, eps) - engine.smooth_max(t2, e2)));
    }
    return out;
}

// Violation is the worst z-score of the quadrature value against the
// Monte-Carlo estimate, so the tolerance is a sigma count.
inline CheckOutcome check_smoothmax_mc_agreement(const SmoothMaxEngine& engine, std::uint64_t seed,
                                                 long inputs, long samples, int max_m = 4) {
    Rng rng(seed);
    CheckOutcome out{inputs, 0.0};
    for (long i = 0; i < inputs; ++i) {
        auto in = suites_detail::random_input(rng, max_m, 0.1, 0.6);
        const double value = engine.smooth_max(in.t, in.eps);
        const McEstimate mc =
            engine.mc_oracle_smooth_max(in.t, in.eps, samples, rng.next_u64());
        suites_detail::bump(out.max_violation, std::abs(value - mc.mean) / mc.standard_error);
    }
    return out;
}

// ---------------------------------------------------------------------------
// Jet algebra checks.

inline CheckOutcome check_jets_quadratic_fd(std::uint64_t seed, long trials) {
    Rng rng(seed);
    CheckOutcome out{trials, 0.0};
    for (long i = 0; i < trials; ++i) {
        const int n = rng.uniform_int(1, 3);
        QuadraticSpec q(rng.uniform(-1.0, 1.0), Vec(n), detail::random_sym(rng, n), Vec(n));
        for (int d = 0; d < n; ++d) {
            q.p0[d] = rng.uniform(-1.0, 1.0);
            q.center[d] = rng.uniform(-0.3, 0.3);
        }
        const double h = 0.1;
        GridField f = make_box_grid(Vec(n, -2.0 * h), h, std::vector<int>(n, 5));
        fill_from(f, [&](const Vec& x) { return q.value(x); });
        const std::vector<int> center(n, 2);
        const Jet2 fd = finite_difference_jet(f, center);
        const Jet2 exact = jet_of_quadratic(q, f.node_position(center));
        suites_detail::bump(out.max_violation, std::abs(fd.r - exact.r));
        for (int d = 0; d < n; ++d)
            suites_detail::bump(out.max_violation, std::abs(fd.p[d] - exact.p[d]));
        for (int a = 0; a < n; ++a)
            for (int b = 0; b < n; ++b)
                suites_detail::bump(out.max_violation, std::abs(fd.A(a, b) - exact.A(a, b)));
    }
    return out;
}

inline CheckOutcome check_jets_combination_permutation(std::uint64_t seed, long trials) {
    Rng rng(seed);
    CheckOutcome out{trials, 0.0};
    for (long i = 0; i < trials; ++i) {
        const int n = rng.uniform_int(1, 3);
        const int m = rng.uniform_int(2, 4);
        std::vector<Jet2> jets;
        Vec w(m);
        double total = 0.0;
        for (int j = 0; j < m; ++j) {
            Jet2 jet(rng.normal(), Vec(n), detail::random_sym(rng, n));
            for (int d = 0; d < n; ++d) jet.p[d] = rng.normal();
            jets.push_back(jet);
            w[j] = rng.uniform(0.0, 1.0);
            total += w[j];
        }
        for (double& wj : w) wj /= total;
        const Jet2 base = convex_combination(w, jets);
        std::vector<Jet2> rjets(jets.rbegin(), jets.rend());
        Vec rw(w.rbegin(), w.rend());
        const Jet2 flipped = convex_combination(rw, rjets);
        suites_detail::bump(out.max_violation, std::abs(base.r - flipped.r));
        for (int d = 0; d < n; ++d)
            suites_detail::bump(out.max_violation, std::abs(base.p[d] - flipped.p[d]));
        for (int a = 0; a < n; ++a)
            for (int b = 0; b < n; ++b)
                suites_detail::bump(out.max_violation, std::abs(base.A(a, b) - flipped.A(a, b)));
    }
    return out;
}

inline CheckOutcome check_jets_translation_composition(std::uint64_t seed, long trials) {
    Rng rng(seed);
    CheckOutcome out{trials, 0.0};
    for (long i = 0; i < trials; ++i) {
        const int n = rng.uniform_int(1, 3);
        Jet2 jet(rng.normal(), Vec(n), detail::random_sym(rng, n));
        for (int d = 0; d < n; ++d) jet.p[d] = rng.normal();
        const double a = -rng.uniform(0.0, 1.0), b = -rng.uniform(0.0, 1.0);
        const SymMat P = detail::random_psd(rng, n), Q = detail::random_psd(rng, n);
        const Jet2 twice = translate_positive(translate_positive(jet, a, P), b, Q);
        SymMat PQ = P;
        PQ.axpy(1.0, Q);
        const Jet2 once = translate_positive(jet, a + b, PQ);
        suites_detail::bump(out.max_violation, std::abs(twice.r - once.r));
        for (int x = 0; x < n; ++x)
            for (int y = 0; y < n; ++y)
                suites_detail::bump(out.max_violation, std::abs(twice.A(x, y) - once.A(x, y)));
    }
    return out;
}

// ---------------------------------------------------------------------------
// Fiber checks.

inline CheckOutcome check_fibers_margin_lipschitz(std::uint64_t seed, long trials) {
    Rng rng(seed);
    CheckOutcome out{trials, 0.0};
    for (long i = 0; i < trials; ++i) {
        const FiberSpec fiber = suites_detail::random_convex_fiber(rng, static_cast<int>(i));
        const int n = fiber.dim;
        Jet2 a(rng.normal(), Vec(n), detail::random_sym(rng, n));
        Jet2 b(rng.normal(), Vec(n), detail::random_sym(rng, n));
        for (int d = 0; d < n; ++d) {
            a.p[d] = rng.normal();
            b.p[d] = rng.normal();
        }
        Jet2 diff = jet_add(a, jet_scale(-1.0, b));
        suites_detail::bump(out.max_violation, std::abs(margin(fiber, a) - margin(fiber, b)) -
                                                   jet_norm(diff));
    }
    return out;
}

// Margin bookkeeping through composition: members with margin >= g, convex
// weights taken from a genuine smoothed-max gradient, the error term and the
// PSD correction from the same evaluation. Composite margin must clear
// g - max(eps).
inline CheckOutcome check_fibers_composition_chain(const SmoothMaxEngine& engine,
                                                   std::uint64_t seed, long trials) {
    Rng rng(seed);
    CheckOutcome out{trials, 0.0};
    for (long i = 0; i < trials; ++i) {
        const FiberSpec fiber = suites_detail::random_convex_fiber(rng, static_cast<int>(i));
        const double g = rng.uniform(0.2, 1.5);
        const int m = rng.uniform_int(2, 4);
        std::vector<Jet2> jets;
        Vec t(m), eps(m);
        for (int j = 0; j < m; ++j) {
            Jet2 jet = detail::random_member(rng, fiber, g + rng.uniform(0.0, 0.3));
            t[j] = rng.uniform(-0.5, 0.5);
            jet.r = t[j];
            if (fiber.with_negativity && jet.r > -g) jet.r = t[j] = -g - rng.uniform(0.0, 0.3);
            jets.push_back(jet);
            eps[j] = rng.uniform(0.05, 0.3);
        }
        const Jet2 composed = engine.compose_jet(jets, t, eps);
        const double cap = *std::max_element(eps.begin(), eps.end());
        suites_detail::bump(out.max_violation, (g - cap) - margin(fiber, composed));
    }
    return out;
}

inline CheckOutcome check_fibers_psd_eigen(std::uint64_t seed, long trials) {
    Rng rng(seed);
    CheckOutcome out{trials, 0.0};
    for (long i = 0; i < trials; ++i) {
        const int n = rng.uniform_int(1, 5);
        const FiberSpec fiber = FiberSpec::psd_cone(n);
        Jet2 jet(rng.normal(), Vec(n, 0.0), detail::random_sym(rng, n, 2.0));
        suites_detail::bump(out.max_violation,
                            std::abs(margin(fiber, jet) - lambda_min(jet.A)));
    }
    return out;
}

inline CheckOutcome check_fibers_grassmannian_bound(std::uint64_t seed, long trials) {
    Rng rng(seed);
    CheckOutcome out{trials, 0.0};
    for (long i = 0; i < trials; ++i) {
        const int n = rng.uniform_int(2, 4);
        const FiberSpec fiber = FiberSpec::grassmannian(PlaneList::axes(n));
        Jet2 jet(0.0, Vec(n, 0.0), detail::random_sym(rng, n));
        suites_detail::bump(out.max_violation, lambda_min(jet.A) - margin(fiber, jet));
    }
    return out;
}

inline CheckOutcome check_fibers_axioms(std::uint64_t seed, int samples) {
    const std::vector<FiberSpec> fibers = {
        FiberSpec::trace_cone(2),          FiberSpec::trace_cone(3).shifted(),
        FiberSpec::psd_cone(2),            FiberSpec::psd_cone(3).shifted(),
        FiberSpec::grassmannian(PlaneList::axes(3)),
    };
    CheckOutcome out{static_cast<long>(fibers.size()) * samples, 0.0};
    std::uint64_t s = seed;
    for (const FiberSpec& fiber : fibers) {
        const FiberAxiomReport rep = check_fiber_axioms(fiber, samples, ++s);
        for (const AxiomCheck& c : rep.checks)
            suites_detail::bump(out.max_violation, c.max_violation);
    }
    return out;
}

inline CheckOutcome check_fibers_negativity_cap(std::uint64_t seed, long trials) {
    Rng rng(seed);
    CheckOutcome out{trials, 0.0};
    for (long i = 0; i < trials; ++i) {
        const int n = rng.uniform_int(2, 3);
        const FiberSpec fiber = FiberSpec::trace_cone(n).shifted();
        Jet2 jet = detail::random_member(rng, fiber, rng.uniform(0.0, 1.0));
        jet.r = rng.uniform(-2.0, 0.0);
        const FiberSpec base = FiberSpec::trace_cone(n);
        const double expected = std::min(margin(base, jet), -jet.r);
        suites_detail::bump(out.max_violation, std::abs(margin(fiber, jet) - expected));
    }
    return out;
}

inline CheckOutcome check_fibers_shrink_nesting(std::uint64_t seed, long trials) {
    Rng rng(seed);
    CheckOutcome out{trials, 0.0};
    for (long i = 0; i < trials; ++i) {
        const FiberSpec fiber = suites_detail::random_convex_fiber(rng, static_cast<int>(i));
        const double g = rng.uniform(0.1, 1.0);
        const Jet2 jet = detail::random_member(rng, fiber, g + rng.uniform(0.0, 0.5));
        const ShrunkFiber tight = shrink(fiber, g);
        // member of the shrunk fiber must be a member of the base fiber
        if (tight.is_member(jet) && !is_member(fiber, jet))
            suites_detail::bump(out.max_violation, 1.0);
        // margin identity: shrunk membership iff margin >= g
        const bool expected = margin(fiber, jet) >= g;
        if (tight.is_member(jet) != expected) suites_detail::bump(out.max_violation, 1.0);
    }
    return out;
}

// Brute-force distance oracle for the trace cone: walk rays in many unit
// directions (operator norm) until membership flips; the shortest exit must
// match the closed-form margin.
inline CheckOutcome check_fibers_trace_distance(std::uint64_t seed, long trials,
                                                int directions = 64) {
    Rng rng(seed);
    CheckOutcome out{trials, 0.0};
    for (long i = 0; i < trials; ++i) {
        const int n = rng.uniform_int(2, 3);
        const FiberSpec fiber = FiberSpec::trace_cone(n);
        SymMat A = detail::random_sym(rng, n);
        const double base = margin(fiber, Jet2(0.0, Vec(n, 0.0), A));
        if (base <= 0.0) {
            // lift past the measured deficit so the probe starts inside
            A.axpy(1.0, detail::random_psd(rng, n));
            for (int d = 0; d < n; ++d) A.add(d, d, 0.2 - base);
        }
        const Jet2 jet(0.0, Vec(n, 0.0), A);
        const double m = margin(fiber, jet);
        double best = std::numeric_limits<double>::infinity();
        for (int d = 0; d <= directions; ++d) {
            SymMat dir(n);
            if (d == 0) {
                for (int k = 0; k < n; ++k) dir.set(k, k, 1.0);
            } else {
                dir = detail::random_sym(rng, n);
            }
            const double scale = operator_norm(dir);
            if (scale < 1e-9) continue;
            dir.scale(1.0 / scale);
            // membership along A - t*dir flips at t = n*m/tr(dir) when tr > 0
            double lo = 0.0, hi = 8.0 * (std::abs(m) + 1.0);
            SymMat probe = A;
            probe.axpy(-hi, dir);
            if (is_member(fiber, Jet2(0.0, Vec(n, 0.0), probe))) continue;
            for (int it = 0; it < 60; ++it) {
                const double mid = 0.5 * (lo + hi);
                probe = A;
                probe.axpy(-mid, dir);
                (is_member(fiber, Jet2(0.0, Vec(n, 0.0), probe)) ? lo : hi) = mid;
            }
            best = std::min(best, 0.5 * (lo + hi));
        }
        suites_detail::bump(out.max_violation, std::abs(best - m));
    }
    return out;
}

// ---------------------------------------------------------------------------
// Solver checks.

namespace suites_detail {

inline GridField disc_grid(double h, double radius = 1.0, double c = 1.0) {
    const BallDomain ball(Vec{0.0, 0.0}, radius, c);
    return make_ball_grid(ball, h);
}

inline double quartic_harmonic(const Vec& x) {
    const double a = x[0], b = x[1];
    return a * a * a * a - 6.0 * a * a * b * b + b * b * b * b;
}

}  // namespace suites_detail

inline CheckOutcome check_solver_harmonic_order(const std::vector<double>& spacings,
                                                double required_order = 1.9) {
    CheckOutcome out{static_cast<long>(spacings.size()), 0.0};
    std::vector<double> errors;
    for (double h : spacings) {
        GridField f = suites_detail::disc_grid(h);
        fill_from(f, suites_detail::quartic_harmonic, /*boundary_only=*/true);
        const GridField sol = solve_laplace_dirichlet(f);
        double err = 0.0;
        for (std::size_t k = 0; k < sol.size(); ++k)
            if (sol.mask[k] == kInterior)
                err = std::max(err, std::abs(sol.values[k] - suites_detail::quartic_harmonic(
                                                                 sol.node_position(sol.unflat(k)))));
        errors.push_back(err);
    }
    for (std::size_t i = 0; i + 1 < errors.size(); ++i) {
        const double order = std::log2(errors[i] / errors[i + 1]);
        suites_detail::bump(out.max_violation, required_order - order);
    }
    if (out.max_violation < 0.0) out.max_violation = 0.0;
    return out;
}

inline CheckOutcome check_solver_poisson_exact(double h) {
    GridField f = suites_detail::disc_grid(h);
    const auto exact = [](const Vec& x) { return dot(x, x) - 1.0; };
    fill_from(f, exact, /*boundary_only=*/true);
    const GridField sol = solve_poisson_dirichlet(f, [](const Vec&) { return 4.0; });
    CheckOutcome out{1, 0.0};
    for (std::size_t k = 0; k < sol.size(); ++k)
        if (sol.available(k))
            suites_detail::bump(out.max_violation,
                                std::abs(sol.values[k] - exact(sol.node_position(sol.unflat(k)))));
    return out;
}

inline CheckOutcome check_solver_max_principle(std::uint64_t seed, long trials, double h = 1.0 / 16.0) {
    Rng rng(seed);
    CheckOutcome out{trials, 0.0};
    for (long i = 0; i < trials; ++i) {
        const double a = rng.uniform(-1.0, 1.0), b = rng.uniform(-1.0, 1.0),
                     w = rng.uniform(1.0, 3.0);
        GridField f = suites_detail::disc_grid(h);
        fill_from(f, [&](const Vec& x) { return a * std::sin(w * x[0]) + b * x[1]; },
                  /*boundary_only=*/true);
        const GridField sol = solve_laplace_dirichlet(f);
        suites_detail::bump(out.max_violation, -max_principle_slack(sol));
    }
    return out;
}

inline CheckOutcome check_solver_comparison(std::uint64_t seed, long trials, double h = 1.0 / 16.0) {
    Rng rng(seed);
    CheckOutcome out{trials, 0.0};
    for (long i = 0; i < trials; ++i) {
        const double base = rng.uniform(0.5, 2.0), extra = rng.uniform(0.1, 2.0);
        GridField f = suites_detail::disc_grid(h);
        fill_from(f, [&](const Vec& x) { return x[0] - 0.5 * x[1]; }, /*boundary_only=*/true);
        const GridField small = solve_poisson_dirichlet(f, [&](const Vec&) { return base; });
        const GridField large =
            solve_poisson_dirichlet(f, [&](const Vec& x) { return base + extra * (1.1 + std::sin(x[0])); });
        for (std::size_t k = 0; k < small.size(); ++k)
            if (small.available(k))
                suites_detail::bump(out.max_violation, large.values[k] - small.values[k]);
    }
    return out;
}

inline CheckOutcome check_solver_superposition(double h = 1.0 / 32.0) {
    GridField f = suites_detail::disc_grid(h);
    const auto exact = [](const Vec& x) { return dot(x, x) - 1.0 + x[0]; };
    fill_from(f, exact, /*boundary_only=*/true);
    const GridField sol = solve_poisson_dirichlet(f, [](const Vec&) { return 4.0; });
    CheckOutcome out{1, 0.0};
    for (std::size_t k = 0; k < sol.size(); ++k)
        if (sol.available(k))
            suites_detail::bump(out.max_violation,
                                std::abs(sol.values[k] - exact(sol.node_position(sol.unflat(k)))));
    return out;
}

inline CheckOutcome check_homogeneous_rate(double h = 1.0 / 32.0, double c = 2.0) {
    const BallDomain ball(Vec{0.0, 0.0}, 1.0, c);
    GridField f = make_ball_grid(ball, h);
    fill_from(f, [](const Vec& x) { return x[0] * x[0] - x[1] * x[1]; }, /*boundary_only=*/true);
    const GridField H = solve_laplace_dirichlet(f);
    const std::vector<int> ks = {1, 2, 4, 8};
    const std::vector<GridField> vs = homogeneous_approximants(H, ball, ks);
    CheckOutcome out{static_cast<long>(ks.size()), 0.0};
    double reference = 0.0;
    for (std::size_t i = 0; i < vs.size(); ++i) {
        double sup = 0.0;
        for (std::size_t k = 0; k < H.size(); ++k)
            if (H.available(k)) sup = std::max(sup, std::abs(vs[i].values[k] - H.values[k]));
        const double scaled = sup * ks[i];
        if (i == 0)
            reference = scaled;
        else
            suites_detail::bump(out.max_violation, std::abs(scaled / reference - 1.0));
    }
    return out;
}

inline CheckOutcome check_homogeneous_strictness(double h = 1.0 / 32.0, double c = 2.0) {
    const BallDomain ball(Vec{0.0, 0.0}, 1.0, c);
    const FiberSpec fiber = FiberSpec::trace_cone(2);
    GridField f = make_ball_grid(ball, h);
    fill_from(f, [](const Vec& x) { return x[0] * x[0] - x[1] * x[1]; }, /*boundary_only=*/true);
    const GridField H = solve_laplace_dirichlet(f);
    const std::vector<int> ks = {1, 2, 5};
    const std::vector<GridField> vs = homogeneous_approximants(H, ball, ks);
    CheckOutcome out{static_cast<long>(ks.size()), 0.0};
    for (std::size_t i = 0; i < vs.size(); ++i) {
        const StrictnessReport rep = field_strictness(fiber, vs[i], 0.0);
        suites_detail::bump(out.max_violation, c / ks[i] - rep.min_slack);
    }
    if (out.max_violation < 0.0) out.max_violation = 0.0;
    return out;
}

inline InhomogeneousResult bracket_family(double h = 1.0 / 32.0, double c = 2.0) {
    const BallDomain ball(Vec{0.0, 0.0}, 1.0, c);
    GridField f = make_ball_grid(ball, h);
    fill_from(f, [](const Vec& x) { return x[0] * x[0] - x[1] * x[1]; }, /*boundary_only=*/true);
    return inhomogeneous_approximants(f, ball, {0.1, 0.01});
}

inline CheckOutcome check_bracket_bounds(const InhomogeneousResult& fam) {
    CheckOutcome out{static_cast<long>(fam.report.eps.size()), 0.0};
    for (std::size_t i = 0; i < fam.report.eps.size(); ++i)
        suites_detail::bump(out.max_violation, std::max(fam.report.lower_violation[i],
                                                        fam.report.upper_violation[i]));
    return out;
}

inline CheckOutcome check_bracket_decay(const InhomogeneousResult& fam) {
    CheckOutcome out{1, 0.0};
    out.max_violation = std::abs(fam.report.sup_diff[0] / fam.report.sup_diff[1] -
                                 fam.report.eps[0] / fam.report.eps[1]);
    return out;
}

inline CheckOutcome check_bracket_boundary(const InhomogeneousResult& fam) {
    CheckOutcome out{static_cast<long>(fam.v.size()), 0.0};
    for (const GridField& v : fam.v)
        for (std::size_t k = 0; k < v.size(); ++k)
            if (v.mask[k] == kBoundary)
                suites_detail::bump(out.max_violation, std::abs(fam.H.values[k] - v.values[k]));
    return out;
}

inline CheckOutcome check_quasi_uniform_ab(double h = 1.0 / 16.0) {
    const BallDomain ball(Vec{0.0, 0.0}, 1.0, 1.0);
    GridField u = make_ball_grid(ball, h);
    fill_from(u, [](const Vec& x) { return 0.5 * dot(x, x); });
    GridField v = u;
    for (std::size_t k = 0; k < v.size(); ++k)
        if (v.available(k)) v.values[k] += 0.001;
    std::vector<std::uint8_t> core(u.size(), 0);
    for (std::size_t k = 0; k < u.size(); ++k) {
        const Vec x = u.node_position(u.unflat(k));
        if (u.available(k) && dot(x, x) <= 0.25) core[k] = 1;
    }
    const QuasiResult q = quasi_from_uniform(v, u, ball, core, 0.05, 0.1);
    CheckOutcome out{1, 0.0};
    suites_detail::bump(out.max_violation, -q.report.core_gap);
    suites_detail::bump(out.max_violation, -q.report.boundary_gap);
    return out;
}

// Subtracting delta*(rho + s) moves the trace margin by exactly delta*c on a
// quadratic input field.
inline CheckOutcome check_quasi_uniform_strictness(double h = 1.0 / 16.0) {
    const BallDomain ball(Vec{0.0, 0.0}, 1.0, 1.0);
    const FiberSpec fiber = FiberSpec::trace_cone(2);
    GridField u = make_ball_grid(ball, h);
    fill_from(u, [](const Vec& x) { return 0.5 * dot(x, x); });
    std::vector<std::uint8_t> core(u.size(), 0);
    for (std::size_t k = 0; k < u.size(); ++k) {
        const Vec x = u.node_position(u.unflat(k));
        if (u.available(k) && dot(x, x) <= 0.25) core[k] = 1;
    }
    const double delta = 0.05;
    const QuasiResult q = quasi_from_uniform(u, u, ball, core, delta, 0.3);
    const double before = field_strictness(fiber, u, 0.0).min_slack;
    const double after = field_strictness(fiber, q.v, 0.0).min_slack;
    CheckOutcome out{1, std::abs(after - (before - delta * ball.c))};
    return out;
}

inline CheckOutcome check_convolution_exactness(double h = 1.0 / 16.0) {
    GridField f = make_box_grid(Vec{-1.0, -1.0}, h, {33, 33});
    fill_from(f, [](const Vec& x) { return 0.75 + 2.0 * x[0] - x[1]; });
    const GridField g = convolution_smooth(f, 4.0 * h);
    CheckOutcome out{1, 0.0};
    for (std::size_t k = 0; k < g.size(); ++k)
        if (g.mask[k] == kInterior)
            suites_detail::bump(out.max_violation,
                                std::abs(g.values[k] - f.values[k]));
    return out;
}

// Smoothing must not destroy membership: a convex input stays subharmonic
// for the trace cone after convolution.
inline CheckOutcome check_convolution_membership() {
    const double h = 0.025;
    GridField f = make_box_grid(Vec{-1.0}, h, {81});
    fill_from(f, [](const Vec& x) { return std::abs(x[0]); });
    const GridField g = convolution_smooth(f, 0.2);
    const FiberSpec fiber = FiberSpec::trace_cone(1);
    CheckOutcome out{1, 0.0};
    bool any = false;
    for (std::size_t k = 0; k < g.size(); ++k) {
        if (g.mask[k] != kInterior || !g.has_full_stencil(g.unflat(k))) continue;
        any = true;
        const Jet2 jet = finite_difference_jet(g, g.unflat(k), /*reduced=*/true);
        suites_detail::bump(out.max_violation, -margin(fiber, jet));
    }
    if (!any) out.max_violation = 1.0;
    return out;
}

inline CheckOutcome check_quasi_dp_chain(double h = 1.0 / 16.0) {
    const BallDomain ball(Vec{0.0, 0.0}, 1.0, 1.0);
    const FiberSpec fiber = FiberSpec::trace_cone(2);
    GridField u = make_ball_grid(ball, h);
    fill_from(u, [](const Vec& x) { return 0.5 * dot(x, x); });
    std::vector<std::uint8_t> core(u.size(), 0);
    for (std::size_t k = 0; k < u.size(); ++k) {
        const Vec x = u.node_position(u.unflat(k));
        if (u.mask[k] == kInterior && dot(x, x) <= 0.25) core[k] = 1;
    }
    const QuasiResult q = quasi_via_dp(fiber, u, core, ball, 0.5);
    CheckOutcome out{1, 0.0};
    suites_detail::bump(out.max_violation, -q.report.core_gap);
    suites_detail::bump(out.max_violation, -q.report.boundary_gap);
    return out;
}

inline CheckOutcome check_quasi_dp_guard(double h = 1.0 / 16.0) {
    const BallDomain ball(Vec{0.0, 0.0}, 1.0, 1.0);
    const FiberSpec fiber = FiberSpec::trace_cone(2);
    GridField u = make_ball_grid(ball, h);
    fill_from(u, [](const Vec& x) { return x[0]; });
    std::vector<std::uint8_t> core(u.size(), 0);
    for (std::size_t k = 0; k < u.size(); ++k) {
        const Vec x = u.node_position(u.unflat(k));
        if (u.mask[k] == kInterior && dot(x, x) <= 0.25) core[k] = 1;
    }
    CheckOutcome out{1, 1.0};
    try {
        quasi_via_dp(fiber, u, core, ball, 0.5);
    } catch (const std::invalid_argument&) {
        out.max_violation = 0.0;
    }
    return out;
}

// ---------------------------------------------------------------------------
// Gluing checks, run against a compact two-piece segment fixture chosen so
// the glued field is resolvable by second differences at the grid scale.

// Two overlapping segment pieces plus a smaller middle piece whose values
// sit low enough to be pruned everywhere; its omega edge crosses the cores,
// which is what gives the locality check genuine boundary/stability work.
// Radii are node-aligned multiples of h so the staircase terms drop out of
// the (A)/(B) gap arithmetic.
inline GluingProblem suite_glue_fixture(int quadrature_degree = 24) {
    const double h = 1.0 / 32.0;
    GluingProblem pr;
    pr.fiber = FiberSpec::trace_cone(1);
    pr.u = make_box_grid(Vec{-1.25}, h, {81});
    fill_from(pr.u, [](const Vec& x) { return x[0] * x[0]; });
    pr.g = [](const Vec&) { return 0.3; };
    pr.g_prime = [](const Vec&) { return 0.15; };
    pr.allowance = [](const Vec&) { return 2.0; };
    pr.engine = SmoothMaxEngine(quadrature_degree);
    const double c = 1.7;
    pr.pieces.push_back(make_cover_piece("left", BallDomain(Vec{-0.15625}, 0.9375, c), 0.84375,
                                         0.34375, pr.u, pr.fiber, 0.43));
    pr.pieces.push_back(make_cover_piece("mid", BallDomain(Vec{0.0}, 0.625, c), 0.46875, 0.1875,
                                         pr.u, pr.fiber, 0.52));
    pr.pieces.push_back(make_cover_piece("right", BallDomain(Vec{0.15625}, 0.9375, c), 0.84375,
                                         0.34375, pr.u, pr.fiber, 0.43));
    pr.domain = union_of_cores(pr);
    return pr;
}

inline CheckOutcome check_glue_locality(GluingProblem& pr) {
    const LocalityReport rep = check_locality(pr);
    CheckOutcome out{static_cast<long>(rep.boundary_checks + rep.stability_checks), 0.0};
    suites_detail::bump(out.max_violation, rep.boundary_violations > 0 ? 1.0 : 0.0);
    suites_detail::bump(out.max_violation, rep.max_value_shift);
    if (rep.min_prune_slack < 0.0) suites_detail::bump(out.max_violation, -rep.min_prune_slack);
    return out;
}

inline CheckOutcome check_glue_permutation(GluingProblem& pr, const GridField& w) {
    GluingProblem flipped = pr;
    std::reverse(flipped.pieces.begin(), flipped.pieces.end());
    const GridField w2 = glue_field(flipped);
    CheckOutcome out{0, 0.0};
    for (std::size_t k = 0; k < w.size(); ++k)
        if (pr.domain[k]) {
            ++out.trials;
            suites_detail::bump(out.max_violation, std::abs(w.values[k] - w2.values[k]));
        }
    return out;
}

inline CheckOutcome check_glue_monotone(GluingProblem& pr, const GridField& w) {
    GluingProblem raised = pr;
    for (double& v : raised.pieces[1].v.values) v += 0.05;
    const GridField w2 = glue_field(raised);
    CheckOutcome out{0, 0.0};
    for (std::size_t k = 0; k < w.size(); ++k)
        if (pr.domain[k]) {
            ++out.trials;
            suites_detail::bump(out.max_violation, w.values[k] - w2.values[k]);
        }
    return out;
}

inline CheckOutcome check_glue_sandwich_margins(GluingProblem& pr, const GlueOutcome& out_glue) {
    CheckOutcome out{static_cast<long>(out_glue.sandwich.nodes), 0.0};
    suites_detail::bump(out.max_violation, -out_glue.sandwich.min_lower_gap);
    suites_detail::bump(out.max_violation, -out_glue.sandwich.min_upper_gap);
    suites_detail::bump(out.max_violation,
                        -(out_glue.margins.min_slack + out_glue.margins.tolerance));
    (void)pr;
    return out;
}

inline CheckOutcome check_glue_jet_consistency(GluingProblem& pr, const GridField& w) {
    CheckOutcome out{0, 0.0};
    for (std::size_t k = 0; k < w.size(); ++k) {
        if (!pr.domain[k]) continue;
        const auto idx = w.unflat(k);
        if (!w.has_full_stencil(idx)) continue;
        bool neighbors_covered = true;
        for (std::size_t d = 0; d < idx.size() && neighbors_covered; ++d)
            for (int step = -1; step <= 1 && neighbors_covered; step += 2) {
                auto nb = idx;
                nb[d] += step;
                if (!pr.domain[w.flat(nb)]) neighbors_covered = false;
            }
        if (!neighbors_covered) continue;
        ++out.trials;
        const Jet2 composed = glue_jet(pr, idx);
        const Jet2 fd = finite_difference_jet(w, idx);
        suites_detail::bump(out.max_violation, std::abs(composed.r - fd.r));
        for (std::size_t d = 0; d < idx.size(); ++d)
            suites_detail::bump(out.max_violation, std::abs(composed.p[d] - fd.p[d]));
        for (int a = 0; a < composed.A.n(); ++a)
            for (int b = 0; b < composed.A.n(); ++b)
                suites_detail::bump(out.max_violation, std::abs(composed.A(a, b) - fd.A(a, b)));
    }
    return out;
}

inline CheckOutcome check_glue_epsilon_rule(const EpsilonReport& eps) {
    CheckOutcome out{static_cast<long>(eps.entries.size()), 0.0};
    for (const EpsilonEntry& e : eps.entries) {
        const double expected =
            0.5 * std::min(e.core_gap, std::min(e.boundary_gap, e.budget_gap));
        suites_detail::bump(out.max_violation, std::abs(e.eps - expected));
    }
    return out;
}

inline CheckOutcome check_glue_condition_c(int quadrature_degree = 24) {
    CheckOutcome out{2, 0.0};
    GluingProblem good = suite_glue_fixture(quadrature_degree);
    if (!check_condition_c(good).pass) suites_detail::bump(out.max_violation, 1.0);
    GluingProblem bad = suite_glue_fixture(quadrature_degree);
    bad.allowance = [](const Vec&) { return 0.1; };
    const ConditionCReport rep = check_condition_c(bad);
    if (rep.pass) suites_detail::bump(out.max_violation, 1.0);
    bool named = false;
    for (const ConditionCEntry& e : rep.entries)
        if (!e.ok && !e.piece.empty()) named = true;
    if (!named) suites_detail::bump(out.max_violation, 1.0);
    return out;
}

inline CheckOutcome check_glue_active_crosscheck(GluingProblem& pr) {
    CheckOutcome out{0, 0.0};
    for (std::size_t k = 0; k < pr.u.size(); ++k) {
        if (!pr.domain[k]) continue;
        ++out.trials;
        const std::vector<int> cand = candidate_pieces(pr, k);
        // independent iterated pruning over the candidate values
        std::vector<int> keep = cand;
        bool changed = true;
        while (changed && keep.size() > 1) {
            changed = false;
            for (std::size_t j = 0; j < keep.size(); ++j) {
                double other = -std::numeric_limits<double>::infinity();
                for (std::size_t i = 0; i < keep.size(); ++i)
                    if (i != j)
                        other = std::max(other, pr.pieces[keep[i]].v.values[k] -
                                                    pr.pieces[keep[i]].eps);
                if (pr.pieces[keep[j]].v.values[k] + pr.pieces[keep[j]].eps <= other) {
                    keep.erase(keep.begin() + static_cast<std::ptrdiff_t>(j));
                    changed = true;
                    break;
                }
            }
        }
        if (keep != active_pieces(pr, k)) suites_detail::bump(out.max_violation, 1.0);
        // value through the reduced list must match the full glue value
        Vec t, e;
        for (int a : keep) {
            t.push_back(pr.pieces[a].v.values[k]);
            e.push_back(pr.pieces[a].eps);
        }
        suites_detail::bump(out.max_violation,
                            std::abs(pr.engine.smooth_max(t, e) - glue_value(pr, k)));
    }
    return out;
}

inline CheckOutcome check_glue_cover_guard(GluingProblem& pr) {
    CheckOutcome out{1, 1.0};
    std::size_t outside = pr.u.size();
    for (std::size_t k = 0; k < pr.u.size(); ++k)
        if (candidate_pieces(pr, k).empty()) {
            outside = k;
            break;
        }
    if (outside == pr.u.size()) return out;
    try {
        glue_value(pr, outside);
    } catch (const std::invalid_argument&) {
        out.max_violation = 0.0;
    } catch (const std::runtime_error&) {
        out.max_violation = 0.0;
    }
    return out;
}

// ---------------------------------------------------------------------------
// Suite assembly.

namespace suites_detail {

inline void add_row(std::vector<SuiteRow>& rows, const std::string& module,
                    const std::string& property, const CheckOutcome& outcome, double tolerance,
                    double tol_scale) {
    SuiteRow row;
    row.module = module;
    row.property = property;
    row.trials = outcome.trials;
    row.max_violation = outcome.max_violation;
    row.tolerance = tolerance * tol_scale;
    row.pass = outcome.max_violation <= row.tolerance;
    rows.push_back(std::move(row));
}

inline void smoothmax_rows(std::vector<SuiteRow>& rows, const SuiteOptions& opt) {
    const SmoothMaxEngine engine(opt.quadrature_degree);
    const std::uint64_t s = opt.seed;
    const double k = opt.tol_scale;
    add_row(rows, "jets", "quadratic-fd-agreement", check_jets_quadratic_fd(s + 1, 200), 1e-10, k);
    add_row(rows, "jets", "combination-permutation",
            check_jets_combination_permutation(s + 2, 400), 1e-13, k);
    add_row(rows, "jets", "translation-composition",
            check_jets_translation_composition(s + 3, 400), 1e-14, k);
    add_row(rows, "smoothmax", "monotonicity", check_smoothmax_monotonicity(engine, s + 4, 300),
            1e-9, k);
    add_row(rows, "smoothmax", "translation-equivariance",
            check_smoothmax_translation(engine, s + 5, 300), 1e-8, k);
    add_row(rows, "smoothmax", "sandwich", check_smoothmax_sandwich(engine, s + 6, 300), 1e-8, k);
    add_row(rows, "smoothmax", "permutation-invariance",
            check_smoothmax_permutation(engine, s + 7, 300), 1e-10, k);
    add_row(rows, "smoothmax", "midpoint-convexity", check_smoothmax_convexity(engine, s + 8, 300),
            1e-8, k);
    add_row(rows, "smoothmax", "gradient-simplex",
            check_smoothmax_gradient_simplex(engine, s + 9, 200), 1e-7, k);
    add_row(rows, "smoothmax", "hessian-psd", check_smoothmax_hessian_psd(engine, s + 10, 200),
            1e-7, k);
    add_row(rows, "smoothmax", "hessian-row-sums",
            check_smoothmax_hessian_rowsum(engine, s + 11, 200), 1e-6, k);
    add_row(rows, "smoothmax", "error-bound", check_smoothmax_error_bound(engine, s + 12, 300),
            1e-7, k);
    add_row(rows, "smoothmax", "pruning-invariance",
            check_smoothmax_pruning(engine, s + 13, 300), 1e-12, k);
    // max z-score over 10 inputs; 4 sigma keeps the false-alarm rate of a
    // user-chosen seed below 1e-3
    add_row(rows, "smoothmax", "mc-oracle-agreement",
            check_smoothmax_mc_agreement(engine, s + 14, 10, 200000), 4.0, k);
}

inline void fibers_rows(std::vector<SuiteRow>& rows, const SuiteOptions& opt) {
    const SmoothMaxEngine engine(opt.quadrature_degree);
    const std::uint64_t s = opt.seed;
    const double k = opt.tol_scale;
    add_row(rows, "subequations", "margin-lipschitz", check_fibers_margin_lipschitz(s + 20, 500),
            1e-9, k);
    add_row(rows, "subequations", "composition-margin-chain",
            check_fibers_composition_chain(engine, s + 21, 100), 1e-8, k);
    add_row(rows, "subequations", "psd-margin-eigenvalue", check_fibers_psd_eigen(s + 22, 500),
            1e-9, k);
    add_row(rows, "subequations", "grassmannian-psd-bound",
            check_fibers_grassmannian_bound(s + 23, 300), 1e-9, k);
    add_row(rows, "subequations", "axioms", check_fibers_axioms(s + 24, 200), 1e-9, k);
    add_row(rows, "subequations", "negativity-cap", check_fibers_negativity_cap(s + 25, 300),
            1e-12, k);
    add_row(rows, "subequations", "shrink-nesting", check_fibers_shrink_nesting(s + 26, 300), 0.0,
            k);
    add_row(rows, "subequations", "trace-distance-bruteforce",
            check_fibers_trace_distance(s + 27, 40), 1e-3, k);
}

inline void solvers_rows(std::vector<SuiteRow>& rows, const SuiteOptions& opt) {
    const std::uint64_t s = opt.seed;
    const double k = opt.tol_scale;
    add_row(rows, "localapprox", "harmonic-order",
            check_solver_harmonic_order({1.0 / 8.0, 1.0 / 16.0, 1.0 / 32.0}), 0.0, k);
    add_row(rows, "localapprox", "poisson-exact", check_solver_poisson_exact(1.0 / 32.0), 1e-8, k);
    add_row(rows, "localapprox", "maximum-principle", check_solver_max_principle(s + 30, 3), 1e-9,
            k);
    add_row(rows, "localapprox", "poisson-comparison", check_solver_comparison(s + 31, 3), 1e-9,
            k);
    add_row(rows, "localapprox", "poisson-superposition", check_solver_superposition(), 1e-8, k);
    add_row(rows, "localapprox", "approximant-rate", check_homogeneous_rate(), 0.01, k);
    add_row(rows, "localapprox", "approximant-strictness", check_homogeneous_strictness(),
            fd_allowance(1.0 / 32.0), k);
    const InhomogeneousResult fam = bracket_family();
    add_row(rows, "localapprox", "bracket", check_bracket_bounds(fam), fam.report.tolerance, k);
    add_row(rows, "localapprox", "bracket-decay", check_bracket_decay(fam), 1e-3, k);
    add_row(rows, "localapprox", "bracket-boundary", check_bracket_boundary(fam), 1e-9, k);
    add_row(rows, "localapprox", "quasi-uniform-ab", check_quasi_uniform_ab(), 0.0, k);
    add_row(rows, "localapprox", "quasi-uniform-strictness", check_quasi_uniform_strictness(),
            1e-9, k);
    add_row(rows, "localapprox", "convolution-exactness", check_convolution_exactness(), 1e-10, k);
    add_row(rows, "localapprox", "convolution-membership", check_convolution_membership(), 1e-9,
            k);
    add_row(rows, "localapprox", "quasi-dp-chain", check_quasi_dp_chain(), 0.0, k);
    add_row(rows, "localapprox", "quasi-dp-guard", check_quasi_dp_guard(), 0.5, k);
}

inline void gluing_rows(std::vector<SuiteRow>& rows, const SuiteOptions& opt) {
    const double k = opt.tol_scale;
    GluingProblem pr = suite_glue_fixture(opt.quadrature_degree);
    GlueOutcome out = run_gluing(pr);
    add_row(rows, "gluing", "locality", check_glue_locality(pr), 1e-12, k);
    add_row(rows, "gluing", "permutation-safety", check_glue_permutation(pr, out.w), 1e-12, k);
    add_row(rows, "gluing", "monotone-dependence", check_glue_monotone(pr, out.w), 1e-12, k);
    add_row(rows, "gluing", "sandwich-and-margins", check_glue_sandwich_margins(pr, out), 0.0, k);
    const double h = pr.u.spacing;
    add_row(rows, "gluing", "jet-consistency", check_glue_jet_consistency(pr, out.w), 5.0 * h * h,
            k);
    add_row(rows, "gluing", "epsilon-half-rule", check_glue_epsilon_rule(out.epsilons), 1e-15, k);
    add_row(rows, "gluing", "condition-c-report", check_glue_condition_c(opt.quadrature_degree),
            0.5, k);
    add_row(rows, "gluing", "active-set-crosscheck", check_glue_active_crosscheck(pr), 1e-12, k);
    add_row(rows, "gluing", "cover-guard", check_glue_cover_guard(pr), 0.5, k);
}

}  // namespace suites_detail

inline std::string suite_csv(const std::vector<SuiteRow>& rows) {
    std::string out = "module,property,trials,max_violation,tolerance,pass\n";
    for (const SuiteRow& r : rows) {
        out += r.module + "," + r.property + "," + std::to_string(r.trials) + "," +
               format_double(r.max_violation) + "," + format_double(r.tolerance) + "," +
               (r.pass ? "true" : "false") + "\n";
    }
    return out;
}

inline std::vector<SuiteRow> run_property_suite(const std::string& name, const SuiteOptions& opt) {
    std::vector<SuiteRow> rows;
    if (name == "smoothmax") {
        suites_detail::smoothmax_rows(rows, opt);
    } else if (name == "fibers") {
        suites_detail::fibers_rows(rows, opt);
    } else if (name == "solvers") {
        suites_detail::solvers_rows(rows, opt);
    } else if (name == "gluing") {
        suites_detail::gluing_rows(rows, opt);
    } else if (name == "all") {
        suites_detail::smoothmax_rows(rows, opt);
        suites_detail::fibers_rows(rows, opt);
        suites_detail::solvers_rows(rows, opt);
        suites_detail::gluing_rows(rows, opt);
        // rerun a randomized suite with the same seed: rows must be identical
        std::vector<SuiteRow> once, twice;
        suites_detail::fibers_rows(once, opt);
        suites_detail::fibers_rows(twice, opt);
        CheckOutcome determinism{static_cast<long>(once.size()),
                                 suite_csv(once) == suite_csv(twice) ? 0.0 : 1.0};
        suites_detail::add_row(rows, "cli", "determinism", determinism, 0.5, 1.0);
        // audit: every module's invariant block is represented
        const std::vector<std::pair<std::string, std::size_t>> wanted = {
            {"jets", 3},        {"smoothmax", 10}, {"subequations", 4},
            {"localapprox", 6}, {"gluing", 4},
        };
        CheckOutcome audit{static_cast<long>(rows.size()), 0.0};
        for (const auto& [module, minimum] : wanted) {
            std::size_t got = 0;
            for (const SuiteRow& r : rows)
                if (r.module == module) ++got;
            if (got < minimum) audit.max_violation += 1.0;
        }
        suites_detail::add_row(rows, "cli", "coverage-audit", audit, 0.5, 1.0);
    } else {
        throw std::invalid_argument("unknown suite '" + name +
                                    "' (expected smoothmax, fibers, solvers, gluing or all)");
    }
    return rows;
}

}  // namespace richberg
