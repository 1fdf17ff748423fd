#pragma once

#include <functional>
#include <optional>

#include "richberg/grid.hpp"

namespace richberg {

/// Finite list of p-planes in R^n, each given by p orthonormal columns.
/// Stands in for a closed subset of the Grassmannian; margins over the list
/// are exact for the polyhedral cone the list generates.
struct PlaneList {
    int n = 0;
    int p = 0;
    std::vector<std::vector<Vec>> planes;  // planes[k][j] = j-th basis vector

    PlaneList() = default;
    PlaneList(int n_, int p_, std::vector<std::vector<Vec>> planes_)
        : n(n_), p(p_), planes(std::move(planes_)) {
        if (n < 1 || p < 1 || p > n) throw std::invalid_argument("PlaneList: need 1 <= p <= n");
        if (planes.empty()) throw std::invalid_argument("PlaneList: need at least one plane");
        for (const auto& pl : planes) {
            if (static_cast<int>(pl.size()) != p) throw std::invalid_argument("PlaneList: rank mismatch");
            for (int i = 0; i < p; ++i) {
                if (static_cast<int>(pl[i].size()) != n)
                    throw std::invalid_argument("PlaneList: vector dimension mismatch");
                for (int j = 0; j <= i; ++j) {
                    const double want = (i == j) ? 1.0 : 0.0;
                    if (std::abs(dot(pl[i], pl[j]) - want) > 1e-10)
                        throw std::invalid_argument("PlaneList: basis not orthonormal");
                }
            }
        }
    }

    /// Coordinate axis planes (the p = 1 list {e_1, ..., e_n}).
    static PlaneList axes(int n) {
        std::vector<std::vector<Vec>> pls;
        for (int i = 0; i < n; ++i) {
            Vec e(n, 0.0);
            e[i] = 1.0;
            pls.push_back({e});
        }
        return PlaneList(n, 1, std::move(pls));
    }
};

enum class FiberKind { trace_cone, psd_cone, halfspace, grassmannian, fn_cone };

inline const char* fiber_kind_name(FiberKind k) {
    switch (k) {
        case FiberKind::trace_cone: return "trace-cone";
        case FiberKind::psd_cone: return "psd-cone";
        case FiberKind::halfspace: return "halfspace";
        case FiberKind::grassmannian: return "grassmannian";
        case FiberKind::fn_cone: return "fn-cone";
    }
    return "?";
}

/// One constant-coefficient fiber from the catalog. All convex kinds have
/// margins that are the exact distance to the fiber complement under the
/// jet norm max(|r|, |p|_2, |A|_op). `with_negativity` adds the constraint
/// -r >= 0 (margin becomes min(base margin, -r)); without it the fiber is
/// reduced and ignores r entirely. fn-cone (some eigenvalue >= 0) is the
/// non-convex catalog entry: membership only, no margin.
struct FiberSpec {
    FiberKind kind = FiberKind::trace_cone;
    int dim = 0;
    bool with_negativity = false;
    SymMat normal;              // halfspace
    double offset = 0.0;        // halfspace: <N, A> >= offset
    double dual_factor = 1.0;   // halfspace: nuclear norm of the normal
    PlaneList plane_list;       // grassmannian

    static FiberSpec trace_cone(int n) { return basic(FiberKind::trace_cone, n); }
    static FiberSpec psd_cone(int n) { return basic(FiberKind::psd_cone, n); }
    static FiberSpec fn_cone(int n) { return basic(FiberKind::fn_cone, n); }

    static FiberSpec halfspace(const SymMat& n_mat, double offset = 0.0) {
        FiberSpec f = basic(FiberKind::halfspace, n_mat.n());
        if (lambda_min(n_mat) < -1e-10)
            throw std::invalid_argument("FiberSpec: halfspace normal must be positive semidefinite");
        f.normal = n_mat;
        f.offset = offset;
        f.dual_factor = nuclear_norm(n_mat);
        if (f.dual_factor < 1e-12) throw std::invalid_argument("FiberSpec: zero halfspace normal");
        return f;
    }

    static FiberSpec grassmannian(PlaneList planes) {
        FiberSpec f = basic(FiberKind::grassmannian, planes.n);
        f.plane_list = std::move(planes);
        return f;
    }

    FiberSpec shifted() const {
        FiberSpec f = *this;
        f.with_negativity = true;
        return f;
    }

    bool reduced() const { return !with_negativity; }
    bool convex() const { return kind != FiberKind::fn_cone; }

  private:
    static FiberSpec basic(FiberKind k, int n) {
        if (n < 1) throw std::invalid_argument("FiberSpec: dimension must be >= 1");
        FiberSpec f;
        f.kind = k;
        f.dim = n;
        return f;
    }
};

/// Signed distance of the jet to the fiber complement (positive inside).
/// Concave, 1-Lipschitz in the jet norm, and positively homogeneous for the
/// cone kinds. Errors on the non-convex fn-cone.
inline double margin(const FiberSpec& fiber, const Jet2& jet) {
    if (jet.dim() != fiber.dim) throw std::invalid_argument("margin: dimension mismatch");
    if (!fiber.convex()) throw std::invalid_argument("margin: fn-cone is non-convex, margin undefined");
    double base = 0.0;
    switch (fiber.kind) {
        case FiberKind::trace_cone:
            base = jet.A.trace() / fiber.dim;
            break;
        case FiberKind::psd_cone:
            base = lambda_min(jet.A);
            break;
        case FiberKind::halfspace:
            base = (fiber.normal.inner(jet.A) - fiber.offset) / fiber.dual_factor;
            break;
        case FiberKind::grassmannian: {
            base = std::numeric_limits<double>::infinity();
            for (const auto& plane : fiber.plane_list.planes) {
                double tr = 0.0;
                for (const Vec& v : plane) tr += jet.A.quad_form(v);
                base = std::min(base, tr / fiber.plane_list.p);
            }
            break;
        }
        case FiberKind::fn_cone:
            break;  // unreachable
    }
    return fiber.with_negativity ? std::min(base, -jet.r) : base;
}

inline bool is_member(const FiberSpec& fiber, const Jet2& jet) {
    if (jet.dim() != fiber.dim) throw std::invalid_argument("is_member: dimension mismatch");
    if (fiber.kind == FiberKind::fn_cone) {
        const bool base = lambda_max(jet.A) >= 0.0;
        return fiber.with_negativity ? (base && -jet.r >= 0.0) : base;
    }
    return margin(fiber, jet) >= 0.0;
}

inline bool is_strict(const FiberSpec& fiber, const Jet2& jet, double g) {
    if (g < 0.0) throw std::invalid_argument("is_strict: strictness level must be >= 0");
    return margin(fiber, jet) >= g;
}

/// The fiber shrunk by margin g: membership means margin(base, jet) >= g.
/// Nested: shrink(g2) is contained in shrink(g1) whenever g1 <= g2.
struct ShrunkFiber {
    FiberSpec base;
    double g = 0.0;

    ShrunkFiber(FiberSpec base_, double g_) : base(std::move(base_)), g(g_) {
        if (g < 0.0) throw std::invalid_argument("shrink: margin must be >= 0");
        if (!base.convex()) throw std::invalid_argument("shrink: fn-cone has no margin");
    }

    bool is_member(const Jet2& jet) const { return margin(base, jet) >= g; }
};

inline ShrunkFiber shrink(const FiberSpec& fiber, double g) { return ShrunkFiber(fiber, g); }

// ---------------------------------------------------------------------------

struct AxiomCheck {
    std::string axiom;
    int trials = 0;
    int failures = 0;
    double max_violation = 0.0;
};

struct FiberAxiomReport {
    std::string kind;
    std::vector<AxiomCheck> checks;
    bool pass = true;
};

namespace detail {

inline SymMat random_sym(Rng& rng, int n, double scale = 1.0) {
    SymMat a(n);
    for (int i = 0; i < n; ++i)
        for (int j = i; j < n; ++j) a.set(i, j, scale * rng.normal());
    return a;
}

inline SymMat random_psd(Rng& rng, int n, double scale = 1.0) {
    SymMat g = random_sym(rng, n, scale);
    SymMat out(n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            double s = 0.0;
            for (int k = 0; k < n; ++k) s += g(i, k) * g(j, k);
            out.set(i, j, s / n);
        }
    return out;
}

/// Random fiber member with margin >= want. Every convex catalog kind obeys
/// margin(A + cI) = margin(A) + c (unit-trace normalization), which makes
/// targeted members easy to construct.
inline Jet2 random_member(Rng& rng, const FiberSpec& fiber, double want) {
    const int n = fiber.dim;
    Jet2 j(rng.normal(), Vec(n), SymMat(n));
    for (int i = 0; i < n; ++i) j.p[i] = rng.normal();
    j.A = random_sym(rng, n);
    if (fiber.with_negativity) j.r = -want - rng.uniform(0.0, 1.0);
    const double base = margin(fiber, Jet2(std::min(j.r, -want), j.p, j.A));
    const double lift = want - base + rng.uniform(0.0, 0.5);
    if (lift > 0.0) j.A.axpy(lift, SymMat::identity(n));
    return j;
}

}  // namespace detail

/// Randomized validation of the closure axioms a usable fiber must satisfy:
/// stability under positive jet moves, monotone margin, midpoint concavity,
/// and positive homogeneity (cones only).
inline FiberAxiomReport check_fiber_axioms(const FiberSpec& fiber, int samples,
                                           std::uint64_t seed) {
    if (samples < 1) throw std::invalid_argument("check_fiber_axioms: need samples >= 1");
    if (!fiber.convex())
        throw std::invalid_argument("check_fiber_axioms: fn-cone margins are undefined");
    Rng rng(seed);
    FiberAxiomReport rep;
    rep.kind = fiber_kind_name(fiber.kind);
    AxiomCheck positivity{"positivity", samples, 0, 0.0};
    AxiomCheck negativity{"negativity", samples, 0, 0.0};
    AxiomCheck concavity{"concavity", samples, 0, 0.0};
    const bool cone = !(fiber.kind == FiberKind::halfspace && fiber.offset != 0.0);
    AxiomCheck homogeneity{"homogeneity", cone ? samples : 0, 0, 0.0};

    for (int s = 0; s < samples; ++s) {
        const Jet2 j = detail::random_member(rng, fiber, rng.uniform(0.0, 1.0));
        const double m0 = margin(fiber, j);

        const Jet2 up = translate_positive(j, -rng.uniform(0.0, 1.0),
                                           detail::random_psd(rng, fiber.dim));
        const double viol_p = m0 - margin(fiber, up);
        positivity.max_violation = std::max(positivity.max_violation, viol_p);
        if (viol_p > 1e-9 || !is_member(fiber, up)) ++positivity.failures;

        Jet2 down = j;
        down.r -= rng.uniform(0.0, 2.0);
        const double viol_n = m0 - margin(fiber, down);
        negativity.max_violation = std::max(negativity.max_violation, viol_n);
        if (viol_n > 1e-9 || !is_member(fiber, down)) ++negativity.failures;

        const Jet2 j2 = detail::random_member(rng, fiber, rng.uniform(0.0, 1.0));
        const Jet2 mid = convex_combination({0.5, 0.5}, {j, j2});
        const double viol_c = 0.5 * (m0 + margin(fiber, j2)) - margin(fiber, mid);
        concavity.max_violation = std::max(concavity.max_violation, viol_c);
        if (viol_c > 1e-9) ++concavity.failures;

        if (cone) {
            const double lam = rng.uniform(0.1, 5.0);
            const double viol_h =
                std::abs(margin(fiber, jet_scale(lam, j)) - lam * m0) / std::max(1.0, lam);
            homogeneity.max_violation = std::max(homogeneity.max_violation, viol_h);
            if (viol_h > 1e-9) ++homogeneity.failures;
        }
    }
    rep.checks = {positivity, negativity, concavity, homogeneity};
    for (const auto& c : rep.checks) rep.pass = rep.pass && c.failures == 0;
    return rep;
}

// ---------------------------------------------------------------------------

struct StrictnessReport {
    double min_slack = std::numeric_limits<double>::infinity();
    std::vector<int> worst_index;
    std::size_t nodes_checked = 0;
    bool strict = false;
    double tolerance = 0.0;
};

/// Default finite-difference allowance added to strictness tolerances: jets
/// from second-order stencils are exact on quadratics but carry O(h^2)
/// truncation on general smooth fields.
inline double fd_allowance(double h) { return 1e-6 + 25.0 * h * h; }

/// Minimum of margin(J^2 field) - g over all nodes with a full stencil.
/// `strict` holds when that minimum clears -tolerance.
inline StrictnessReport field_strictness(const FiberSpec& fiber, const GridField& field,
                                         const std::function<double(const Vec&)>& g,
                                         std::optional<double> tolerance = std::nullopt) {
    if (field.dim() != fiber.dim) throw std::invalid_argument("field_strictness: dimension mismatch");
    StrictnessReport rep;
    rep.tolerance = tolerance.value_or(fd_allowance(field.spacing));
    for (std::size_t f = 0; f < field.size(); ++f) {
        const auto idx = field.unflat(f);
        if (!field.has_full_stencil(idx)) continue;
        const Jet2 jet = finite_difference_jet(field, idx);
        const double slack = margin(fiber, jet) - g(field.node_position(idx));
        ++rep.nodes_checked;
        if (slack < rep.min_slack) {
            rep.min_slack = slack;
            rep.worst_index = idx;
        }
    }
    if (rep.nodes_checked == 0) throw std::invalid_argument("field_strictness: no full-stencil nodes");
    rep.strict = rep.min_slack >= -rep.tolerance;
    return rep;
}

inline StrictnessReport field_strictness(const FiberSpec& fiber, const GridField& field,
                                         double g,
                                         std::optional<double> tolerance = std::nullopt) {
    return field_strictness(fiber, field, [g](const Vec&) { return g; }, tolerance);
}

}  // namespace richberg
