#pragma once

#include "richberg/localapprox.hpp"
#include "richberg/smoothmax.hpp"

namespace richberg {

/// One member of an open cover: concentric core K, working ball Omega and
/// outer ball Omega' around a shared center, all living on the same lattice
/// as the global field. The approximant v carries the outer-ball mask; the
/// K / Omega / boundary-of-Omega node sets are flat flag vectors.
struct CoverPiece {
    std::string name;
    BallDomain outer;
    double omega_radius = 0.0;
    double core_radius = 0.0;
    GridField v;
    std::vector<std::uint8_t> core, omega_interior, omega_boundary;
    double eps = 0.0;            // selected gluing half-width
    int k = 0;                   // approximant index picked by the solver route
    double s = 0.0;              // core clearance of the solve
    double strictness = 0.0;     // measured min margin of v over its ball
    double max_principle = 0.0;  // slack of the harmonic majorant
};

namespace detail {

inline bool box_touches(const GridField& g, const std::vector<std::uint8_t>& flags,
                        const std::vector<int>& idx) {
    const int n = g.dim();
    std::vector<int> off(n, -1), nb(n);
    for (;;) {
        bool inside = true;
        for (int d = 0; d < n; ++d) {
            nb[d] = idx[d] + off[d];
            inside = inside && nb[d] >= 0 && nb[d] < g.extents[d];
        }
        if (inside && flags[g.flat(nb)]) return true;
        int d = 0;
        while (d < n && ++off[d] > 1) off[d++] = -1;
        if (d == n) return false;
    }
}

}  // namespace detail

/// Builds a cover piece over `u`: masks the outer ball, runs the Dirichlet
/// solver route to a quasi approximant over the piece core, and records the
/// measured strictness. `value_shift` moves v rigidly afterwards (a fault
/// injection knob for the negative-control scenarios).
inline CoverPiece make_cover_piece(std::string name, const BallDomain& outer, double omega_radius,
                                   double core_radius, const GridField& u, const FiberSpec& fiber,
                                   double quasi_eps, double value_shift = 0.0) {
    if (!(0.0 < core_radius && core_radius < omega_radius && omega_radius < outer.radius))
        throw std::invalid_argument("make_cover_piece: need 0 < core < omega < outer radius");
    const double h = u.spacing;
    for (int d = 0; d < u.dim(); ++d) {
        const double lo = u.origin[d], hi = u.origin[d] + (u.extents[d] - 1) * h;
        if (outer.center[d] - outer.radius < lo + h || outer.center[d] + outer.radius > hi - h)
            throw std::invalid_argument("make_cover_piece: outer ball of piece '" + name +
                                        "' does not fit inside the shared grid");
    }

    CoverPiece piece;
    piece.name = std::move(name);
    piece.outer = outer;
    piece.omega_radius = omega_radius;
    piece.core_radius = core_radius;
    piece.v = u;
    apply_ball_mask(piece.v, outer);

    const std::size_t total = u.size();
    piece.core.assign(total, 0);
    piece.omega_interior.assign(total, 0);
    piece.omega_boundary.assign(total, 0);
    const double omega_cut = omega_radius - 0.5 * h;
    for (std::size_t f = 0; f < total; ++f) {
        const Vec x = u.node_position(u.unflat(f));
        double r2 = 0.0;
        for (int d = 0; d < u.dim(); ++d)
            r2 += (x[d] - outer.center[d]) * (x[d] - outer.center[d]);
        piece.core[f] = r2 <= core_radius * core_radius + 1e-12;
        piece.omega_interior[f] = r2 < omega_cut * omega_cut;
    }
    for (std::size_t f = 0; f < total; ++f) {
        if (piece.omega_interior[f]) continue;
        if (detail::box_touches(u, piece.omega_interior, u.unflat(f))) piece.omega_boundary[f] = 1;
    }

    GridField u_ball = u;
    u_ball.mask = piece.v.mask;
    QuasiResult q = quasi_via_dp(fiber, u_ball, piece.core, outer, quasi_eps);
    piece.v.values = q.v.values;
    piece.k = q.k;
    piece.s = q.s;
    piece.max_principle = max_principle_slack(q.H);
    if (value_shift != 0.0)
        for (std::size_t f = 0; f < total; ++f)
            if (piece.v.available(f)) piece.v.values[f] += value_shift;
    piece.strictness = field_strictness(fiber, piece.v, 0.0).min_slack;
    return piece;
}

/// Gluing problem: global strict subsolution u, the node set to certify, the
/// strictness budget pair g > g', the approximation allowance, and the cover.
struct GluingProblem {
    FiberSpec fiber;
    GridField u;
    std::vector<std::uint8_t> domain;
    std::function<double(const Vec&)> g, g_prime, allowance;
    std::vector<CoverPiece> pieces;
    SmoothMaxEngine engine;
};

inline std::vector<std::uint8_t> union_of_cores(const GluingProblem& pr) {
    std::vector<std::uint8_t> out(pr.u.size(), 0);
    for (const CoverPiece& piece : pr.pieces)
        for (std::size_t f = 0; f < out.size(); ++f) out[f] = out[f] || piece.core[f];
    return out;
}

// ---------------------------------------------------------------------------
// Structural checks.

struct CoverReport {
    std::vector<std::string> problems;
    bool pass = true;
};

/// Static sanity of the cover: shared geometry, K inside Omega, the closed
/// Omega (plus one stencil layer) inside the outer ball, and every domain
/// node inside some core.
inline CoverReport check_cover(const GluingProblem& pr) {
    CoverReport rep;
    auto fail = [&rep](std::string msg) {
        rep.problems.push_back(std::move(msg));
        rep.pass = false;
    };
    if (pr.pieces.empty()) fail("cover has no pieces");
    if (pr.domain.size() != pr.u.size()) fail("domain flags do not match the grid");
    for (const CoverPiece& piece : pr.pieces) {
        if (piece.v.size() != pr.u.size() || piece.v.spacing != pr.u.spacing ||
            piece.v.origin != pr.u.origin || piece.v.extents != pr.u.extents) {
            fail("piece '" + piece.name + "' is not on the shared lattice");
            continue;
        }
        bool core_ok = true, stencil_ok = true, core_nonempty = false;
        for (std::size_t f = 0; f < pr.u.size(); ++f) {
            if (piece.core[f]) {
                core_nonempty = true;
                core_ok = core_ok && piece.omega_interior[f];
            }
            if (piece.omega_interior[f] || piece.omega_boundary[f])
                stencil_ok = stencil_ok && piece.v.mask[f] == kInterior &&
                             piece.v.has_full_stencil(pr.u.unflat(f));
        }
        if (!core_nonempty) fail("piece '" + piece.name + "' has an empty core");
        if (!core_ok) fail("piece '" + piece.name + "': core not inside omega");
        if (!stencil_ok)
            fail("piece '" + piece.name + "': closed omega leaves the outer-ball stencil region");
    }
    std::size_t uncovered = 0;
    for (std::size_t f = 0; f < pr.u.size(); ++f) {
        if (!pr.domain[f]) continue;
        bool covered = false;
        for (const CoverPiece& piece : pr.pieces) covered = covered || piece.core[f];
        if (!covered) ++uncovered;
    }
    if (uncovered) fail(std::to_string(uncovered) + " domain nodes lie outside every core");
    return rep;
}

struct ConditionCEntry {
    std::string piece;
    double oscillation = 0.0;
    double min_allowance = 0.0;
    bool ok = false;
};

struct ConditionCReport {
    std::vector<ConditionCEntry> entries;
    bool pass = true;
};

/// Per piece: the oscillation of u over the closed omega must stay below the
/// allowance there, otherwise no gluing width can keep the result under
/// u + allowance.
inline ConditionCReport check_condition_c(const GluingProblem& pr) {
    ConditionCReport rep;
    for (const CoverPiece& piece : pr.pieces) {
        ConditionCEntry e;
        e.piece = piece.name;
        double umin = std::numeric_limits<double>::infinity(), umax = -umin;
        e.min_allowance = umin;
        for (std::size_t f = 0; f < pr.u.size(); ++f) {
            if (!piece.omega_interior[f] && !piece.omega_boundary[f]) continue;
            umin = std::min(umin, pr.u.values[f]);
            umax = std::max(umax, pr.u.values[f]);
            e.min_allowance = std::min(e.min_allowance, pr.allowance(pr.u.node_position(pr.u.unflat(f))));
        }
        e.oscillation = umax - umin;
        e.ok = e.oscillation < e.min_allowance;
        rep.pass = rep.pass && e.ok;
        rep.entries.push_back(std::move(e));
    }
    return rep;
}

// ---------------------------------------------------------------------------
// Epsilon selection.

struct EpsilonEntry {
    std::string piece;
    double core_gap = 0.0;      // min over K of v - u           (A)
    double boundary_gap = 0.0;  // min over boundary of Omega of u - v  (B)
    double budget_gap = 0.0;    // min over closed Omega of g - g'
    double strict_slack = 0.0;  // min over closed Omega of margin(v) - g
    double eps = 0.0;
};

struct EpsilonReport {
    std::vector<EpsilonEntry> entries;
};

/// eps_alpha = half of min(core gap, boundary gap, strictness budget). The
/// halving turns (A) and (B) into their eps-strengthened forms for free and
/// leaves the glued margin at least g' by the composition bound. Throws,
/// naming piece and node, when (A), (B) or the budget is not positive.
inline EpsilonReport select_epsilons(GluingProblem& pr) {
    EpsilonReport rep;
    for (CoverPiece& piece : pr.pieces) {
        EpsilonEntry e;
        e.piece = piece.name;
        e.core_gap = std::numeric_limits<double>::infinity();
        e.boundary_gap = e.core_gap;
        e.budget_gap = e.core_gap;
        e.strict_slack = e.core_gap;
        std::vector<int> worst_core, worst_boundary;
        for (std::size_t f = 0; f < pr.u.size(); ++f) {
            const auto idx = pr.u.unflat(f);
            if (piece.core[f]) {
                const double gap = piece.v.values[f] - pr.u.values[f];
                if (gap < e.core_gap) {
                    e.core_gap = gap;
                    worst_core = idx;
                }
            }
            if (piece.omega_boundary[f]) {
                const double gap = pr.u.values[f] - piece.v.values[f];
                if (gap < e.boundary_gap) {
                    e.boundary_gap = gap;
                    worst_boundary = idx;
                }
            }
            if (piece.omega_interior[f] || piece.omega_boundary[f]) {
                const Vec x = pr.u.node_position(idx);
                e.budget_gap = std::min(e.budget_gap, pr.g(x) - pr.g_prime(x));
                e.strict_slack =
                    std::min(e.strict_slack,
                             margin(pr.fiber, finite_difference_jet(piece.v, idx)) - pr.g(x));
            }
        }
        if (e.core_gap <= 0.0)
            throw std::runtime_error("condition (A) fails for piece '" + piece.name + "' at node " +
                                     detail::index_string(worst_core));
        if (e.boundary_gap <= 0.0)
            throw std::runtime_error("condition (B) fails for piece '" + piece.name + "' at node " +
                                     detail::index_string(worst_boundary));
        if (e.budget_gap <= 0.0)
            throw std::runtime_error("strictness budget g - g' is not positive on piece '" +
                                     piece.name + "'");
        piece.eps = 0.5 * std::min(e.core_gap, std::min(e.boundary_gap, e.budget_gap));
        e.eps = piece.eps;
        rep.entries.push_back(std::move(e));
    }
    return rep;
}

// ---------------------------------------------------------------------------
// The glued field.

/// Pieces whose open omega contains the node.
inline std::vector<int> candidate_pieces(const GluingProblem& pr, std::size_t node) {
    std::vector<int> out;
    for (int a = 0; a < static_cast<int>(pr.pieces.size()); ++a)
        if (pr.pieces[a].omega_interior[node]) out.push_back(a);
    return out;
}

/// Candidates that survive pruning at the node.
inline std::vector<int> active_pieces(const GluingProblem& pr, std::size_t node) {
    const std::vector<int> cand = candidate_pieces(pr, node);
    Vec t(cand.size()), e(cand.size());
    for (std::size_t i = 0; i < cand.size(); ++i) {
        t[i] = pr.pieces[cand[i]].v.values[node];
        e[i] = pr.pieces[cand[i]].eps;
    }
    std::vector<int> out;
    for (int i : pr.engine.active_set(t, e)) out.push_back(cand[i]);
    return out;
}

inline double glue_value(const GluingProblem& pr, std::size_t node) {
    const std::vector<int> cand = candidate_pieces(pr, node);
    if (cand.empty())
        throw std::runtime_error("glue_value: node " +
                                 detail::index_string(pr.u.unflat(node)) + " is not covered");
    Vec t(cand.size()), e(cand.size());
    for (std::size_t i = 0; i < cand.size(); ++i) {
        t[i] = pr.pieces[cand[i]].v.values[node];
        e[i] = pr.pieces[cand[i]].eps;
    }
    return pr.engine.smooth_max(t, e);
}

/// Smoothed-max composition of the candidate jets at the node (the jets come
/// from the piece fields by centered differences).
inline Jet2 glue_jet(const GluingProblem& pr, const std::vector<int>& idx) {
    const std::size_t node = pr.u.flat(idx);
    const std::vector<int> cand = candidate_pieces(pr, node);
    if (cand.empty())
        throw std::runtime_error("glue_jet: node " + detail::index_string(idx) + " is not covered");
    std::vector<Jet2> jets;
    Vec t(cand.size()), e(cand.size());
    for (std::size_t i = 0; i < cand.size(); ++i) {
        jets.push_back(finite_difference_jet(pr.pieces[cand[i]].v, idx));
        t[i] = pr.pieces[cand[i]].v.values[node];
        e[i] = pr.pieces[cand[i]].eps;
    }
    return pr.engine.compose_jet(jets, t, e);
}

/// w over the whole lattice: defined (interior) wherever at least one omega
/// is open around the node, outside elsewhere.
inline GridField glue_field(const GluingProblem& pr) {
    GridField w = pr.u;
    for (std::size_t f = 0; f < w.size(); ++f) {
        const std::vector<int> cand = candidate_pieces(pr, f);
        if (cand.empty()) {
            w.mask[f] = kOutside;
            w.values[f] = 0.0;
            continue;
        }
        Vec t(cand.size()), e(cand.size());
        for (std::size_t i = 0; i < cand.size(); ++i) {
            t[i] = pr.pieces[cand[i]].v.values[f];
            e[i] = pr.pieces[cand[i]].eps;
        }
        w.values[f] = pr.engine.smooth_max(t, e);
        w.mask[f] = kInterior;
    }
    return w;
}

// ---------------------------------------------------------------------------
// Verification.

struct SandwichReport {
    double min_lower_gap = std::numeric_limits<double>::infinity();  // w - u
    double min_upper_gap = std::numeric_limits<double>::infinity();  // u + allowance - w
    std::vector<int> worst_lower, worst_upper;
    std::size_t nodes = 0;
    bool pass = false;
};

inline SandwichReport verify_sandwich(const GluingProblem& pr, const GridField& w) {
    SandwichReport rep;
    for (std::size_t f = 0; f < pr.u.size(); ++f) {
        if (!pr.domain[f]) continue;
        ++rep.nodes;
        const double lower = w.values[f] - pr.u.values[f];
        const double upper =
            pr.u.values[f] + pr.allowance(pr.u.node_position(pr.u.unflat(f))) - w.values[f];
        if (lower < rep.min_lower_gap) {
            rep.min_lower_gap = lower;
            rep.worst_lower = pr.u.unflat(f);
        }
        if (upper < rep.min_upper_gap) {
            rep.min_upper_gap = upper;
            rep.worst_upper = pr.u.unflat(f);
        }
    }
    rep.pass = rep.nodes > 0 && rep.min_lower_gap > 0.0 && rep.min_upper_gap > 0.0;
    return rep;
}

struct MarginReport {
    double min_slack = std::numeric_limits<double>::infinity();  // margin(J w) - g'
    std::vector<int> worst;
    std::size_t nodes = 0;
    double tolerance = 0.0;
    bool pass = false;
};

/// Strictness of the glued field against g', via the composed jets.
inline MarginReport verify_margins(const GluingProblem& pr) {
    MarginReport rep;
    rep.tolerance = fd_allowance(pr.u.spacing);
    for (std::size_t f = 0; f < pr.u.size(); ++f) {
        if (!pr.domain[f]) continue;
        const auto idx = pr.u.unflat(f);
        const double slack =
            margin(pr.fiber, glue_jet(pr, idx)) - pr.g_prime(pr.u.node_position(idx));
        ++rep.nodes;
        if (slack < rep.min_slack) {
            rep.min_slack = slack;
            rep.worst = idx;
        }
    }
    rep.pass = rep.nodes > 0 && rep.min_slack >= -rep.tolerance;
    return rep;
}

struct LocalityReport {
    std::size_t boundary_checks = 0;   // (piece, node) pairs with the node on a piece boundary
    int boundary_violations = 0;
    double min_prune_slack = std::numeric_limits<double>::infinity();
    std::size_t stability_checks = 0;  // nodes where extra nearby pieces exist
    double max_value_shift = 0.0;
    bool pass = false;
};

/// Two locality facts behind well-definedness of the glue: a piece whose
/// omega boundary passes through a covered node must be dominated there by
/// an active piece with room 2*(eps_beta + eps_alpha) (so dropping it is
/// harmless), and enlarging the candidate set by every piece still defined
/// near the node must not move the glued value.
inline LocalityReport check_locality(const GluingProblem& pr) {
    LocalityReport rep;
    for (std::size_t f = 0; f < pr.u.size(); ++f) {
        if (!pr.domain[f]) continue;
        const std::vector<int> cand = candidate_pieces(pr, f);
        std::vector<int> extended = cand;
        for (int b = 0; b < static_cast<int>(pr.pieces.size()); ++b) {
            const CoverPiece& beta = pr.pieces[b];
            const bool nearby = beta.v.mask[f] == kInterior;
            if (beta.omega_boundary[f] && nearby) {
                ++rep.boundary_checks;
                double best = -std::numeric_limits<double>::infinity();
                for (int a : cand)
                    best = std::max(best, pr.pieces[a].v.values[f] - pr.pieces[a].eps);
                const double slack = best - (beta.v.values[f] + beta.eps);
                rep.min_prune_slack = std::min(rep.min_prune_slack, slack);
                if (slack < 0.0) ++rep.boundary_violations;
            }
            if (nearby && !pr.pieces[b].omega_interior[f]) extended.push_back(b);
        }
        if (extended.size() > cand.size()) {
            ++rep.stability_checks;
            Vec t(extended.size()), e(extended.size());
            for (std::size_t i = 0; i < extended.size(); ++i) {
                t[i] = pr.pieces[extended[i]].v.values[f];
                e[i] = pr.pieces[extended[i]].eps;
            }
            rep.max_value_shift = std::max(
                rep.max_value_shift, std::abs(pr.engine.smooth_max(t, e) - glue_value(pr, f)));
        }
    }
    rep.pass = rep.boundary_violations == 0 && rep.max_value_shift <= 1e-12;
    return rep;
}

// ---------------------------------------------------------------------------

struct GlueOutcome {
    GridField w;
    ConditionCReport condition_c;
    EpsilonReport epsilons;
    SandwichReport sandwich;
    MarginReport margins;
    LocalityReport locality;
    bool pass = false;
};

/// Full pipeline on an assembled problem. Configuration-level defects (bad
/// cover, failed (A)/(B)/(C), empty budget) throw with the piece named;
/// verification results are returned for reporting either way.
inline GlueOutcome run_gluing(GluingProblem& pr) {
    const CoverReport cover = check_cover(pr);
    if (!cover.pass) {
        std::string msg = "cover check failed:";
        for (const std::string& p : cover.problems) msg += " " + p + ";";
        throw std::invalid_argument(msg);
    }
    GlueOutcome out;
    out.condition_c = check_condition_c(pr);
    if (!out.condition_c.pass) {
        std::string msg = "condition (C) fails for";
        for (const auto& e : out.condition_c.entries)
            if (!e.ok)
                msg += " piece '" + e.piece + "' (oscillation " + format_double(e.oscillation) +
                       " vs allowance " + format_double(e.min_allowance) + ")";
        throw std::runtime_error(msg);
    }
    out.epsilons = select_epsilons(pr);
    out.w = glue_field(pr);
    out.sandwich = verify_sandwich(pr, out.w);
    out.margins = verify_margins(pr);
    out.locality = check_locality(pr);
    out.pass = out.sandwich.pass && out.margins.pass && out.locality.pass;
    return out;
}

}  // namespace richberg
