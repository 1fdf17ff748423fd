#pragma once

#include "richberg/smoothmax.hpp"
#include "richberg/subequations.hpp"

namespace richberg {

/// Coordinate ball: center x0, radius delta, and the curvature constant c
/// of its defining quadratic rho.
struct BallDomain {
    Vec center;
    double radius = 0.0;
    double c = 0.0;

    BallDomain() = default;
    BallDomain(Vec center_, double radius_, double c_)
        : center(std::move(center_)), radius(radius_), c(c_) {
        if (center.empty()) throw std::invalid_argument("BallDomain: empty center");
        if (radius <= 0.0) throw std::invalid_argument("BallDomain: radius must be positive");
        if (c <= 0.0) throw std::invalid_argument("BallDomain: c must be positive");
    }

    int dim() const { return static_cast<int>(center.size()); }
};

/// rho(x) = (c/2)(|x - x0|^2 - delta^2): negative inside, zero on the
/// sphere, reduced jet at x equal to (c (x - x0), c I).
inline QuadraticSpec coordinate_ball_rho(const BallDomain& ball) {
    const int n = ball.dim();
    SymMat a = SymMat::identity(n);
    a.scale(ball.c);
    return QuadraticSpec(-0.5 * ball.c * ball.radius * ball.radius, Vec(n, 0.0), std::move(a),
                         ball.center);
}

/// Whether the jet (0, 0, cI) sits strictly inside the fiber, i.e. the
/// constant-coefficient condition that makes the ball usable for local
/// constructions.
inline bool coordinate_ball_condition(const FiberSpec& fiber, double c) {
    if (c <= 0.0) throw std::invalid_argument("coordinate_ball_condition: c must be positive");
    SymMat a = SymMat::identity(fiber.dim);
    a.scale(c);
    return margin(fiber, Jet2(0.0, Vec(fiber.dim, 0.0), std::move(a))) > 0.0;
}

// ---------------------------------------------------------------------------
// Masks.

/// Marks interior where |x - x0| < delta - h/2, then flags every remaining
/// node box-adjacent to the interior as boundary. Previously-set mask
/// content is overwritten.
inline void apply_ball_mask(GridField& f, const BallDomain& ball) {
    if (f.dim() != ball.dim()) throw std::invalid_argument("apply_ball_mask: dimension mismatch");
    const double cut = ball.radius - 0.5 * f.spacing;
    for (std::size_t k = 0; k < f.size(); ++k) {
        const Vec x = f.node_position(f.unflat(k));
        double r2 = 0.0;
        for (int d = 0; d < f.dim(); ++d) r2 += (x[d] - ball.center[d]) * (x[d] - ball.center[d]);
        f.mask[k] = (r2 < cut * cut) ? kInterior : kOutside;
    }
    // boundary ring: outside nodes touching the interior (3^n adjacency)
    std::vector<std::size_t> ring;
    for (std::size_t k = 0; k < f.size(); ++k) {
        if (f.mask[k] != kOutside) continue;
        const auto idx = f.unflat(k);
        std::vector<int> nb(idx);
        bool touches = false;
        std::function<void(int)> walk = [&](int d) {
            if (touches) return;
            if (d == f.dim()) {
                if (f.mask[f.flat(nb)] == kInterior) touches = true;
                return;
            }
            for (int o = -1; o <= 1 && !touches; ++o) {
                nb[d] = idx[d] + o;
                if (nb[d] < 0 || nb[d] >= f.extents[d]) { nb[d] = idx[d]; continue; }
                walk(d + 1);
                nb[d] = idx[d];
            }
        };
        walk(0);
        if (touches) ring.push_back(k);
    }
    for (std::size_t k : ring) f.mask[k] = kBoundary;
}

/// Grid tightly covering the ball, lattice-aligned so the center is a node.
inline GridField make_ball_grid(const BallDomain& ball, double h, int pad = 2) {
    if (h <= 0.0) throw std::invalid_argument("make_ball_grid: spacing must be positive");
    const int n = ball.dim();
    const int half = static_cast<int>(std::ceil(ball.radius / h)) + pad;
    Vec origin(n);
    for (int d = 0; d < n; ++d) origin[d] = ball.center[d] - half * h;
    GridField f(origin, h, std::vector<int>(n, 2 * half + 1));
    apply_ball_mask(f, ball);
    return f;
}

/// Box grid: shell nodes are boundary, the rest interior.
inline GridField make_box_grid(Vec origin, double h, std::vector<int> extents) {
    GridField f(std::move(origin), h, std::move(extents));
    for (std::size_t k = 0; k < f.size(); ++k) {
        const auto idx = f.unflat(k);
        bool shell = false;
        for (int d = 0; d < f.dim(); ++d)
            shell = shell || idx[d] == 0 || idx[d] == f.extents[d] - 1;
        f.mask[k] = shell ? kBoundary : kInterior;
    }
    return f;
}

inline void fill_from(GridField& f, const std::function<double(const Vec&)>& fn,
                      bool boundary_only = false) {
    for (std::size_t k = 0; k < f.size(); ++k) {
        if (f.mask[k] == kOutside) continue;
        if (boundary_only && f.mask[k] != kBoundary) continue;
        f.values[k] = fn(f.node_position(f.unflat(k)));
    }
}

// ---------------------------------------------------------------------------
// Mollification on the lattice.

/// Tensor-product bump smoothing with physical kernel width `width` per
/// axis. Per-axis weights are normalized to unit sum, so constants and (by
/// evenness) affine fields pass through exactly. The output mask keeps only
/// nodes whose full kernel box was available; everything else goes outside.
inline GridField convolution_smooth(const GridField& f, double width) {
    if (width < 2.0 * f.spacing)
        throw std::invalid_argument("convolution_smooth: width must be at least 2 h");
    const int n = f.dim();
    const int reach = static_cast<int>(std::ceil(width / f.spacing)) - 1;
    Mollifier phi;
    Vec axis_w(2 * reach + 1);
    double sum = 0.0;
    for (int o = -reach; o <= reach; ++o) {
        axis_w[o + reach] = phi.value(o * f.spacing / width);
        sum += axis_w[o + reach];
    }
    for (double& w : axis_w) w /= sum;

    GridField out = f;
    for (std::size_t k = 0; k < f.size(); ++k) out.mask[k] = kOutside;

    std::vector<int> off(n, -reach);
    for (std::size_t k = 0; k < f.size(); ++k) {
        if (f.mask[k] != kInterior) continue;
        const auto idx = f.unflat(k);
        bool full = true;
        double acc = 0.0;
        std::fill(off.begin(), off.end(), -reach);
        for (;;) {
            std::vector<int> nb(n);
            bool inside = true;
            double w = 1.0;
            for (int d = 0; d < n; ++d) {
                nb[d] = idx[d] + off[d];
                inside = inside && nb[d] >= 0 && nb[d] < f.extents[d];
                w *= axis_w[off[d] + reach];
            }
            if (!inside || (w != 0.0 && !f.available(f.flat(nb)))) {
                full = false;
                break;
            }
            if (w != 0.0) acc += w * f.values[f.flat(nb)];
            int d = 0;
            while (d < n && ++off[d] > reach) off[d++] = -reach;
            if (d == n) break;
        }
        if (full) {
            out.values[k] = acc;
            out.mask[k] = kInterior;
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// Dirichlet solvers: SOR on the 2n+1-point Laplacian.

struct SolveStats {
    int iterations = 0;
    double residual = 0.0;
};

namespace detail {

inline SolveStats sor_solve(GridField& f, const std::function<double(std::size_t)>& rhs,
                            double omega, double tol, long max_iter) {
    const int n = f.dim();
    const double h2 = f.spacing * f.spacing;
    std::vector<std::size_t> strides(n);
    std::size_t s = 1;
    for (int d = n - 1; d >= 0; --d) {
        strides[d] = s;
        s *= static_cast<std::size_t>(f.extents[d]);
    }
    std::vector<std::size_t> interior;
    for (std::size_t k = 0; k < f.size(); ++k)
        if (f.mask[k] == kInterior) interior.push_back(k);
    if (interior.empty()) throw std::invalid_argument("sor_solve: no interior nodes");
    for (std::size_t k : interior) {
        const auto idx = f.unflat(k);
        for (int d = 0; d < n; ++d) {
            if (idx[d] == 0 || idx[d] == f.extents[d] - 1 || !f.available(k - strides[d]) ||
                !f.available(k + strides[d]))
                throw std::invalid_argument("sor_solve: interior node missing a face neighbor");
        }
    }

    SolveStats stats;
    const double inv = 1.0 / (2.0 * n);
    for (long it = 1; it <= max_iter; ++it) {
        double res = 0.0;
        for (std::size_t k : interior) {
            double nb = 0.0;
            for (int d = 0; d < n; ++d) nb += f.values[k - strides[d]] + f.values[k + strides[d]];
            const double target = (nb - h2 * rhs(k)) * inv;
            res = std::max(res, std::abs(target - f.values[k]) * 2.0 * n / h2);
            f.values[k] += omega * (target - f.values[k]);
        }
        stats.iterations = static_cast<int>(it);
        stats.residual = res;
        if (res <= tol) break;
    }
    // true residual after the last update pass
    double res = 0.0;
    for (std::size_t k : interior) {
        double nb = 0.0;
        for (int d = 0; d < n; ++d) nb += f.values[k - strides[d]] + f.values[k + strides[d]];
        res = std::max(res, std::abs((nb - h2 * rhs(k)) * inv - f.values[k]) * 2.0 * n / h2);
    }
    stats.residual = res;
    if (res > tol) throw std::runtime_error("sor_solve: did not reach residual tolerance");
    return stats;
}

}  // namespace detail

/// Discrete harmonic extension of the boundary values already stored in
/// `domain`. Interior values act as the initial guess.
inline GridField solve_laplace_dirichlet(const GridField& domain, SolveStats* stats = nullptr,
                                         double omega = 1.8, double tol = 1e-10,
                                         long max_iter = 1000000) {
    GridField f = domain;
    const SolveStats s = detail::sor_solve(f, [](std::size_t) { return 0.0; }, omega, tol, max_iter);
    if (stats) *stats = s;
    return f;
}

/// Solves the discrete Poisson problem (Delta v)(x) = psi(x) with the
/// boundary values stored in `domain`.
inline GridField solve_poisson_dirichlet(const GridField& domain,
                                         const std::function<double(const Vec&)>& psi,
                                         SolveStats* stats = nullptr, double omega = 1.8,
                                         double tol = 1e-10, long max_iter = 1000000) {
    GridField f = domain;
    std::vector<double> rhs(f.size(), 0.0);
    for (std::size_t k = 0; k < f.size(); ++k)
        if (f.mask[k] == kInterior) rhs[k] = psi(f.node_position(f.unflat(k)));
    const SolveStats s =
        detail::sor_solve(f, [&](std::size_t k) { return rhs[k]; }, omega, tol, max_iter);
    if (stats) *stats = s;
    return f;
}

/// Max-principle slack of a discrete-harmonic field: how far interior values
/// stay inside the boundary range (nonnegative when the principle holds).
inline double max_principle_slack(const GridField& f) {
    double bmin = std::numeric_limits<double>::infinity(), bmax = -bmin;
    double imin = bmin, imax = -bmin;
    for (std::size_t k = 0; k < f.size(); ++k) {
        if (f.mask[k] == kBoundary) {
            bmin = std::min(bmin, f.values[k]);
            bmax = std::max(bmax, f.values[k]);
        } else if (f.mask[k] == kInterior) {
            imin = std::min(imin, f.values[k]);
            imax = std::max(imax, f.values[k]);
        }
    }
    return std::min(imin - bmin, bmax - imax);
}

// ---------------------------------------------------------------------------
// Approximant families on a ball.

/// v_k = H + rho / k: the homogeneous family converging to H at rate
/// sup|rho| / k while staying strictly subharmonic at margin c / k.
inline std::vector<GridField> homogeneous_approximants(const GridField& H, const BallDomain& ball,
                                                       const std::vector<int>& ks) {
    const QuadraticSpec rho = coordinate_ball_rho(ball);
    std::vector<GridField> out;
    for (int k : ks) {
        if (k < 1) throw std::invalid_argument("homogeneous_approximants: k must be >= 1");
        GridField v = H;
        for (std::size_t i = 0; i < v.size(); ++i)
            if (v.available(i)) v.values[i] += rho.value(v.node_position(v.unflat(i))) / k;
        out.push_back(std::move(v));
    }
    return out;
}

struct InhomogeneousReport {
    std::vector<double> eps;
    std::vector<double> sup_diff;        // ||H - v_eps||_inf
    std::vector<double> lower_violation; // max(0, -(H - v))
    std::vector<double> upper_violation; // max(0, (H - v) - (-eps rho))
    double tolerance = 0.0;
    bool brackets_hold = true;
};

struct InhomogeneousResult {
    GridField H;
    std::vector<GridField> v;
    InhomogeneousReport report;
};

/// Scale for the Prop-3.9 bracket tolerance C * h^2; fitted once against the
/// staircase-boundary error of the lattice ball and frozen.
inline constexpr double kBracketScale = 40.0;

/// Inhomogeneous family: for each eps solve Delta v = eps * c * n with the
/// same boundary data as H, so that 0 <= H - v_eps <= -eps * rho up to the
/// lattice tolerance, with sup-norm decay linear in eps.
inline InhomogeneousResult inhomogeneous_approximants(const GridField& domain,
                                                      const BallDomain& ball,
                                                      const std::vector<double>& eps_list) {
    InhomogeneousResult out{solve_laplace_dirichlet(domain), {}, {}};
    const QuadraticSpec rho = coordinate_ball_rho(ball);
    const double psi_base = ball.c * domain.dim();
    out.report.tolerance = kBracketScale * domain.spacing * domain.spacing;
    for (double eps : eps_list) {
        if (eps <= 0.0) throw std::invalid_argument("inhomogeneous_approximants: eps must be > 0");
        GridField v = solve_poisson_dirichlet(domain, [&](const Vec&) { return eps * psi_base; });
        double sup = 0.0, lower = 0.0, upper = 0.0;
        for (std::size_t k = 0; k < v.size(); ++k) {
            if (!v.available(k)) continue;
            const double diff = out.H.values[k] - v.values[k];
            sup = std::max(sup, std::abs(diff));
            lower = std::max(lower, -diff);
            upper = std::max(upper, diff + eps * rho.value(v.node_position(v.unflat(k))));
        }
        out.report.eps.push_back(eps);
        out.report.sup_diff.push_back(sup);
        out.report.lower_violation.push_back(lower);
        out.report.upper_violation.push_back(upper);
        out.report.brackets_hold = out.report.brackets_hold &&
                                   lower <= out.report.tolerance && upper <= out.report.tolerance;
        out.v.push_back(std::move(v));
    }
    return out;
}

// ---------------------------------------------------------------------------
// Quasi-approximation: turn approximants into strict over/under fits.

struct QuasiReport {
    double core_gap = 0.0;      // min over K of (v - u), condition (A)
    double boundary_gap = 0.0;  // min over boundary of (u - v), condition (B)
    std::vector<int> worst_core_index;
    std::vector<int> worst_boundary_index;
};

namespace detail {

inline QuasiReport ab_report(const GridField& v, const GridField& u,
                             const std::vector<std::uint8_t>& core) {
    QuasiReport rep;
    rep.core_gap = std::numeric_limits<double>::infinity();
    rep.boundary_gap = rep.core_gap;
    for (std::size_t k = 0; k < v.size(); ++k) {
        if (core[k]) {
            const double gap = v.values[k] - u.values[k];
            if (gap < rep.core_gap) {
                rep.core_gap = gap;
                rep.worst_core_index = v.unflat(k);
            }
        }
        if (v.mask[k] == kBoundary) {
            const double gap = u.values[k] - v.values[k];
            if (gap < rep.boundary_gap) {
                rep.boundary_gap = gap;
                rep.worst_boundary_index = v.unflat(k);
            }
        }
    }
    return rep;
}

inline std::string index_string(const std::vector<int>& idx) {
    std::string s = "(";
    for (std::size_t i = 0; i < idx.size(); ++i) s += (i ? "," : "") + std::to_string(idx[i]);
    return s + ")";
}

}  // namespace detail

struct QuasiResult {
    GridField v;
    QuasiReport report;
    int k = 0;        // chosen approximant index (DP route)
    double s = 0.0;   // core clearance constant (DP route)
    GridField H;      // harmonic majorant (DP route)
};

/// vbar = v - delta_coef * (rho + s): pushes a uniformly-close approximant
/// strictly above u on the core and strictly below u on the mask boundary.
/// Requires rho + s < 0 on the core; throws naming the node when (A) or (B)
/// fails.
inline QuasiResult quasi_from_uniform(const GridField& v, const GridField& u,
                                      const BallDomain& ball,
                                      const std::vector<std::uint8_t>& core, double delta_coef,
                                      double s) {
    if (v.size() != u.size() || core.size() != v.size())
        throw std::invalid_argument("quasi_from_uniform: field/core size mismatch");
    if (delta_coef <= 0.0) throw std::invalid_argument("quasi_from_uniform: delta must be positive");
    const QuadraticSpec rho = coordinate_ball_rho(ball);
    QuasiResult out;
    out.v = v;
    bool have_core = false;
    for (std::size_t k = 0; k < v.size(); ++k) {
        const double rv = rho.value(v.node_position(v.unflat(k)));
        if (core[k]) {
            have_core = true;
            if (rv + s >= 0.0)
                throw std::invalid_argument("quasi_from_uniform: rho + s not negative on core at " +
                                            detail::index_string(v.unflat(k)));
        }
        if (v.available(k)) out.v.values[k] = v.values[k] - delta_coef * (rv + s);
    }
    if (!have_core) throw std::invalid_argument("quasi_from_uniform: empty core");
    out.report = detail::ab_report(out.v, u, core);
    if (out.report.core_gap <= 0.0)
        throw std::runtime_error("quasi_from_uniform: condition (A) fails at node " +
                                 detail::index_string(out.report.worst_core_index));
    if (out.report.boundary_gap <= 0.0)
        throw std::runtime_error("quasi_from_uniform: condition (B) fails at node " +
                                 detail::index_string(out.report.worst_boundary_index));
    return out;
}

/// Dirichlet-solver route to a quasi approximant on a ball:
///   1. check u is strict enough to absorb eps * rho,
///   2. s = half of min over core of -rho,
///   3. solve the homogeneous problem for phi = u - eps*s/2 on the mask
///      boundary,
///   4. return v = H + rho/k for the smallest k passing (A) and (B).
/// The comparison w = u - eps(rho + s) <= H is verified pointwise on the
/// way (it is the inequality that makes (A) reachable at all).
inline QuasiResult quasi_via_dp(const FiberSpec& fiber, const GridField& u,
                                const std::vector<std::uint8_t>& core, const BallDomain& ball,
                                double eps, int max_k = 64) {
    if (eps <= 0.0) throw std::invalid_argument("quasi_via_dp: eps must be positive");
    if (u.size() != core.size()) throw std::invalid_argument("quasi_via_dp: field/core size mismatch");
    const QuadraticSpec rho = coordinate_ball_rho(ball);
    const double rho_margin = margin(fiber, jet_of_quadratic(rho, ball.center));
    const StrictnessReport strict = field_strictness(fiber, u, 0.0);
    if (strict.min_slack < eps * rho_margin - strict.tolerance)
        throw std::invalid_argument(
            "quasi_via_dp: u is not strict enough to stay subharmonic after subtracting eps*rho");

    double min_neg_rho = std::numeric_limits<double>::infinity();
    bool have_core = false;
    for (std::size_t k = 0; k < u.size(); ++k) {
        if (!core[k]) continue;
        have_core = true;
        min_neg_rho = std::min(min_neg_rho, -rho.value(u.node_position(u.unflat(k))));
    }
    if (!have_core) throw std::invalid_argument("quasi_via_dp: empty core");
    if (min_neg_rho <= 0.0)
        throw std::invalid_argument("quasi_via_dp: core reaches the ball boundary");
    const double s = 0.5 * min_neg_rho;

    GridField problem = u;
    for (std::size_t k = 0; k < u.size(); ++k)
        if (u.mask[k] == kBoundary) problem.values[k] = u.values[k] - eps * s / 2.0;
    QuasiResult out;
    out.s = s;
    out.H = solve_laplace_dirichlet(problem);

    // comparison chain (w = u - eps(rho+s) is subharmonic with w <= phi on
    // the boundary, hence w <= H everywhere)
    for (std::size_t k = 0; k < u.size(); ++k) {
        if (!u.available(k)) continue;
        const double w = u.values[k] - eps * (rho.value(u.node_position(u.unflat(k))) + s);
        if (w > out.H.values[k] + 1e-8)
            throw std::runtime_error("quasi_via_dp: comparison w <= H fails at node " +
                                     detail::index_string(u.unflat(k)));
    }

    for (int k = 1; k <= max_k; ++k) {
        GridField v = homogeneous_approximants(out.H, ball, {k}).front();
        const QuasiReport rep = detail::ab_report(v, u, core);
        if (rep.core_gap > 0.0 && rep.boundary_gap > 0.0) {
            out.v = std::move(v);
            out.report = rep;
            out.k = k;
            return out;
        }
    }
    throw std::runtime_error("quasi_via_dp: no approximant index satisfies (A) and (B)");
}

}  // namespace richberg
