#pragma once

#include <cmath>

#include "richberg/core.hpp"

namespace richberg {

/// Second-order jet (r, p, A): value, gradient, Hessian at a point.
struct Jet2 {
    double r = 0.0;
    Vec p;
    SymMat A;

    Jet2() = default;
    Jet2(double r_, Vec p_, SymMat A_) : r(r_), p(std::move(p_)), A(std::move(A_)) {
        if (static_cast<int>(p.size()) != A.n())
            throw std::invalid_argument("Jet2: gradient/Hessian dimension mismatch");
    }

    int dim() const { return A.n(); }
};

/// max(|r|, |p|_2, |A|_op); the metric every fiber margin is calibrated to.
inline double jet_norm(const Jet2& j) {
    return std::max({std::abs(j.r), norm2(j.p), operator_norm(j.A)});
}

inline Jet2 jet_add(const Jet2& a, const Jet2& b) {
    if (a.dim() != b.dim()) throw std::invalid_argument("jet_add: dimension mismatch");
    Jet2 out = a;
    out.r += b.r;
    for (int i = 0; i < out.dim(); ++i) out.p[i] += b.p[i];
    out.A.axpy(1.0, b.A);
    return out;
}

inline Jet2 jet_scale(double c, const Jet2& a) {
    Jet2 out = a;
    out.r *= c;
    for (double& x : out.p) x *= c;
    out.A.scale(c);
    return out;
}

/// q(x) = r0 + <p0, x - c> + 1/2 (x - c)^T A0 (x - c).
struct QuadraticSpec {
    double r0 = 0.0;
    Vec p0;
    SymMat A0;
    Vec center;

    QuadraticSpec() = default;
    QuadraticSpec(double r0_, Vec p0_, SymMat A0_, Vec center_)
        : r0(r0_), p0(std::move(p0_)), A0(std::move(A0_)), center(std::move(center_)) {
        const int n = A0.n();
        if (static_cast<int>(p0.size()) != n || static_cast<int>(center.size()) != n)
            throw std::invalid_argument("QuadraticSpec: dimension mismatch");
    }

    int dim() const { return A0.n(); }

    double value(const Vec& x) const {
        const int n = dim();
        if (static_cast<int>(x.size()) != n) throw std::invalid_argument("QuadraticSpec: point dimension");
        Vec d(n);
        for (int i = 0; i < n; ++i) d[i] = x[i] - center[i];
        return r0 + dot(p0, d) + 0.5 * A0.quad_form(d);
    }
};

/// Exact jet of a quadratic: (q(x), p0 + A0 (x - c), A0).
inline Jet2 jet_of_quadratic(const QuadraticSpec& q, const Vec& x) {
    const int n = q.dim();
    if (static_cast<int>(x.size()) != n) throw std::invalid_argument("jet_of_quadratic: point dimension");
    Vec d(n), p(q.p0);
    for (int i = 0; i < n; ++i) d[i] = x[i] - q.center[i];
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) p[i] += q.A0(i, j) * d[j];
    return Jet2(q.value(x), std::move(p), q.A0);
}

/// Sum of w_j * J_j for convex weights. Weights must be nonnegative and sum
/// to 1 within 1e-10; all jets share one dimension.
inline Jet2 convex_combination(const std::vector<double>& w, const std::vector<Jet2>& jets) {
    if (w.size() != jets.size() || jets.empty())
        throw std::invalid_argument("convex_combination: need matching nonempty weights/jets");
    double sum = 0.0;
    for (double wi : w) {
        if (wi < -1e-12) throw std::invalid_argument("convex_combination: negative weight");
        sum += wi;
    }
    if (std::abs(sum - 1.0) > 1e-10)
        throw std::invalid_argument("convex_combination: weights must sum to 1");
    const int n = jets.front().dim();
    Jet2 out(0.0, Vec(n, 0.0), SymMat(n));
    for (std::size_t k = 0; k < jets.size(); ++k) {
        if (jets[k].dim() != n) throw std::invalid_argument("convex_combination: jet dimension mismatch");
        out.r += w[k] * jets[k].r;
        for (int i = 0; i < n; ++i) out.p[i] += w[k] * jets[k].p[i];
        out.A.axpy(w[k], jets[k].A);
    }
    return out;
}

/// J + (r_shift, 0, P) with r_shift <= 0 and P positive semidefinite; the
/// only jet moves every fiber in this library is closed under.
inline Jet2 translate_positive(const Jet2& j, double r_shift, const SymMat& P) {
    if (P.n() != j.dim()) throw std::invalid_argument("translate_positive: dimension mismatch");
    if (r_shift > 0.0) throw std::invalid_argument("translate_positive: r shift must be <= 0");
    if (lambda_min(P) < -1e-10)
        throw std::invalid_argument("translate_positive: P must be positive semidefinite");
    Jet2 out = j;
    out.r += r_shift;
    out.A.axpy(1.0, P);
    return out;
}

}  // namespace richberg
