#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

namespace richberg {

using Vec = std::vector<double>;

inline double dot(const Vec& a, const Vec& b) {
    if (a.size() != b.size()) throw std::invalid_argument("dot: size mismatch");
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

inline double norm2(const Vec& a) { return std::sqrt(dot(a, a)); }

/// Dense symmetric matrix, row-major storage. Construction symmetrizes,
/// so A(i,j) == A(j,i) holds exactly afterwards.
class SymMat {
  public:
    SymMat() = default;
    explicit SymMat(int n) : n_(n), a_(static_cast<std::size_t>(n) * n, 0.0) {
        if (n < 1) throw std::invalid_argument("SymMat: dimension must be >= 1");
    }
    SymMat(int n, const std::vector<double>& entries) : SymMat(n) {
        if (entries.size() != a_.size()) throw std::invalid_argument("SymMat: entry count mismatch");
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j)
                a_[idx(i, j)] = 0.5 * (entries[idx(i, j)] + entries[idx(j, i)]);
    }

    static SymMat identity(int n) {
        SymMat m(n);
        for (int i = 0; i < n; ++i) m.set(i, i, 1.0);
        return m;
    }

    int n() const { return n_; }
    double operator()(int i, int j) const { return a_[idx(i, j)]; }
    void set(int i, int j, double v) { a_[idx(i, j)] = v; a_[idx(j, i)] = v; }
    void add(int i, int j, double v) { a_[idx(i, j)] += v; if (i != j) a_[idx(j, i)] += v; }

    double trace() const {
        double s = 0.0;
        for (int i = 0; i < n_; ++i) s += a_[idx(i, i)];
        return s;
    }

    /// Frobenius inner product <A, B>.
    double inner(const SymMat& b) const {
        check_same_dim(b);
        double s = 0.0;
        for (std::size_t k = 0; k < a_.size(); ++k) s += a_[k] * b.a_[k];
        return s;
    }

    double quad_form(const Vec& v) const {
        if (static_cast<int>(v.size()) != n_) throw std::invalid_argument("quad_form: size mismatch");
        double s = 0.0;
        for (int i = 0; i < n_; ++i)
            for (int j = 0; j < n_; ++j) s += v[i] * a_[idx(i, j)] * v[j];
        return s;
    }

    SymMat& axpy(double c, const SymMat& b) {
        check_same_dim(b);
        for (std::size_t k = 0; k < a_.size(); ++k) a_[k] += c * b.a_[k];
        return *this;
    }

    SymMat& scale(double c) {
        for (double& x : a_) x *= c;
        return *this;
    }

    /// Adds c * sym(p q^T) = c/2 * (p q^T + q p^T).
    SymMat& add_sym_outer(double c, const Vec& p, const Vec& q) {
        if (static_cast<int>(p.size()) != n_ || static_cast<int>(q.size()) != n_)
            throw std::invalid_argument("add_sym_outer: size mismatch");
        for (int i = 0; i < n_; ++i)
            for (int j = 0; j < n_; ++j)
                a_[idx(i, j)] += 0.5 * c * (p[i] * q[j] + q[i] * p[j]);
        return *this;
    }

    const std::vector<double>& data() const { return a_; }

  private:
    std::size_t idx(int i, int j) const { return static_cast<std::size_t>(i) * n_ + j; }
    void check_same_dim(const SymMat& b) const {
        if (b.n_ != n_) throw std::invalid_argument("SymMat: dimension mismatch");
    }
    int n_ = 0;
    std::vector<double> a_;
};

/// Eigenvalues of a symmetric matrix by cyclic Jacobi rotations, ascending.
/// Intended for the small dimensions this library works at (n <= ~12).
inline std::vector<double> sym_eigenvalues(const SymMat& m) {
    const int n = m.n();
    std::vector<double> a(m.data());
    auto at = [&](int i, int j) -> double& { return a[static_cast<std::size_t>(i) * n + j]; };

    double frob = 0.0;
    for (double x : a) frob += x * x;
    frob = std::sqrt(frob);
    const double tol = 1e-15 * std::max(frob, 1.0);

    for (int sweep = 0; sweep < 100; ++sweep) {
        double off = 0.0;
        for (int i = 0; i < n; ++i)
            for (int j = i + 1; j < n; ++j) off += 2.0 * at(i, j) * at(i, j);
        if (std::sqrt(off) <= tol) break;
        for (int p = 0; p < n - 1; ++p) {
            for (int q = p + 1; q < n; ++q) {
                const double apq = at(p, q);
                if (std::abs(apq) <= 1e-300) continue;
                const double theta = (at(q, q) - at(p, p)) / (2.0 * apq);
                const double t = (theta >= 0 ? 1.0 : -1.0) /
                                 (std::abs(theta) + std::sqrt(theta * theta + 1.0));
                const double c = 1.0 / std::sqrt(t * t + 1.0);
                const double s = t * c;
                for (int k = 0; k < n; ++k) {
                    const double akp = at(k, p), akq = at(k, q);
                    at(k, p) = c * akp - s * akq;
                    at(k, q) = s * akp + c * akq;
                }
                for (int k = 0; k < n; ++k) {
                    const double apk = at(p, k), aqk = at(q, k);
                    at(p, k) = c * apk - s * aqk;
                    at(q, k) = s * apk + c * aqk;
                }
            }
        }
    }
    std::vector<double> ev(n);
    for (int i = 0; i < n; ++i) ev[i] = at(i, i);
    std::sort(ev.begin(), ev.end());
    return ev;
}

inline double lambda_min(const SymMat& m) { return sym_eigenvalues(m).front(); }
inline double lambda_max(const SymMat& m) { return sym_eigenvalues(m).back(); }

/// Spectral norm max|lambda_i|.
inline double operator_norm(const SymMat& m) {
    const auto ev = sym_eigenvalues(m);
    return std::max(std::abs(ev.front()), std::abs(ev.back()));
}

/// Nuclear norm sum|lambda_i| (dual of the spectral norm).
inline double nuclear_norm(const SymMat& m) {
    double s = 0.0;
    for (double e : sym_eigenvalues(m)) s += std::abs(e);
    return s;
}

// ---------------------------------------------------------------------------
// Gauss-Legendre rules on [-1, 1], nodes by Newton iteration on P_n.

struct QuadRule {
    std::vector<double> nodes;
    std::vector<double> weights;
};

inline const QuadRule& gauss_legendre(int n) {
    if (n < 1 || n > 1024) throw std::invalid_argument("gauss_legendre: degree out of range");
    static std::map<int, QuadRule> cache;
    auto it = cache.find(n);
    if (it != cache.end()) return it->second;

    QuadRule r;
    r.nodes.resize(n);
    r.weights.resize(n);
    for (int i = 0; i < n; ++i) {
        // Chebyshev-based initial guess, then Newton on P_n(x) = 0.
        double x = std::cos(M_PI * (i + 0.75) / (n + 0.5));
        double dp = 0.0;
        for (int iter = 0; iter < 100; ++iter) {
            double p0 = 1.0, p1 = x;
            for (int k = 2; k <= n; ++k) {
                const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
                p0 = p1;
                p1 = p2;
            }
            dp = n * (x * p1 - p0) / (x * x - 1.0);
            const double dx = p1 / dp;
            x -= dx;
            if (std::abs(dx) < 1e-15) break;
        }
        r.nodes[n - 1 - i] = x;
        r.weights[n - 1 - i] = 2.0 / ((1.0 - x * x) * dp * dp);
    }
    return cache.emplace(n, std::move(r)).first->second;
}

// ---------------------------------------------------------------------------
// Deterministic random streams. The generator math is pinned here rather
// than taken from <random> distributions so output bytes do not depend on
// the standard library implementation.

class Rng {
  public:
    explicit Rng(std::uint64_t seed) : state_(seed ? seed : 0x9e3779b97f4a7c15ULL) {}

    std::uint64_t next_u64() {
        // xorshift* stream seeded by splitmix64; period and quality are
        // ample for property sampling.
        std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    /// Uniform in [0, 1).
    double uniform01() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    double uniform(double a, double b) { return a + (b - a) * uniform01(); }

    int uniform_int(int lo, int hi) {  // inclusive bounds
        if (hi < lo) throw std::invalid_argument("uniform_int: empty range");
        return lo + static_cast<int>(next_u64() % static_cast<std::uint64_t>(hi - lo + 1));
    }

    double normal() {
        // Box-Muller, one value per call; the discarded branch keeps the
        // stream position independent of call parity.
        const double u1 = std::max(uniform01(), 1e-300);
        const double u2 = uniform01();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
    }

  private:
    std::uint64_t state_;
};

/// Shortest round-trip-exact decimal form, stable across runs.
inline std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

}  // namespace richberg
