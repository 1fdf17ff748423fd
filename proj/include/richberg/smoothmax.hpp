#pragma once

#include <cmath>
#include <functional>
#include <limits>

#include "richberg/jets.hpp"

namespace richberg {

/// Even C-infinity bump kernel phi(s) = C * exp(-1/(1-s^2)) on (-1,1),
/// normalized to unit mass. The CDF is tabulated once (cubic Hermite over
/// 8192 uniform bins; slope data is exact since Phi' = phi) and is accurate
/// to ~4e-15, which the smoothed-max quadrature below depends on.
class Mollifier {
  public:
    Mollifier() {
        const auto& rule = gauss_legendre(256);
        double raw = 0.0;
        for (std::size_t i = 0; i < rule.nodes.size(); ++i)
            raw += rule.weights[i] * raw_bump(rule.nodes[i]);
        norm_ = 1.0 / raw;
        build_cdf_table();
        validate_moments();
    }

    double value(double s) const { return norm_ * raw_bump(s); }

    double derivative(double s) const {
        const double u = 1.0 - s * s;
        if (u <= 1e-12) return 0.0;
        return value(s) * (-2.0 * s / (u * u));
    }

    double second_derivative(double s) const {
        const double u = 1.0 - s * s;
        if (u <= 1e-12) return 0.0;
        const double g1 = -2.0 * s / (u * u);
        const double g2 = -2.0 / (u * u) - 8.0 * s * s / (u * u * u);
        return value(s) * (g2 + g1 * g1);
    }

    /// CDF: integral of phi over (-1, s], clamped to [0, 1] outside support.
    double cdf(double s) const {
        if (s <= -1.0) return 0.0;
        if (s >= 1.0) return 1.0;
        const double u = (s + 1.0) / bin_width_;
        int k = static_cast<int>(u);
        if (k >= kBins) k = kBins - 1;
        const double x0 = -1.0 + k * bin_width_;
        const double t = (s - x0) / bin_width_;
        const double h00 = (1.0 + 2.0 * t) * (1.0 - t) * (1.0 - t);
        const double h10 = t * (1.0 - t) * (1.0 - t);
        const double h01 = t * t * (3.0 - 2.0 * t);
        const double h11 = t * t * (t - 1.0);
        return h00 * cdf_val_[k] + h01 * cdf_val_[k + 1] +
               bin_width_ * (h10 * cdf_slope_[k] + h11 * cdf_slope_[k + 1]);
    }

    double peak() const { return value(0.0); }
    double normalization() const { return norm_; }

  private:
    static double raw_bump(double s) {
        const double u = 1.0 - s * s;
        if (u <= 1e-12) return 0.0;
        return std::exp(-1.0 / u);
    }

    void build_cdf_table() {
        cdf_val_.resize(kBins + 1);
        cdf_slope_.resize(kBins + 1);
        const auto& rule = gauss_legendre(24);
        double acc = 0.0;
        cdf_val_[0] = 0.0;
        cdf_slope_[0] = 0.0;
        for (int k = 0; k < kBins; ++k) {
            const double a = -1.0 + k * bin_width_;
            const double b = a + bin_width_;
            double piece = 0.0;
            for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
                const double x = 0.5 * (a + b) + 0.5 * bin_width_ * rule.nodes[i];
                piece += rule.weights[i] * value(x);
            }
            acc += 0.5 * bin_width_ * piece;
            cdf_val_[k + 1] = acc;
            cdf_slope_[k + 1] = value(-1.0 + (k + 1) * bin_width_);
        }
        // acc is the table's own estimate of the unit mass; fold the
        // residual (~1e-16) into the values so cdf(1) == 1 exactly.
        const double rescale = 1.0 / acc;
        for (double& v : cdf_val_) v *= rescale;
    }

    void validate_moments() const {
        const auto& rule = gauss_legendre(64);
        double mass = 0.0, odd = 0.0;
        for (int panel = 0; panel < 8; ++panel) {
            const double a = -1.0 + 0.25 * panel, b = a + 0.25;
            for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
                const double x = 0.5 * (a + b) + 0.125 * rule.nodes[i];
                const double w = 0.125 * rule.weights[i];
                mass += w * value(x);
                odd += w * x * value(x);
            }
        }
        if (std::abs(mass - 1.0) > 1e-10 || std::abs(odd) > 1e-10)
            throw std::runtime_error("Mollifier: kernel moment validation failed");
    }

    static constexpr int kBins = 8192;
    double norm_ = 0.0;
    double bin_width_ = 2.0 / kBins;
    std::vector<double> cdf_val_;
    std::vector<double> cdf_slope_;
};

struct SmoothMaxResult {
    double value = 0.0;
    Vec gradient;
    SymMat hessian;
};

struct McEstimate {
    double mean = 0.0;
    double standard_error = 0.0;
};

/// Smoothed maximum M_eps(t) = E[max_j(t_j + eps_j Y_j)] with Y_j iid draws
/// from the mollifier, together with its first two derivatives in t.
///
/// Evaluation reduces the m-dimensional average to one-dimensional integrals
/// of products of per-axis kernel CDFs:
///   M_eps(t)      = hi - int prod_j F_j,         F_j(x) = Phi((x - t_j)/eps_j)
///   dM/dt_j       = int phi_j prod_{i != j} F_i
///   d2M/dt_i dt_j = -int phi_i phi_j prod_{k != i,j} F_k     (i != j)
/// with the diagonal closed by the zero-row-sum identity, which makes the
/// Hessian weakly diagonally dominant (hence PSD) by construction. The
/// integrands are C-infinity, so composite Gauss-Legendre split at the
/// support endpoints t_j +- eps_j converges spectrally; panels are bisected
/// until refinement stalls below refine_tol.
class SmoothMaxEngine {
  public:
    explicit SmoothMaxEngine(int quadrature_degree = 24, double pruning_tol = 0.0,
                             double refine_tol = 1e-12)
        : degree_(quadrature_degree), pruning_tol_(pruning_tol), refine_tol_(refine_tol) {
        if (degree_ < 8) throw std::invalid_argument("SmoothMaxEngine: quadrature degree must be >= 8");
        if (pruning_tol_ < 0.0) throw std::invalid_argument("SmoothMaxEngine: pruning tolerance must be >= 0");
        if (refine_tol_ <= 0.0) throw std::invalid_argument("SmoothMaxEngine: refine tolerance must be > 0");
    }

    const Mollifier& mollifier() const { return mollifier_; }
    int quadrature_degree() const { return degree_; }
    double pruning_tol() const { return pruning_tol_; }

    /// Indices that survive iterated removal of arguments j with
    /// t_j + eps_j <= max_{i != j}(t_i - eps_i); removal is inclusive at
    /// equality. Dropping a removed argument does not change M_eps.
    std::vector<int> active_set(const Vec& t, const Vec& eps) const {
        check_inputs(t, eps);
        const int m = static_cast<int>(t.size());
        std::vector<int> act(m);
        for (int j = 0; j < m; ++j) act[j] = j;
        bool changed = true;
        while (changed && act.size() > 1) {
            changed = false;
            for (std::size_t a = 0; a < act.size(); ++a) {
                double other = -std::numeric_limits<double>::infinity();
                for (std::size_t b = 0; b < act.size(); ++b)
                    if (b != a) other = std::max(other, t[act[b]] - eps[act[b]]);
                if (t[act[a]] + eps[act[a]] <= other + pruning_tol_) {
                    act.erase(act.begin() + a);
                    changed = true;
                    break;
                }
            }
        }
        return act;
    }

    SmoothMaxResult evaluate(const Vec& t, const Vec& eps) const {
        check_inputs(t, eps);
        const int m = static_cast<int>(t.size());
        SmoothMaxResult out;
        out.gradient.assign(m, 0.0);
        out.hessian = SymMat(m);

        const std::vector<int> act = active_set(t, eps);
        const int k = static_cast<int>(act.size());
        if (k > 6)
            throw std::invalid_argument("SmoothMaxEngine: more than 6 active arguments unsupported");
        if (k == 1) {
            out.value = t[act[0]];
            out.gradient[act[0]] = 1.0;
            return out;
        }

        Vec ta(k), ea(k);
        for (int a = 0; a < k; ++a) { ta[a] = t[act[a]]; ea[a] = eps[act[a]]; }

        double lo = -std::numeric_limits<double>::infinity();
        double hi = -std::numeric_limits<double>::infinity();
        for (int a = 0; a < k; ++a) {
            lo = std::max(lo, ta[a] - ea[a]);
            hi = std::max(hi, ta[a] + ea[a]);
        }

        std::vector<double> cuts{lo, hi};
        for (int a = 0; a < k; ++a) {
            if (ta[a] - ea[a] > lo && ta[a] - ea[a] < hi) cuts.push_back(ta[a] - ea[a]);
            if (ta[a] + ea[a] > lo && ta[a] + ea[a] < hi) cuts.push_back(ta[a] + ea[a]);
        }
        std::sort(cuts.begin(), cuts.end());
        cuts.erase(std::unique(cuts.begin(), cuts.end(),
                               [](double a, double b) { return std::abs(a - b) < 1e-14; }),
                   cuts.end());

        // Integrand vector: [ prod F | grad_0..grad_{k-1} | pairs (i<j) ].
        const int npairs = k * (k - 1) / 2;
        const int dims = 1 + k + npairs;
        Vec cdf(k), pdf(k), pre(k + 1), suf(k + 1), integral(dims, 0.0), buf(dims);

        auto integrand = [&](double x, Vec& f) {
            for (int a = 0; a < k; ++a) {
                const double s = (x - ta[a]) / ea[a];
                cdf[a] = mollifier_.cdf(s);
                pdf[a] = mollifier_.value(s) / ea[a];
            }
            pre[0] = 1.0;
            for (int a = 0; a < k; ++a) pre[a + 1] = pre[a] * cdf[a];
            suf[k] = 1.0;
            for (int a = k - 1; a >= 0; --a) suf[a] = suf[a + 1] * cdf[a];
            f[0] = pre[k];
            for (int a = 0; a < k; ++a) f[1 + a] = pdf[a] * pre[a] * suf[a + 1];
            int slot = 1 + k;
            for (int i = 0; i < k; ++i) {
                for (int j = i + 1; j < k; ++j) {
                    double rest = 1.0;
                    for (int c = 0; c < k; ++c)
                        if (c != i && c != j) rest *= cdf[c];
                    f[slot++] = pdf[i] * pdf[j] * rest;
                }
            }
        };

        for (std::size_t c = 0; c + 1 < cuts.size(); ++c)
            integrate_adaptive(integrand, cuts[c], cuts[c + 1], dims, 0, integral, buf);

        out.value = hi - integral[0];
        for (int a = 0; a < k; ++a) out.gradient[act[a]] = integral[1 + a];
        int slot = 1 + k;
        for (int i = 0; i < k; ++i)
            for (int j = i + 1; j < k; ++j)
                out.hessian.set(act[i], act[j], -integral[slot++]);
        for (int i = 0; i < k; ++i) {
            double row = 0.0;
            for (int j = 0; j < k; ++j)
                if (j != i) row += out.hessian(act[i], act[j]);
            out.hessian.set(act[i], act[i], -row);
        }
        return out;
    }

    double smooth_max(const Vec& t, const Vec& eps) const { return evaluate(t, eps).value; }
    Vec smooth_max_gradient(const Vec& t, const Vec& eps) const { return evaluate(t, eps).gradient; }
    SymMat smooth_max_hessian(const Vec& t, const Vec& eps) const { return evaluate(t, eps).hessian; }

    /// E = M_eps(t) - sum_j dM/dt_j * t_j; bounded by max_j eps_j in
    /// absolute value.
    double error_term(const Vec& t, const Vec& eps) const {
        const SmoothMaxResult r = evaluate(t, eps);
        return r.value - dot(r.gradient, t);
    }

    /// Jet of x -> M_eps(u_1(x), ..., u_m(x)) given the jets of the u_j at
    /// one point, with t_j = u_j(x):
    ///   J = sum_j w_j J_j + (E, 0, P),  w_j = dM/dt_j,
    ///   P = sum_{i,j} d2M/dt_i dt_j  Du_i o Du_j  (o = symmetric product).
    Jet2 compose_jet(const std::vector<Jet2>& jets, const Vec& t, const Vec& eps) const {
        if (jets.size() != t.size() || jets.empty())
            throw std::invalid_argument("compose_jet: need matching nonempty jets/t");
        const int n = jets.front().dim();
        for (std::size_t j = 0; j < jets.size(); ++j) {
            if (jets[j].dim() != n) throw std::invalid_argument("compose_jet: jet dimension mismatch");
            if (std::abs(jets[j].r - t[j]) > 1e-9)
                throw std::invalid_argument("compose_jet: t entries must equal jet values");
        }
        const SmoothMaxResult r = evaluate(t, eps);
        Jet2 out(r.value, Vec(n, 0.0), SymMat(n));
        const int m = static_cast<int>(jets.size());
        for (int j = 0; j < m; ++j) {
            if (r.gradient[j] == 0.0) continue;
            for (int i = 0; i < n; ++i) out.p[i] += r.gradient[j] * jets[j].p[i];
            out.A.axpy(r.gradient[j], jets[j].A);
        }
        for (int i = 0; i < m; ++i)
            for (int j = 0; j < m; ++j)
                if (r.hessian(i, j) != 0.0) out.A.add_sym_outer(r.hessian(i, j), jets[i].p, jets[j].p);
        return out;
    }

    /// Monte-Carlo estimate of M_eps(t) by rejection-sampled kernel draws.
    /// Deterministic for a fixed seed; oracle for the quadrature path.
    McEstimate mc_oracle_smooth_max(const Vec& t, const Vec& eps, long samples,
                                    std::uint64_t seed) const {
        check_inputs(t, eps);
        if (samples < 10000)
            throw std::invalid_argument("mc_oracle_smooth_max: need at least 1e4 samples");
        const int m = static_cast<int>(t.size());
        Rng rng(seed);
        const double peak = mollifier_.peak();
        double sum = 0.0, sumsq = 0.0;
        for (long s = 0; s < samples; ++s) {
            double best = -std::numeric_limits<double>::infinity();
            for (int j = 0; j < m; ++j) {
                double y;
                for (;;) {
                    y = rng.uniform(-1.0, 1.0);
                    if (rng.uniform(0.0, peak) <= mollifier_.value(y)) break;
                }
                best = std::max(best, t[j] + eps[j] * y);
            }
            sum += best;
            sumsq += best * best;
        }
        McEstimate est;
        est.mean = sum / static_cast<double>(samples);
        const double var =
            std::max(0.0, (sumsq - static_cast<double>(samples) * est.mean * est.mean) /
                              (static_cast<double>(samples) - 1.0));
        est.standard_error = std::sqrt(var / static_cast<double>(samples));
        return est;
    }

  private:
    static void check_inputs(const Vec& t, const Vec& eps) {
        if (t.empty() || t.size() != eps.size())
            throw std::invalid_argument("smooth_max: need matching nonempty t/eps");
        for (std::size_t j = 0; j < t.size(); ++j) {
            if (!std::isfinite(t[j]) || !std::isfinite(eps[j]))
                throw std::invalid_argument("smooth_max: inputs must be finite");
            if (eps[j] <= 0.0)
                throw std::invalid_argument("smooth_max: widths must be strictly positive");
        }
    }

    template <typename F>
    void integrate_adaptive(F& f, double a, double b, int dims, int depth, Vec& total,
                            Vec& buf) const {
        Vec whole(dims, 0.0), left(dims, 0.0), right(dims, 0.0);
        panel(f, a, b, dims, whole, buf);
        const double mid = 0.5 * (a + b);
        panel(f, a, mid, dims, left, buf);
        panel(f, mid, b, dims, right, buf);
        double diff = 0.0;
        for (int d = 0; d < dims; ++d)
            diff = std::max(diff, std::abs(whole[d] - (left[d] + right[d])));
        if (diff <= refine_tol_ || depth >= 28) {
            for (int d = 0; d < dims; ++d) total[d] += left[d] + right[d];
            return;
        }
        integrate_adaptive(f, a, mid, dims, depth + 1, total, buf);
        integrate_adaptive(f, mid, b, dims, depth + 1, total, buf);
    }

    template <typename F>
    void panel(F& f, double a, double b, int dims, Vec& out, Vec& buf) const {
        const auto& rule = gauss_legendre(degree_);
        const double c = 0.5 * (a + b), hw = 0.5 * (b - a);
        for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
            f(c + hw * rule.nodes[i], buf);
            const double w = hw * rule.weights[i];
            for (int d = 0; d < dims; ++d) out[d] += w * buf[d];
        }
    }

    Mollifier mollifier_;
    int degree_;
    double pruning_tol_;
    double refine_tol_;
};

}  // namespace richberg
