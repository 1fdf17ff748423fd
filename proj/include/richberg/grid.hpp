#pragma once

#include <fstream>
#include <sstream>

#include "json.hpp"
#include "richberg/jets.hpp"

namespace richberg {

enum NodeMask : std::uint8_t { kOutside = 0, kInterior = 1, kBoundary = 2 };

/// Uniform n-dimensional grid sample with a node classification mask.
/// Values are meaningful (and must be finite) on interior and boundary
/// nodes only; outside nodes are placeholders.
struct GridField {
    Vec origin;
    double spacing = 0.0;
    std::vector<int> extents;
    std::vector<double> values;
    std::vector<std::uint8_t> mask;

    GridField() = default;
    GridField(Vec origin_, double spacing_, std::vector<int> extents_)
        : origin(std::move(origin_)), spacing(spacing_), extents(std::move(extents_)) {
        if (spacing <= 0.0) throw std::invalid_argument("GridField: spacing must be positive");
        if (extents.empty() || extents.size() != origin.size())
            throw std::invalid_argument("GridField: origin/extents dimension mismatch");
        std::size_t total = 1;
        for (int e : extents) {
            if (e < 1) throw std::invalid_argument("GridField: extents must be >= 1");
            total *= static_cast<std::size_t>(e);
        }
        values.assign(total, 0.0);
        mask.assign(total, kOutside);
    }

    int dim() const { return static_cast<int>(extents.size()); }
    std::size_t size() const { return values.size(); }

    std::size_t flat(const std::vector<int>& idx) const {
        std::size_t f = 0;
        for (int d = 0; d < dim(); ++d) {
            if (idx[d] < 0 || idx[d] >= extents[d]) throw std::out_of_range("GridField: index out of range");
            f = f * static_cast<std::size_t>(extents[d]) + static_cast<std::size_t>(idx[d]);
        }
        return f;
    }

    std::vector<int> unflat(std::size_t f) const {
        std::vector<int> idx(dim());
        for (int d = dim() - 1; d >= 0; --d) {
            idx[d] = static_cast<int>(f % static_cast<std::size_t>(extents[d]));
            f /= static_cast<std::size_t>(extents[d]);
        }
        return idx;
    }

    Vec node_position(const std::vector<int>& idx) const {
        Vec x(dim());
        for (int d = 0; d < dim(); ++d) x[d] = origin[d] + spacing * idx[d];
        return x;
    }

    bool available(std::size_t f) const { return mask[f] != kOutside; }

    /// True when every node in the 3^n box around idx exists and is not
    /// outside the mask; the requirement for a centered second-order jet.
    bool has_full_stencil(const std::vector<int>& idx) const {
        if (mask[flat(idx)] != kInterior) return false;
        std::vector<int> nb(idx);
        return stencil_ok(idx, nb, 0);
    }

    void check_finite() const {
        for (std::size_t f = 0; f < size(); ++f)
            if (available(f) && !std::isfinite(values[f]))
                throw std::runtime_error("GridField: non-finite value on an available node");
    }

  private:
    bool stencil_ok(const std::vector<int>& idx, std::vector<int>& nb, int d) const {
        if (d == dim()) return mask[flat(nb)] != kOutside;
        for (int o = -1; o <= 1; ++o) {
            nb[d] = idx[d] + o;
            if (nb[d] < 0 || nb[d] >= extents[d]) return false;
            if (!stencil_ok(idx, nb, d + 1)) return false;
        }
        nb[d] = idx[d];
        return true;
    }
};

/// Centered second-order differences: exact on quadratics. Requires a full
/// 3^n stencil of available nodes around an interior node. With reduced set,
/// the value slot is zeroed (reduced jets carry (p, A) only).
inline Jet2 finite_difference_jet(const GridField& f, const std::vector<int>& idx,
                                  bool reduced = false) {
    const int n = f.dim();
    if (static_cast<int>(idx.size()) != n) throw std::invalid_argument("finite_difference_jet: index dimension");
    if (!f.has_full_stencil(idx))
        throw std::invalid_argument("finite_difference_jet: stencil leaves the domain mask");
    const double h = f.spacing;
    auto at = [&](const std::vector<int>& i) { return f.values[f.flat(i)]; };

    Jet2 out(reduced ? 0.0 : at(idx), Vec(n, 0.0), SymMat(n));
    std::vector<int> a(idx), b(idx);
    for (int d = 0; d < n; ++d) {
        a[d] += 1;
        b[d] -= 1;
        out.p[d] = (at(a) - at(b)) / (2.0 * h);
        out.A.set(d, d, (at(a) - 2.0 * at(idx) + at(b)) / (h * h));
        a[d] = idx[d];
        b[d] = idx[d];
    }
    for (int d = 0; d < n; ++d) {
        for (int e = d + 1; e < n; ++e) {
            std::vector<int> pp(idx), pm(idx), mp(idx), mm(idx);
            pp[d] += 1; pp[e] += 1;
            pm[d] += 1; pm[e] -= 1;
            mp[d] -= 1; mp[e] += 1;
            mm[d] -= 1; mm[e] -= 1;
            out.A.set(d, e, (at(pp) - at(pm) - at(mp) + at(mm)) / (4.0 * h * h));
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// Serialization: one-line JSON header (origin, spacing, extents), then a CSV
// body with one row per node in row-major order: indices, value, mask.

inline void write_grid_field(const GridField& f, const std::string& path) {
    f.check_finite();
    std::ofstream out(path);
    if (!out) throw std::runtime_error("write_grid_field: cannot open " + path);
    nlohmann::json header;
    header["origin"] = f.origin;
    header["spacing"] = f.spacing;
    header["extents"] = f.extents;
    out << header.dump() << "\n";
    for (int d = 0; d < f.dim(); ++d) out << "i" << d << ",";
    out << "value,mask\n";
    for (std::size_t k = 0; k < f.size(); ++k) {
        const auto idx = f.unflat(k);
        for (int d = 0; d < f.dim(); ++d) out << idx[d] << ",";
        out << format_double(f.values[k]) << "," << static_cast<int>(f.mask[k]) << "\n";
    }
    if (!out) throw std::runtime_error("write_grid_field: write failed for " + path);
}

inline GridField read_grid_field(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("read_grid_field: cannot open " + path);
    std::string line;
    if (!std::getline(in, line)) throw std::runtime_error("read_grid_field: missing header");
    nlohmann::json header;
    try {
        header = nlohmann::json::parse(line);
    } catch (const nlohmann::json::parse_error& e) {
        throw std::runtime_error(std::string("read_grid_field: bad header: ") + e.what());
    }
    if (!header.contains("origin") || !header.contains("spacing") || !header.contains("extents"))
        throw std::runtime_error("read_grid_field: header needs origin, spacing, extents");
    GridField f(header["origin"].get<Vec>(), header["spacing"].get<double>(),
                header["extents"].get<std::vector<int>>());
    if (!std::getline(in, line)) throw std::runtime_error("read_grid_field: missing column row");
    std::size_t row = 0;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        if (row >= f.size()) throw std::runtime_error("read_grid_field: more rows than grid nodes");
        std::stringstream ss(line);
        std::string cell;
        for (int d = 0; d < f.dim(); ++d) {
            if (!std::getline(ss, cell, ',')) throw std::runtime_error("read_grid_field: short row");
            if (std::stoi(cell) != f.unflat(row)[d])
                throw std::runtime_error("read_grid_field: index column mismatch at row " +
                                         std::to_string(row));
        }
        if (!std::getline(ss, cell, ',')) throw std::runtime_error("read_grid_field: missing value");
        f.values[row] = std::stod(cell);
        if (!std::getline(ss, cell, ',')) throw std::runtime_error("read_grid_field: missing mask");
        const int m = std::stoi(cell);
        if (m < 0 || m > 2) throw std::runtime_error("read_grid_field: mask must be 0, 1 or 2");
        f.mask[row] = static_cast<std::uint8_t>(m);
        ++row;
    }
    if (row != f.size()) throw std::runtime_error("read_grid_field: fewer rows than grid nodes");
    f.check_finite();
    return f;
}

}  // namespace richberg
