#pragma once

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"
#include "richberg/gluing.hpp"
#include "richberg/localapprox.hpp"
#include "richberg/subequations.hpp"

namespace richberg {

/// Config-shape problem: unknown keys, wrong types, out-of-range values,
/// unreadable referenced files. Distinct from runtime_error so the CLI can
/// map shape problems to their own exit code.
struct SchemaError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

namespace scenario_detail {

using json = nlohmann::json;

[[noreturn]] inline void fail(const std::string& where, const std::string& what) {
    throw SchemaError(where + ": " + what);
}

inline const json& require(const json& obj, const std::string& key, const std::string& where) {
    if (!obj.is_object()) fail(where, "expected an object");
    const auto it = obj.find(key);
    if (it == obj.end()) fail(where, "missing required key '" + key + "'");
    return *it;
}

inline double number(const json& v, const std::string& where) {
    if (!v.is_number()) fail(where, "expected a number");
    return v.get<double>();
}

inline double positive(const json& v, const std::string& where) {
    const double x = number(v, where);
    if (!(x > 0.0)) fail(where, "expected a positive number");
    return x;
}

inline int integer(const json& v, const std::string& where) {
    if (!v.is_number_integer()) fail(where, "expected an integer");
    return v.get<int>();
}

inline std::string text(const json& v, const std::string& where) {
    if (!v.is_string()) fail(where, "expected a string");
    return v.get<std::string>();
}

inline Vec vec(const json& v, const std::string& where, int want_dim = -1) {
    if (!v.is_array() || v.empty()) fail(where, "expected a nonempty array of numbers");
    Vec out;
    for (const auto& e : v) out.push_back(number(e, where));
    if (want_dim >= 0 && static_cast<int>(out.size()) != want_dim)
        fail(where, "expected " + std::to_string(want_dim) + " entries, got " +
                        std::to_string(out.size()));
    return out;
}

inline SymMat matrix(const json& v, const std::string& where, int n) {
    if (!v.is_array() || static_cast<int>(v.size()) != n)
        fail(where, "expected " + std::to_string(n) + " rows");
    std::vector<double> raw(static_cast<std::size_t>(n) * n);
    for (int i = 0; i < n; ++i) {
        const Vec row = vec(v[static_cast<std::size_t>(i)], where + " row " + std::to_string(i), n);
        for (int j = 0; j < n; ++j) raw[static_cast<std::size_t>(i) * n + j] = row[j];
    }
    return SymMat(n, raw);  // construction symmetrizes
}

/// line/column of a byte offset in raw text, 1-based, for parse diagnostics.
inline std::pair<std::size_t, std::size_t> line_column(const std::string& raw, std::size_t byte) {
    std::size_t line = 1, col = 1;
    for (std::size_t i = 0; i < byte && i < raw.size(); ++i) {
        if (raw[i] == '\n') {
            ++line;
            col = 1;
        } else {
            ++col;
        }
    }
    return {line, col};
}

}  // namespace scenario_detail

// ---------------------------------------------------------------------------
// Function forms. Three analytic forms plus a grid-file form that is only
// legal where the scenario lattice is the evaluation lattice.

struct FunctionSpec {
    std::string form;
    std::function<double(const Vec&)> fn;

    double operator()(const Vec& x) const { return fn(x); }
    bool valid() const { return static_cast<bool>(fn); }
};

inline FunctionSpec parse_function(const nlohmann::json& spec, const std::string& where, int dim,
                                   const std::filesystem::path& base_dir,
                                   const GridField* lattice = nullptr) {
    namespace sd = scenario_detail;
    FunctionSpec out;
    if (spec.is_number()) {  // bare number means a constant
        const double v = spec.get<double>();
        out.form = "constant";
        out.fn = [v](const Vec&) { return v; };
        return out;
    }
    out.form = sd::text(sd::require(spec, "form", where), where + ".form");
    if (out.form == "constant") {
        const double v = sd::number(sd::require(spec, "value", where), where + ".value");
        out.fn = [v](const Vec&) { return v; };
        return out;
    }
    if (out.form == "quadratic") {
        QuadraticSpec q;
        q.r0 = spec.contains("r0") ? sd::number(spec["r0"], where + ".r0") : 0.0;
        q.p0 = spec.contains("p0") ? sd::vec(spec["p0"], where + ".p0", dim) : Vec(dim, 0.0);
        q.A0 = sd::matrix(sd::require(spec, "A0", where), where + ".A0", dim);
        q.center =
            spec.contains("center") ? sd::vec(spec["center"], where + ".center", dim) : Vec(dim, 0.0);
        out.fn = [q](const Vec& x) { return q.value(x); };
        return out;
    }
    if (out.form == "expression") {
        const auto& terms = sd::require(spec, "terms", where);
        if (!terms.is_array() || terms.empty()) sd::fail(where + ".terms", "expected a nonempty array");
        struct Monomial {
            double coef;
            std::vector<int> powers;
        };
        struct Wave {
            bool is_sin;
            double coef, freq, phase;
            int axis;
        };
        std::vector<Monomial> monomials;
        std::vector<Wave> waves;
        double norm2_coef = 0.0;
        for (std::size_t i = 0; i < terms.size(); ++i) {
            const std::string tw = where + ".terms[" + std::to_string(i) + "]";
            const auto& t = terms[i];
            const std::string type = sd::text(sd::require(t, "type", tw), tw + ".type");
            const double coef = sd::number(sd::require(t, "coef", tw), tw + ".coef");
            if (type == "monomial") {
                const auto& pw = sd::require(t, "powers", tw);
                if (!pw.is_array() || static_cast<int>(pw.size()) != dim)
                    sd::fail(tw + ".powers", "expected " + std::to_string(dim) + " exponents");
                Monomial m{coef, {}};
                for (const auto& e : pw) {
                    const int p = sd::integer(e, tw + ".powers");
                    if (p < 0 || p > 12) sd::fail(tw + ".powers", "exponents must be in [0, 12]");
                    m.powers.push_back(p);
                }
                monomials.push_back(std::move(m));
            } else if (type == "norm2") {
                norm2_coef += coef;
            } else if (type == "sin" || type == "cos") {
                Wave w{type == "sin", coef, 1.0, 0.0, 0};
                w.axis = sd::integer(sd::require(t, "axis", tw), tw + ".axis");
                if (w.axis < 0 || w.axis >= dim) sd::fail(tw + ".axis", "axis out of range");
                if (t.contains("freq")) w.freq = sd::number(t["freq"], tw + ".freq");
                if (t.contains("phase")) w.phase = sd::number(t["phase"], tw + ".phase");
                waves.push_back(w);
            } else {
                sd::fail(tw + ".type",
                         "unknown term '" + type + "' (monomial, norm2, sin and cos are allowed)");
            }
        }
        out.fn = [monomials, waves, norm2_coef](const Vec& x) {
            double v = 0.0;
            for (const auto& m : monomials) {
                double term = m.coef;
                for (std::size_t d = 0; d < x.size(); ++d)
                    for (int p = 0; p < m.powers[d]; ++p) term *= x[d];
                v += term;
            }
            if (norm2_coef != 0.0) v += norm2_coef * dot(x, x);
            for (const auto& w : waves) {
                const double arg = w.freq * x[static_cast<std::size_t>(w.axis)] + w.phase;
                v += w.coef * (w.is_sin ? std::sin(arg) : std::cos(arg));
            }
            return v;
        };
        return out;
    }
    if (out.form == "grid") {
        if (lattice == nullptr)
            sd::fail(where, "grid-form functions are only allowed where the scenario grid is the "
                            "evaluation lattice");
        const std::string rel = sd::text(sd::require(spec, "path", where), where + ".path");
        const std::filesystem::path full = base_dir / rel;
        GridField data;
        try {
            data = read_grid_field(full.string());
        } catch (const std::exception& e) {
            sd::fail(where, std::string("cannot load grid file: ") + e.what());
        }
        const auto close = [](double a, double b) { return std::abs(a - b) <= 1e-12; };
        bool same = data.dim() == lattice->dim() && close(data.spacing, lattice->spacing) &&
                    data.extents == lattice->extents;
        for (int d = 0; same && d < data.dim(); ++d) same = close(data.origin[d], lattice->origin[d]);
        if (!same)
            sd::fail(where, "grid file lattice does not match the scenario grid (origin, spacing "
                            "and extents must agree)");
        auto field = std::make_shared<GridField>(std::move(data));
        out.fn = [field](const Vec& x) {
            std::vector<int> idx(static_cast<std::size_t>(field->dim()));
            for (int d = 0; d < field->dim(); ++d) {
                const double rel_pos = (x[d] - field->origin[d]) / field->spacing;
                const double snapped = std::round(rel_pos);
                if (std::abs(rel_pos - snapped) > 1e-9)
                    throw std::runtime_error("grid-form function evaluated off-lattice");
                idx[d] = static_cast<int>(snapped);
                if (idx[d] < 0 || idx[d] >= field->extents[d])
                    throw std::runtime_error("grid-form function evaluated outside its lattice");
            }
            return field->values[field->flat(idx)];
        };
        return out;
    }
    sd::fail(where + ".form", "unknown form '" + out.form +
                                  "' (constant, quadratic, expression and grid are allowed)");
}

// ---------------------------------------------------------------------------
// Constraint-set form.

inline FiberSpec parse_fiber(const nlohmann::json& spec, const std::string& where) {
    namespace sd = scenario_detail;
    const std::string kind = sd::text(sd::require(spec, "kind", where), where + ".kind");
    const int dim = sd::integer(sd::require(spec, "dim", where), where + ".dim");
    if (dim < 1 || dim > 8) sd::fail(where + ".dim", "dimension must be in [1, 8]");
    FiberSpec fiber;
    if (kind == "trace-cone") {
        fiber = FiberSpec::trace_cone(dim);
    } else if (kind == "psd-cone") {
        fiber = FiberSpec::psd_cone(dim);
    } else if (kind == "fn-cone") {
        fiber = FiberSpec::fn_cone(dim);
    } else if (kind == "halfspace") {
        SymMat normal(1);
        try {
            normal = sd::matrix(sd::require(spec, "normal", where), where + ".normal", dim);
        } catch (const SchemaError&) {
            throw;
        }
        const double offset =
            spec.contains("offset") ? sd::number(spec["offset"], where + ".offset") : 0.0;
        try {
            fiber = FiberSpec::halfspace(normal, offset);
        } catch (const std::invalid_argument& e) {
            sd::fail(where, e.what());
        }
    } else if (kind == "grassmannian") {
        const auto& planes = sd::require(spec, "planes", where);
        if (planes.is_string() && planes.get<std::string>() == "axes") {
            fiber = FiberSpec::grassmannian(PlaneList::axes(dim));
        } else {
            if (!planes.is_array() || planes.empty())
                sd::fail(where + ".planes", "expected \"axes\" or an array of planes");
            std::vector<std::vector<Vec>> pls;
            for (std::size_t i = 0; i < planes.size(); ++i) {
                const auto& pl = planes[i];
                const std::string w = where + ".planes[" + std::to_string(i) + "]";
                if (!pl.is_array() || pl.empty()) sd::fail(w, "expected an array of basis vectors");
                std::vector<Vec> basis;
                for (const auto& bv : pl) basis.push_back(sd::vec(bv, w, dim));
                pls.push_back(std::move(basis));
            }
            try {
                fiber = FiberSpec::grassmannian(
                    PlaneList(dim, static_cast<int>(pls.front().size()), std::move(pls)));
            } catch (const std::invalid_argument& e) {
                sd::fail(where + ".planes", e.what());
            }
        }
    } else {
        sd::fail(where + ".kind", "unknown fiber kind '" + kind + "'");
    }
    if (spec.contains("shifted") && spec["shifted"].is_boolean() && spec["shifted"].get<bool>())
        fiber = fiber.shifted();
    return fiber;
}

// ---------------------------------------------------------------------------
// Scenario: parsed configuration, ready to run.

struct GluePieceSpec {
    std::string name;
    Vec center;
    double radius = 0.0;
    double c = 0.0;
    double omega_radius = 0.0;
    double core_radius = 0.0;
    double quasi_eps = 0.0;
    double value_shift = 0.0;
};

struct Scenario {
    std::string name;
    std::string kind;  // "glue" or "dp"
    int quadrature_degree = 24;
    FiberSpec fiber;

    // glue
    GridField grid;  // shared lattice, values unset
    FunctionSpec u;
    FunctionSpec allowance;
    FunctionSpec g, g_prime;  // optional; defaults derived from u when absent
    std::vector<GluePieceSpec> pieces;

    // dp
    std::string mode;
    BallDomain ball{Vec{0.0}, 1.0, 1.0};
    double spacing = 0.0;
    double core_radius = 0.0;
    double quasi_eps = 0.0;
    FunctionSpec boundary, exact, psi;
    std::vector<int> k_list;
    std::vector<double> eps_list;
    std::vector<double> spacings;
};

/// Quadrature degree with the environment override applied. The variable
/// wins over the config so a rebuilt report can probe quadrature sensitivity
/// without editing scenario files.
inline int effective_quadrature_degree(int config_value) {
    const char* env = std::getenv("RICHBERG_QUAD_DEGREE");
    if (env == nullptr || *env == '\0') return config_value;
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end == nullptr || *end != '\0' || v < 4 || v > 200)
        throw SchemaError("RICHBERG_QUAD_DEGREE must be an integer in [4, 200], got '" +
                          std::string(env) + "'");
    return static_cast<int>(v);
}

inline Scenario parse_scenario(const nlohmann::json& root, const std::string& default_name,
                               const std::filesystem::path& base_dir) {
    namespace sd = scenario_detail;
    if (!root.is_object()) sd::fail("config", "top level must be an object");
    Scenario sc;
    sc.name = root.contains("name") ? sd::text(root["name"], "name") : default_name;
    sc.kind = sd::text(sd::require(root, "kind", "config"), "kind");
    if (root.contains("quadrature_degree")) {
        sc.quadrature_degree = sd::integer(root["quadrature_degree"], "quadrature_degree");
        if (sc.quadrature_degree < 4 || sc.quadrature_degree > 200)
            sd::fail("quadrature_degree", "must be in [4, 200]");
    }
    sc.quadrature_degree = effective_quadrature_degree(sc.quadrature_degree);
    sc.fiber = parse_fiber(sd::require(root, "fiber", "config"), "fiber");
    const int dim = sc.fiber.dim;

    if (sc.kind == "glue") {
        const auto& grid = sd::require(root, "grid", "config");
        const Vec origin = sd::vec(sd::require(grid, "origin", "grid"), "grid.origin", dim);
        const double spacing = sd::positive(sd::require(grid, "spacing", "grid"), "grid.spacing");
        const auto& ext = sd::require(grid, "extents", "grid");
        if (!ext.is_array() || static_cast<int>(ext.size()) != dim)
            sd::fail("grid.extents", "expected " + std::to_string(dim) + " extents");
        std::vector<int> extents;
        for (const auto& e : ext) {
            const int v = sd::integer(e, "grid.extents");
            if (v < 5 || v > 4096) sd::fail("grid.extents", "extents must be in [5, 4096]");
            extents.push_back(v);
        }
        sc.grid = make_box_grid(origin, spacing, extents);
        sc.u = parse_function(sd::require(root, "u", "config"), "u", dim, base_dir, &sc.grid);
        sc.allowance =
            parse_function(sd::require(root, "allowance", "config"), "allowance", dim, base_dir);
        if (root.contains("g")) sc.g = parse_function(root["g"], "g", dim, base_dir);
        if (root.contains("g_prime"))
            sc.g_prime = parse_function(root["g_prime"], "g_prime", dim, base_dir);
        const auto& pieces = sd::require(root, "pieces", "config");
        if (!pieces.is_array() || pieces.size() < 2)
            sd::fail("pieces", "need at least two cover pieces");
        for (std::size_t i = 0; i < pieces.size(); ++i) {
            const std::string w = "pieces[" + std::to_string(i) + "]";
            const auto& p = pieces[i];
            GluePieceSpec ps;
            ps.name = sd::text(sd::require(p, "name", w), w + ".name");
            ps.center = sd::vec(sd::require(p, "center", w), w + ".center", dim);
            ps.radius = sd::positive(sd::require(p, "radius", w), w + ".radius");
            ps.c = sd::positive(sd::require(p, "c", w), w + ".c");
            ps.omega_radius = sd::positive(sd::require(p, "omega_radius", w), w + ".omega_radius");
            ps.core_radius = sd::positive(sd::require(p, "core_radius", w), w + ".core_radius");
            ps.quasi_eps = sd::positive(sd::require(p, "quasi_eps", w), w + ".quasi_eps");
            if (p.contains("value_shift"))
                ps.value_shift = sd::number(p["value_shift"], w + ".value_shift");
            for (const auto& other : sc.pieces)
                if (other.name == ps.name) sd::fail(w + ".name", "duplicate piece name");
            sc.pieces.push_back(std::move(ps));
        }
        return sc;
    }

    if (sc.kind == "dp") {
        sc.mode = sd::text(sd::require(root, "mode", "config"), "mode");
        const auto& ball = sd::require(root, "ball", "config");
        const Vec center = sd::vec(sd::require(ball, "center", "ball"), "ball.center", dim);
        const double radius = sd::positive(sd::require(ball, "radius", "ball"), "ball.radius");
        const double c = sd::positive(sd::require(ball, "c", "ball"), "ball.c");
        sc.ball = BallDomain(center, radius, c);

        const auto spacing_list = [&](const char* key) {
            const auto& v = sd::require(root, key, "config");
            if (!v.is_array() || v.empty()) sd::fail(key, "expected a nonempty array");
            std::vector<double> out;
            for (const auto& e : v) {
                const double s = sd::positive(e, key);
                if (sc.ball.radius / s > 2000.0) sd::fail(key, "spacing too fine for the ball");
                out.push_back(s);
            }
            return out;
        };

        if (sc.mode == "quasi") {
            sc.spacing = sd::positive(sd::require(root, "spacing", "config"), "spacing");
            sc.core_radius =
                sd::positive(sd::require(root, "core_radius", "config"), "core_radius");
            if (sc.core_radius >= sc.ball.radius)
                sd::fail("core_radius", "core must sit strictly inside the ball");
            sc.quasi_eps = sd::positive(sd::require(root, "eps", "config"), "eps");
            sc.u = parse_function(sd::require(root, "u", "config"), "u", dim, base_dir);
        } else if (sc.mode == "homogeneous") {
            sc.spacing = sd::positive(sd::require(root, "spacing", "config"), "spacing");
            sc.boundary =
                parse_function(sd::require(root, "boundary", "config"), "boundary", dim, base_dir);
            const auto& ks = sd::require(root, "k_list", "config");
            if (!ks.is_array() || ks.empty()) sd::fail("k_list", "expected a nonempty array");
            for (const auto& e : ks) {
                const int k = sd::integer(e, "k_list");
                if (k < 1 || k > 4096) sd::fail("k_list", "k must be in [1, 4096]");
                sc.k_list.push_back(k);
            }
        } else if (sc.mode == "inhomogeneous") {
            sc.spacing = sd::positive(sd::require(root, "spacing", "config"), "spacing");
            sc.boundary =
                parse_function(sd::require(root, "boundary", "config"), "boundary", dim, base_dir);
            const auto& es = sd::require(root, "eps_list", "config");
            if (!es.is_array() || es.empty()) sd::fail("eps_list", "expected a nonempty array");
            for (const auto& e : es) sc.eps_list.push_back(sd::positive(e, "eps_list"));
        } else if (sc.mode == "harmonic-order") {
            sc.spacings = spacing_list("spacings");
            if (sc.spacings.size() < 2) sd::fail("spacings", "need at least two spacings");
            sc.boundary =
                parse_function(sd::require(root, "boundary", "config"), "boundary", dim, base_dir);
            sc.exact = parse_function(sd::require(root, "exact", "config"), "exact", dim, base_dir);
        } else if (sc.mode == "poisson-exact") {
            sc.spacing = sd::positive(sd::require(root, "spacing", "config"), "spacing");
            sc.boundary =
                parse_function(sd::require(root, "boundary", "config"), "boundary", dim, base_dir);
            sc.psi = parse_function(sd::require(root, "psi", "config"), "psi", dim, base_dir);
            sc.exact = parse_function(sd::require(root, "exact", "config"), "exact", dim, base_dir);
        } else {
            sd::fail("mode", "unknown dp mode '" + sc.mode +
                                 "' (quasi, homogeneous, inhomogeneous, harmonic-order and "
                                 "poisson-exact are allowed)");
        }
        if (sc.spacing > 0.0 && sc.ball.radius / sc.spacing > 2000.0)
            sd::fail("spacing", "spacing too fine for the ball");
        return sc;
    }
    sd::fail("kind", "unknown scenario kind '" + sc.kind + "' (glue or dp)");
}

/// Parses a config file. Malformed JSON is reported with 1-based line and
/// column so the message points into the file.
inline Scenario load_scenario(const std::string& config_path) {
    std::ifstream in(config_path);
    if (!in) throw SchemaError("cannot open config file '" + config_path + "'");
    std::stringstream buffer;
    buffer << in.rdbuf();
    const std::string raw = buffer.str();
    nlohmann::json root;
    try {
        root = nlohmann::json::parse(raw);
    } catch (const nlohmann::json::parse_error& e) {
        const auto [line, col] = scenario_detail::line_column(raw, e.byte > 0 ? e.byte - 1 : 0);
        throw SchemaError("malformed JSON in '" + config_path + "' at line " +
                          std::to_string(line) + ", column " + std::to_string(col) + ": " +
                          e.what());
    }
    const std::filesystem::path p(config_path);
    return parse_scenario(root, p.stem().string(), p.parent_path());
}

// ---------------------------------------------------------------------------
// Execution and reports.

struct ScenarioOutcome {
    bool pass = false;
    nlohmann::ordered_json report;
    std::string csv;
};

namespace scenario_detail {

inline nlohmann::ordered_json grid_json(const GridField& f) {
    nlohmann::ordered_json j;
    j["origin"] = f.origin;
    j["spacing"] = f.spacing;
    j["extents"] = f.extents;
    return j;
}

inline std::string csv_row_prefix(const std::vector<int>& idx) {
    std::string s;
    for (int v : idx) s += std::to_string(v) + ",";
    return s;
}

inline GridField dp_ball_field(const Scenario& sc, double spacing,
                               const std::function<double(const Vec&)>& data,
                               bool boundary_only) {
    GridField f = make_ball_grid(sc.ball, spacing);
    fill_from(f, data, boundary_only);
    return f;
}

}  // namespace scenario_detail

/// Builds the gluing problem a glue scenario describes: sampled input data,
/// budget functions (defaulted off the measured strictness when absent) and
/// one solver-backed cover piece per entry.
inline GluingProblem assemble_glue_problem(const Scenario& sc) {
    GluingProblem pr;
    pr.fiber = sc.fiber;
    pr.u = sc.grid;
    fill_from(pr.u, sc.u.fn);
    pr.u.check_finite();
    pr.engine = SmoothMaxEngine(sc.quadrature_degree);
    pr.allowance = sc.allowance.fn;

    // default budget: 90% of the measured strictness of u, with g' = g / 2.
    if (sc.g.valid()) {
        pr.g = sc.g.fn;
    } else {
        const StrictnessReport rep = field_strictness(pr.fiber, pr.u, 0.0);
        if (!rep.strict)
            throw std::runtime_error("default budget needs strictly subharmonic input data");
        const double g = 0.9 * rep.min_slack;
        pr.g = [g](const Vec&) { return g; };
    }
    if (sc.g_prime.valid()) {
        pr.g_prime = sc.g_prime.fn;
    } else {
        const auto g = pr.g;
        pr.g_prime = [g](const Vec& x) { return 0.5 * g(x); };
    }

    for (const GluePieceSpec& ps : sc.pieces)
        pr.pieces.push_back(make_cover_piece(ps.name, BallDomain(ps.center, ps.radius, ps.c),
                                             ps.omega_radius, ps.core_radius, pr.u, pr.fiber,
                                             ps.quasi_eps, ps.value_shift));
    pr.domain = union_of_cores(pr);
    return pr;
}

inline ScenarioOutcome glue_scenario_report(const Scenario& sc, const GluingProblem& pr,
                                            const GlueOutcome& out) {
    namespace sd = scenario_detail;
    ScenarioOutcome res;
    res.pass = out.pass;
    nlohmann::ordered_json& r = res.report;
    r["scenario"] = sc.name;
    r["kind"] = "glue";
    r["grid"] = sd::grid_json(pr.u);
    r["pass"] = out.pass;
    r["condition_c"] = nlohmann::ordered_json::object();
    r["condition_c"]["pass"] = out.condition_c.pass;
    r["condition_c"]["entries"] = nlohmann::ordered_json::array();
    for (const auto& e : out.condition_c.entries) {
        nlohmann::ordered_json j;
        j["piece"] = e.piece;
        j["oscillation"] = e.oscillation;
        j["min_allowance"] = e.min_allowance;
        j["ok"] = e.ok;
        r["condition_c"]["entries"].push_back(std::move(j));
    }
    r["epsilons"] = nlohmann::ordered_json::array();
    for (std::size_t i = 0; i < out.epsilons.entries.size(); ++i) {
        const auto& e = out.epsilons.entries[i];
        nlohmann::ordered_json j;
        j["piece"] = e.piece;
        j["k"] = pr.pieces[i].k;
        j["core_gap"] = e.core_gap;
        j["boundary_gap"] = e.boundary_gap;
        j["budget_gap"] = e.budget_gap;
        j["strict_slack"] = e.strict_slack;
        j["eps"] = e.eps;
        r["epsilons"].push_back(std::move(j));
    }
    r["sandwich"] = {{"min_lower_gap", out.sandwich.min_lower_gap},
                     {"min_upper_gap", out.sandwich.min_upper_gap},
                     {"worst_lower", out.sandwich.worst_lower},
                     {"worst_upper", out.sandwich.worst_upper},
                     {"nodes", out.sandwich.nodes},
                     {"pass", out.sandwich.pass}};
    r["margins"] = {{"min_slack", out.margins.min_slack},
                    {"worst", out.margins.worst},
                    {"nodes", out.margins.nodes},
                    {"tolerance", out.margins.tolerance},
                    {"pass", out.margins.pass}};
    r["locality"] = {{"boundary_checks", out.locality.boundary_checks},
                     {"boundary_violations", out.locality.boundary_violations},
                     {"min_prune_slack", out.locality.min_prune_slack},
                     {"stability_checks", out.locality.stability_checks},
                     {"max_value_shift", out.locality.max_value_shift},
                     {"pass", out.locality.pass}};

    std::string& csv = res.csv;
    for (int d = 0; d < pr.u.dim(); ++d) csv += "i" + std::to_string(d) + ",";
    csv += "u,w,u_plus_allowance,margin\n";
    for (std::size_t f = 0; f < pr.u.size(); ++f) {
        if (!pr.domain[f]) continue;
        const auto idx = pr.u.unflat(f);
        const Vec x = pr.u.node_position(idx);
        csv += sd::csv_row_prefix(idx) + format_double(pr.u.values[f]) + "," +
               format_double(out.w.values[f]) + "," +
               format_double(pr.u.values[f] + pr.allowance(x)) + "," +
               format_double(margin(pr.fiber, glue_jet(pr, idx))) + "\n";
    }
    return res;
}

inline ScenarioOutcome run_glue_scenario(const Scenario& sc) {
    GluingProblem pr = assemble_glue_problem(sc);
    const GlueOutcome out = run_gluing(pr);
    return glue_scenario_report(sc, pr, out);
}

inline ScenarioOutcome run_dp_scenario(const Scenario& sc) {
    namespace sd = scenario_detail;
    ScenarioOutcome res;
    nlohmann::ordered_json& r = res.report;
    r["scenario"] = sc.name;
    r["kind"] = "dp";
    r["mode"] = sc.mode;

    if (sc.mode == "quasi") {
        GridField u = sd::dp_ball_field(sc, sc.spacing, sc.u.fn, false);
        std::vector<std::uint8_t> core(u.size(), 0);
        for (std::size_t k = 0; k < u.size(); ++k) {
            const Vec x = u.node_position(u.unflat(k));
            double r2 = 0.0;
            for (int d = 0; d < u.dim(); ++d)
                r2 += (x[d] - sc.ball.center[d]) * (x[d] - sc.ball.center[d]);
            if (u.mask[k] == kInterior && r2 <= sc.core_radius * sc.core_radius + 1e-12)
                core[k] = 1;
        }
        const QuasiResult q = quasi_via_dp(sc.fiber, u, core, sc.ball, sc.quasi_eps);
        res.pass = q.report.core_gap > 0.0 && q.report.boundary_gap > 0.0;
        r["grid"] = sd::grid_json(u);
        r["k"] = q.k;
        r["s"] = q.s;
        r["core_gap"] = q.report.core_gap;
        r["boundary_gap"] = q.report.boundary_gap;
        r["pass"] = res.pass;
        std::string& csv = res.csv;
        for (int d = 0; d < u.dim(); ++d) csv += "i" + std::to_string(d) + ",";
        csv += "u,v,v_minus_u,core\n";
        for (std::size_t f = 0; f < u.size(); ++f) {
            if (!u.available(f)) continue;
            csv += sd::csv_row_prefix(u.unflat(f)) + format_double(u.values[f]) + "," +
                   format_double(q.v.values[f]) + "," +
                   format_double(q.v.values[f] - u.values[f]) + "," +
                   (core[f] ? "1" : "0") + "\n";
        }
        return res;
    }

    if (sc.mode == "homogeneous") {
        GridField f = sd::dp_ball_field(sc, sc.spacing, sc.boundary.fn, true);
        const GridField H = solve_laplace_dirichlet(f);
        const std::vector<GridField> vs = homogeneous_approximants(H, sc.ball, sc.k_list);
        r["grid"] = sd::grid_json(f);
        r["k_list"] = sc.k_list;
        nlohmann::ordered_json rows = nlohmann::ordered_json::array();
        std::string& csv = res.csv;
        csv += "k,sup_diff,scaled_diff,strictness\n";
        double reference = 0.0, rate_spread = 0.0, min_strict_slack = 0.0;
        for (std::size_t i = 0; i < vs.size(); ++i) {
            double sup = 0.0;
            for (std::size_t k = 0; k < H.size(); ++k)
                if (H.available(k)) sup = std::max(sup, std::abs(vs[i].values[k] - H.values[k]));
            const double scaled = sup * sc.k_list[i];
            if (i == 0)
                reference = scaled;
            else
                rate_spread = std::max(rate_spread, std::abs(scaled / reference - 1.0));
            const double strict = field_strictness(sc.fiber, vs[i], 0.0).min_slack;
            min_strict_slack = std::min(min_strict_slack,
                                        strict - sc.ball.c / sc.k_list[i] + fd_allowance(sc.spacing));
            nlohmann::ordered_json row;
            row["k"] = sc.k_list[i];
            row["sup_diff"] = sup;
            row["scaled_diff"] = scaled;
            row["strictness"] = strict;
            rows.push_back(std::move(row));
            csv += std::to_string(sc.k_list[i]) + "," + format_double(sup) + "," +
                   format_double(scaled) + "," + format_double(strict) + "\n";
        }
        res.pass = rate_spread <= 0.01 && min_strict_slack >= 0.0;
        r["rows"] = std::move(rows);
        r["rate_spread"] = rate_spread;
        r["rate_tolerance"] = 0.01;
        r["pass"] = res.pass;
        return res;
    }

    if (sc.mode == "inhomogeneous") {
        GridField f = sd::dp_ball_field(sc, sc.spacing, sc.boundary.fn, true);
        const InhomogeneousResult fam = inhomogeneous_approximants(f, sc.ball, sc.eps_list);
        r["grid"] = sd::grid_json(f);
        nlohmann::ordered_json rows = nlohmann::ordered_json::array();
        std::string& csv = res.csv;
        csv += "eps,sup_diff,lower_violation,upper_violation\n";
        for (std::size_t i = 0; i < fam.report.eps.size(); ++i) {
            nlohmann::ordered_json row;
            row["eps"] = fam.report.eps[i];
            row["sup_diff"] = fam.report.sup_diff[i];
            row["lower_violation"] = fam.report.lower_violation[i];
            row["upper_violation"] = fam.report.upper_violation[i];
            rows.push_back(std::move(row));
            csv += format_double(fam.report.eps[i]) + "," + format_double(fam.report.sup_diff[i]) +
                   "," + format_double(fam.report.lower_violation[i]) + "," +
                   format_double(fam.report.upper_violation[i]) + "\n";
        }
        r["rows"] = std::move(rows);
        r["tolerance"] = fam.report.tolerance;
        double decay_spread = 0.0;
        for (std::size_t i = 0; i + 1 < fam.report.eps.size(); ++i) {
            const double want = fam.report.eps[i] / fam.report.eps[i + 1];
            const double got = fam.report.sup_diff[i] / fam.report.sup_diff[i + 1];
            decay_spread = std::max(decay_spread, std::abs(got / want - 1.0));
        }
        r["decay_spread"] = decay_spread;
        res.pass = fam.report.brackets_hold && decay_spread <= 0.01;
        r["pass"] = res.pass;
        return res;
    }

    if (sc.mode == "harmonic-order") {
        nlohmann::ordered_json rows = nlohmann::ordered_json::array();
        std::string& csv = res.csv;
        csv += "spacing,max_error,max_principle_slack\n";
        std::vector<double> errors;
        double min_mp_slack = std::numeric_limits<double>::infinity();
        for (double h : sc.spacings) {
            GridField f = sd::dp_ball_field(sc, h, sc.boundary.fn, true);
            const GridField sol = solve_laplace_dirichlet(f);
            double err = 0.0;
            for (std::size_t k = 0; k < sol.size(); ++k)
                if (sol.mask[k] == kInterior)
                    err = std::max(err, std::abs(sol.values[k] -
                                                 sc.exact(sol.node_position(sol.unflat(k)))));
            const double mp = max_principle_slack(sol);
            min_mp_slack = std::min(min_mp_slack, mp);
            errors.push_back(err);
            nlohmann::ordered_json row;
            row["spacing"] = h;
            row["max_error"] = err;
            row["max_principle_slack"] = mp;
            rows.push_back(std::move(row));
            csv += format_double(h) + "," + format_double(err) + "," + format_double(mp) + "\n";
        }
        nlohmann::ordered_json orders = nlohmann::ordered_json::array();
        double min_order = std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i + 1 < errors.size(); ++i) {
            const double order = std::log(errors[i] / errors[i + 1]) /
                                 std::log(sc.spacings[i] / sc.spacings[i + 1]);
            orders.push_back(order);
            min_order = std::min(min_order, order);
        }
        r["rows"] = std::move(rows);
        r["orders"] = std::move(orders);
        r["min_order"] = min_order;
        r["required_order"] = 1.9;
        res.pass = min_order >= 1.9 && min_mp_slack >= -1e-9;
        r["pass"] = res.pass;
        return res;
    }

    if (sc.mode == "poisson-exact") {
        GridField f = sd::dp_ball_field(sc, sc.spacing, sc.boundary.fn, true);
        const GridField sol = solve_poisson_dirichlet(f, sc.psi.fn);
        double err = 0.0;
        for (std::size_t k = 0; k < sol.size(); ++k)
            if (sol.available(k))
                err = std::max(err,
                               std::abs(sol.values[k] - sc.exact(sol.node_position(sol.unflat(k)))));
        const double tolerance = sc.spacing * sc.spacing;
        r["grid"] = sd::grid_json(f);
        r["max_error"] = err;
        r["tolerance"] = tolerance;
        r["max_principle_slack"] = max_principle_slack(sol);
        res.pass = err <= tolerance;
        r["pass"] = res.pass;
        std::string& csv = res.csv;
        for (int d = 0; d < sol.dim(); ++d) csv += "i" + std::to_string(d) + ",";
        csv += "solved,exact,error\n";
        for (std::size_t k = 0; k < sol.size(); ++k) {
            if (!sol.available(k)) continue;
            const double want = sc.exact(sol.node_position(sol.unflat(k)));
            csv += sd::csv_row_prefix(sol.unflat(k)) + format_double(sol.values[k]) + "," +
                   format_double(want) + "," + format_double(sol.values[k] - want) + "\n";
        }
        return res;
    }
    throw std::logic_error("run_dp_scenario: unhandled mode " + sc.mode);
}

inline ScenarioOutcome run_scenario(const Scenario& sc) {
    return sc.kind == "glue" ? run_glue_scenario(sc) : run_dp_scenario(sc);
}

// ---------------------------------------------------------------------------
// File-level entry: load, run, write report.json / report.csv, map failures
// to the exit-code contract (0 pass, 1 check failure, 2 schema, 3 internal).

namespace scenario_detail {

inline void write_text(const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open output file '" + path.string() + "'");
    out << text;
    if (!out) throw std::runtime_error("write failed for '" + path.string() + "'");
}

inline void write_reports(const std::string& out_dir, const nlohmann::ordered_json& report,
                          const std::string& csv) {
    const std::filesystem::path dir(out_dir);
    std::filesystem::create_directories(dir);
    write_text(dir / "report.json", report.dump(2) + "\n");
    write_text(dir / "report.csv", csv);
}

}  // namespace scenario_detail

inline int run_scenario_file(const std::string& config_path, const std::string& out_dir,
                             std::ostream& err, const std::string& expected_kind = "") {
    Scenario sc;
    try {
        sc = load_scenario(config_path);
        if (!expected_kind.empty() && sc.kind != expected_kind)
            throw SchemaError("'" + config_path + "' is a " + sc.kind + " scenario, but the " +
                              expected_kind + " subcommand was invoked");
    } catch (const SchemaError& e) {
        err << "schema error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        err << "internal error: " << e.what() << "\n";
        return 3;
    }
    try {
        const ScenarioOutcome out = run_scenario(sc);
        scenario_detail::write_reports(out_dir, out.report, out.csv);
        if (!out.pass) {
            err << "scenario '" << sc.name << "' failed its checks; see report.json\n";
            return 1;
        }
        return 0;
    } catch (const SchemaError& e) {
        err << "schema error: " << e.what() << "\n";
        return 2;
    } catch (const std::invalid_argument& e) {
        err << "schema error: " << e.what() << "\n";
        return 2;
    } catch (const std::runtime_error& e) {
        // a named check refused the configuration; record it in the report
        nlohmann::ordered_json report;
        report["scenario"] = sc.name;
        report["kind"] = sc.kind;
        report["pass"] = false;
        report["error"] = e.what();
        try {
            scenario_detail::write_reports(out_dir, report, "");
        } catch (const std::exception& io) {
            err << "internal error: " << io.what() << "\n";
            return 3;
        }
        err << "check failed: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        err << "internal error: " << e.what() << "\n";
        return 3;
    }
}

}  // namespace richberg
