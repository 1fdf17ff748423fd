#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "richberg/richberg.hpp"

namespace {

// Exit codes: 0 all checks pass, 1 a check failed, 2 bad configuration or
// arguments, 3 internal error.

int run_suite(const std::string& name, std::uint64_t seed, double tol_scale,
              const std::string& out_path) {
    richberg::SuiteOptions opt;
    opt.seed = seed;
    opt.tol_scale = tol_scale;
    try {
        opt.quadrature_degree = richberg::effective_quadrature_degree(opt.quadrature_degree);
        const auto rows = richberg::run_property_suite(name, opt);
        const std::string csv = richberg::suite_csv(rows);
        if (out_path.empty()) {
            std::cout << csv;
        } else {
            std::ofstream out(out_path);
            if (!out) {
                std::cerr << "internal error: cannot open '" << out_path << "'\n";
                return 3;
            }
            out << csv;
        }
        long failed = 0;
        for (const auto& row : rows)
            if (!row.pass) ++failed;
        if (failed > 0) {
            std::cerr << failed << " of " << rows.size() << " properties failed\n";
            return 1;
        }
        std::cerr << "all " << rows.size() << " properties passed\n";
        return 0;
    } catch (const richberg::SchemaError& e) {
        std::cerr << "schema error: " << e.what() << "\n";
        return 2;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << "\n";
        return 3;
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"glued smooth approximation toolkit"};
    app.require_subcommand(1);

    std::string config_path, out_dir = "out", suite_out;
    std::uint64_t seed = 0;
    double tol_scale = 1.0;

    auto add_seed = [&](CLI::App* cmd) {
        cmd->add_option("--seed", seed, "random seed (required)")->required();
        cmd->add_option("--tol-scale", tol_scale, "scale factor on the row tolerances")
            ->check(CLI::PositiveNumber);
        cmd->add_option("--out", suite_out, "write the CSV here instead of stdout");
    };

    CLI::App* smoothmax = app.add_subcommand(
        "smoothmax-check", "randomized properties of the smoothed maximum and jet calculus");
    add_seed(smoothmax);

    CLI::App* fibers = app.add_subcommand(
        "fibers-check", "constraint-set axioms, margins and shrinking");
    add_seed(fibers);

    CLI::App* suite = app.add_subcommand("suite", "named property suite");
    std::string suite_name = "all";
    suite->add_option("name", suite_name,
                      "which suite to run: smoothmax, fibers, solvers, gluing or all");
    add_seed(suite);

    CLI::App* dp = app.add_subcommand(
        "dp", "Dirichlet-solver approximant scenario from a JSON config");
    dp->add_option("--config", config_path, "scenario file")->required();
    dp->add_option("--out", out_dir, "directory for report.json and report.csv");

    CLI::App* glue = app.add_subcommand(
        "glue", "end-to-end gluing scenario from a JSON config");
    glue->add_option("--config", config_path, "scenario file")->required();
    glue->add_option("--out", out_dir, "directory for report.json and report.csv");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 2;
    }

    if (smoothmax->parsed()) return run_suite("smoothmax", seed, tol_scale, suite_out);
    if (fibers->parsed()) return run_suite("fibers", seed, tol_scale, suite_out);
    if (suite->parsed()) return run_suite(suite_name, seed, tol_scale, suite_out);

    const std::string want_kind = dp->parsed() ? "dp" : "glue";
    return richberg::run_scenario_file(config_path, out_dir, std::cerr, want_kind);
}
