#include <CLI11.hpp>

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <string>

#include "runner.hpp"

namespace {

using meanloop::runner::CommandResult;
using nlohmann::json;

struct CommonFlags {
    std::string config_path;
    std::string out_dir = ".";
    std::int64_t seed = -1;
    int grid = 0;
    int jobs = 0;
};

void add_common(CLI::App* cmd, CommonFlags& flags) {
    cmd->add_option("--config", flags.config_path, "JSON configuration file");
    cmd->add_option("--out", flags.out_dir, "output directory (default: .)");
    cmd->add_option("--seed", flags.seed, "override the configured seed");
    cmd->add_option("--grid", flags.grid, "override the grid size N");
    cmd->add_option("--jobs", flags.jobs, "worker pool size for ensembles");
}

int execute(const CommonFlags& flags,
            const std::function<CommandResult(json, const std::filesystem::path&)>& fn) {
    json config = json::object();
    if (!flags.config_path.empty()) {
        std::ifstream is(flags.config_path);
        if (!is) {
            std::cerr << "[meanloop] cannot read config: " << flags.config_path << "\n";
            return meanloop::runner::kUsage;
        }
        try {
            is >> config;
        } catch (const std::exception& e) {
            std::cerr << "[meanloop] config parse error: " << e.what() << "\n";
            return meanloop::runner::kUsage;
        }
    }
    if (flags.seed >= 0) config["seed"] = flags.seed;
    if (flags.grid > 0) config["grid"] = flags.grid;
    if (flags.jobs > 0) config["jobs"] = flags.jobs;

    const CommandResult result = fn(std::move(config), flags.out_dir);
    if (result.report.contains("error"))
        std::cerr << "[meanloop] " << result.report["error"].get<std::string>() << "\n";
    return result.exit_code;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"mean-coupled Hamiltonian loops: solves, kernel bounds, transforms"};
    app.require_subcommand(1);

    CommonFlags ensemble_flags, solve_flags, nullity_flags, kepler_flags, symmetry_flags;
    CLI::App* ensemble = app.add_subcommand(
        "operator-ensemble", "random twisted-operator ensemble with kernel bound checks");
    add_common(ensemble, ensemble_flags);
    CLI::App* solve = app.add_subcommand("solve", "find a critical point of a built-in system");
    add_common(solve, solve_flags);
    CLI::App* nullity =
        app.add_subcommand("nullity", "kernel dimensions and bounds at a critical point");
    add_common(nullity, nullity_flags);
    CLI::App* kepler = app.add_subcommand(
        "kepler", "planar branch, time transform, and two-body verification");
    add_common(kepler, kepler_flags);
    CLI::App* symmetry =
        app.add_subcommand("symmetry", "iteration equivalence through the loop monoid");
    add_common(symmetry, symmetry_flags);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : meanloop::runner::kUsage;
    }

    if (ensemble->parsed())
        return execute(ensemble_flags, meanloop::runner::run_operator_ensemble);
    if (solve->parsed()) return execute(solve_flags, meanloop::runner::run_solve);
    if (nullity->parsed()) return execute(nullity_flags, meanloop::runner::run_nullity);
    if (kepler->parsed()) return execute(kepler_flags, meanloop::runner::run_kepler);
    if (symmetry->parsed()) return execute(symmetry_flags, meanloop::runner::run_symmetry);
    return meanloop::runner::kUsage;
}
