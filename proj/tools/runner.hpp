#pragma once

#include <filesystem>
#include <string>

#include <json.hpp>

namespace meanloop::runner {

/// Exit-code contract shared by every command:
/// 0 checks passed, 1 a bound or residual check failed, 2 usage or
/// configuration error, 3 numerical or solver failure.
enum ExitCode : int {
    kOk = 0,
    kCheckFailed = 1,
    kUsage = 2,
    kNumerical = 3,
};

struct CommandResult {
    nlohmann::json report;
    int exit_code = kOk;
};

/// Random twisted-operator ensemble; writes operator_ensemble.csv and
/// operator_ensemble.json under out_dir.
CommandResult run_operator_ensemble(nlohmann::json config,
                                    const std::filesystem::path& out_dir);

/// Critical-point solve for a registered system; writes loop.csv, solve.json.
CommandResult run_solve(nlohmann::json config, const std::filesystem::path& out_dir);

/// Kernel-dimension report at a solved (or loaded) critical point;
/// writes nullity.json.
CommandResult run_nullity(nlohmann::json config, const std::filesystem::path& out_dir);

/// Planar branch + time transform + squared orbit; writes orbit.csv,
/// kepler.json.
CommandResult run_kepler(nlohmann::json config, const std::filesystem::path& out_dir);

/// Iteration-equivalence check; writes symmetry.json.
CommandResult run_symmetry(nlohmann::json config, const std::filesystem::path& out_dir);

/// Stderr logging controlled by the MEANLOOP_LOG environment variable
/// (quiet, info, debug; default info).
void log_info(const std::string& msg);
void log_debug(const std::string& msg);

}  // namespace meanloop::runner
