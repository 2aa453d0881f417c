#pragma once

#include "dia/config.hpp"

#include <cstdint>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

namespace dia {

enum ExitCode : int { kExitOk = 0, kExitNumerical = 1, kExitUsage = 2 };

/// Subcommand arguments; unset fields fall back to per-command defaults.
struct CliArgs {
    std::optional<double> age;
    std::optional<double> wealth;
    std::optional<double> income;
    std::optional<std::size_t> paths;
    std::optional<std::uint64_t> seed;
};

const std::vector<std::string>& subcommands();

/// Runs one subcommand against `config`, writing CSV files into
/// config.output_dir and a short summary to `log`. Returns 0 on success,
/// 1 on numerical failure and 2 on usage errors. Files written by a failed
/// run are removed.
int run_subcommand(const std::string& name, const RunConfig& config, const CliArgs& args, std::ostream& log,
                   std::ostream& err);

}  // namespace dia
