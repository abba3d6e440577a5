#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "junction/config.hpp"

namespace junction::cli {

enum ExitCode { kOk = 0, kConfigError = 1, kDataError = 2, kRuntimeAbort = 3 };

// Entry point shared by the executable and the tests. `args` excludes the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

// Run directory name: run.id when set, else "<subcommand>-<UTC timestamp>-<hash prefix>".
std::string run_id(const RunConfig& cfg, const std::string& subcommand);

// First line of every CSV artifact.
std::string csv_stamp(const RunConfig& cfg);

}  // namespace junction::cli
