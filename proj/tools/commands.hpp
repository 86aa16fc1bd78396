#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "config.hpp"

namespace darklattice::cli {

// Process exit codes per error class.
enum ExitCode : int {
    kOk = 0,
    kUsage = 1,
    kConfig = 2,
    kNumerical = 3,
    kIo = 4,
    kInternal = 5,
};

struct RunOptions {
    std::string command;
    Config config;
    std::string out;  // main CSV path; empty -> "<command>.csv"
    int jobs = 1;
    std::uint64_t seed = 0;
};

inline const std::vector<std::string>& command_names()
{
    static const std::vector<std::string> names = {"spectrum", "transfer", "probe", "analytic",
                                                   "field", "defects", "nonmarkov"};
    return names;
}

// Applies DARKLATTICE_OUT_DIR to relative paths.
std::string resolve_output(const std::string& out, const std::string& command);

// Runs one subcommand and returns the files it wrote, main CSV first.
std::vector<std::string> run_command(const RunOptions& opts);

} // namespace darklattice::cli
