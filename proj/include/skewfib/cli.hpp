#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace skewfib::cli {

inline constexpr const char* kVersion = "skewfib 1.0.0";

struct Options {
  std::string command;      // certify | foliation | lift | homotopy | demo
  std::string config_path;
  std::string out_dir = ".";
  std::uint64_t seed = 0;
};

// Runs one command: reads the JSON config, writes report.json (and CSVs)
// under out_dir, prints one line per verdict to `out`, timing to `err`.
// Returns 0 all-pass, 1 property-fail, 2 config/runtime error.
int runCommand(const Options& opts, std::ostream& out, std::ostream& err);

// Full argv interface (argv[0] ignored): skewfib <command> --config <path>
// [--out <dir>] [--seed <n>]
int runMain(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace skewfib::cli
