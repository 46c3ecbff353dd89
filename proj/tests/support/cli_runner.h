#pragma once

#include <sstream>
#include <string>
#include <vector>

#include "mvforge/cli.h"

namespace mvforge::test_support {

struct CliResult {
  int code = -1;
  std::string out;
  std::string err;
};

// Runs the command-line entry point in-process.
inline CliResult run_cli_args(const std::vector<std::string>& args) {
  std::vector<const char*> argv = {"mvforge"};
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  CliResult r;
  r.code = run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
  r.out = out.str();
  r.err = err.str();
  return r;
}

}  // namespace mvforge::test_support
