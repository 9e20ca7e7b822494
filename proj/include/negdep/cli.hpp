#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace negdep::cli {

/// Everything that determines a run; embedded verbatim in every report so
/// results are reproducible from the report alone.
struct RunConfig {
  std::string command;
  std::vector<std::string> inputs;
  std::string number_mode = "float";
  std::uint64_t seed = 0;
  bool seed_set = false;
  long long grid_cap = 10'000'000;
  long long nsd_grid_cap = 2'000;
  long long upper_set_cap = 1'000'000;
  long long lp_variable_cap = 200'000;
  std::string output;  // empty: stdout
};

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);
int run(int argc, char** argv);

}  // namespace negdep::cli
