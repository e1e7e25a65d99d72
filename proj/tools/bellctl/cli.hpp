#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace bellman::cli {

enum ExitCode : int { kSuccess = 0, kUsage = 1, kViolation = 2, kInternal = 3 };

struct RunConfig {
  std::string subcommand;
  int N = 2;
  int depth = 4;
  int m = 1;
  double p = 2.0;
  std::optional<double> q;
  std::optional<double> F;
  double f = 1.0;
  std::optional<double> kappa;
  std::optional<double> L;
  std::string formula;
  std::string construction;
  std::string kind = "strong_q";
  int samples = 100;
  int starts = 4;
  std::uint64_t seed = 1;
  double tol = 1e-9;
  std::string format = "csv";
  std::string out;
  std::string kappa_grid;
  std::string F_grid;
  std::string L_grid = "1,1.25,1.5,2,3";
  std::string depth_list = "1,2,3,4";
  int depth_extension = -1;
  long long budget = 4000;
  double inflate_bounds = 1.0;
};

/// Parses "a,b,c" or "start:stop:count" (inclusive linspace).
std::vector<double> parse_grid(const std::string& text);
std::vector<int> parse_int_list(const std::string& text);

/// Entry point shared by the executable and the tests.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

int cmd_eval(const RunConfig& config, std::ostream& out);
int cmd_sweep(const RunConfig& config, std::ostream& out);
int cmd_verify(const RunConfig& config, std::ostream& out, std::ostream& err);
int cmd_oracle(const RunConfig& config, std::ostream& out);
int cmd_extremal(const RunConfig& config, std::ostream& out);

}  // namespace bellman::cli
