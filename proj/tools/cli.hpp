#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace flowcouple::cli {

enum class Command { check, verify, couple, simulate, solve, transient, sweep };
enum class Format { json, csv };

inline constexpr int exit_ok = 0;
inline constexpr int exit_verdict_fail = 1;
inline constexpr int exit_usage = 2;

struct RunConfig {
  Command command = Command::check;

  std::string model_a;  // paths
  std::string model_b;
  std::string family_a;  // tandem-original | tandem-balanced | tandem-pair
  std::string family_b;

  // built-in tandem family parameters
  int s1 = 2;
  int s2 = 2;
  double beta = 1.0;
  std::vector<double> delta1;  // empty: delta_i(x) = x
  std::vector<double> delta2;

  std::uint64_t seed = 1;
  double horizon = 50.0;
  std::size_t reps = 100;
  std::string grid = "0:20:20";  // t0:t1:steps
  double tol = 1e-10;            // solver tolerance
  double margin_tol = 1e-8;      // mean-order pass bar
  std::filesystem::path out_dir = ".";
  Format format = Format::json;
  unsigned jobs = 1;

  std::string link = "0->1";
  std::string init;             // "x1;x2;..." (default: all zeros)
  bool population = false;      // couple: population coupling and x <= x' check
  std::size_t keep_logs = 1;    // couple/simulate: event logs written to disk
  std::optional<std::int64_t> gap_bound;
  bool all_witnesses = false;
  bool timing = false;          // adds runtime fields (breaks byte-identical output)

  // sweep grid; the service tables are delta_i(x) = c_i * x
  std::vector<double> betas = {0.5, 1.0, 2.0};
  std::vector<int> sizes = {1, 2, 3};
  double c1 = 1.0;
  double c2 = 1.0;
};

/// Executes one command. Reports go to files under out_dir, a short summary to `out`,
/// diagnostics to `err`. Returns exit_ok, exit_verdict_fail or exit_usage.
int run(const RunConfig& config, std::ostream& out, std::ostream& err);

/// Parses argv into a RunConfig and runs it.
int main_with_args(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace flowcouple::cli
