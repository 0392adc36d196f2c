#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "l1lb/common.hpp"
#include "l1lb/instance.hpp"
#include "l1lb/lasso_path.hpp"

namespace l1lb {

/// How p is chosen for each cell.
struct PRule {
  enum class Kind { automatic, multiple_of_n, fixed };
  Kind kind = Kind::automatic;
  long value = 3;

  /// "auto", "<k>n" (e.g. "3n"), or an integer.
  static PRule parse(const std::string& text);
  std::string to_string() const;
  /// automatic: max(3n, ceil(sqrt(n)/sigma)) for theorem 1 and
  /// max(3n, ceil(sqrt(n)/sigma) + 3, 90) for theorem 2.
  Index resolve(int theorem_tag, Index n, double sigma) const;
};

struct ExperimentConfig {
  int theorem = 1;
  std::vector<Index> n_grid;
  std::vector<double> sigma_grid{0.0};
  PRule p_rule;
  std::size_t trials = 1;
  std::uint64_t master_seed = 0;
  unsigned threads = 1;
  /// Record wall-clock milliseconds in the results file (breaks byte-level reproducibility).
  bool timing = false;
  /// Stop a path once no later budget can lower the excess (identity covariance only).
  bool early_stop = true;
  std::string out;  // results CSV; empty: do not write
};

/// Plain-text `key = value` file, one key per line, `#` comments.
ExperimentConfig parse_config(std::istream& in);
ExperimentConfig load_config(const std::string& path);

struct TrialResult {
  int theorem = 0;
  Index n = 0;
  Index p = 0;
  double sigma = 0.0;
  std::uint64_t seed = 0;
  double budget_at_min = 0.0;
  double min_excess = 0.0;
  double fast_bound = 0.0;
  std::optional<double> slow_bound;
  bool satisfied_fast = false;
  std::optional<bool> satisfied_slow;
  std::size_t breakpoints = 0;
  std::optional<double> wall_ms;
};

inline constexpr double kBoundSlack = 1e-12;

/// Cell of the (n, sigma) grid.
struct CellSummary {
  std::size_t cell = 0;
  int theorem = 0;
  Index n = 0;
  Index p = 0;
  double sigma = 0.0;
  std::string skipped;  // violated hypothesis; empty when the cell ran
  std::size_t trials = 0;
  std::size_t fast_satisfied = 0;
  std::size_t slow_applicable = 0;
  std::size_t slow_satisfied = 0;
  double median_min_excess = 0.0;

  double fast_rate() const;
  double slow_rate() const;
  /// 0.5 - 3 sqrt(0.25 / trials)
  double slow_threshold() const;
  bool passed() const;
};

struct ExperimentOutcome {
  std::vector<TrialResult> results;  // sorted by cell, then trial
  std::vector<CellSummary> cells;
  bool all_passed = true;
};

/// Runs one trial: instance, sample, path, continuous minimum excess, bound comparison.
TrialResult run_trial(const Instance& instance, std::uint64_t seed, bool early_stop);

using ProgressFn = std::function<void(std::size_t done, std::size_t total)>;

ExperimentOutcome run_experiment(const ExperimentConfig& config, const ProgressFn& progress = {});

inline constexpr const char* kResultsHeader =
    "theorem,n,p,sigma,seed,B_at_min,min_excess,fast_bound,slow_bound,satisfied_fast,"
    "satisfied_slow,breakpoints,wall_ms";

void write_results_csv(const std::vector<TrialResult>& results, std::ostream& os);
void write_results_csv(const std::vector<TrialResult>& results, const std::string& path);

/// Parses a results file; malformed input raises std::runtime_error naming the line.
std::vector<TrialResult> read_results_csv(std::istream& in);

double median(std::vector<double> values);

}  // namespace l1lb
