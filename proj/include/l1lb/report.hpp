#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "l1lb/experiment.hpp"

namespace l1lb {

/// Per (theorem, n, p, sigma) aggregate of a results file.
struct ReportCell {
  int theorem = 0;
  Index n = 0;
  Index p = 0;
  double sigma = 0.0;
  std::size_t trials = 0;
  std::size_t fast_satisfied = 0;
  std::size_t slow_applicable = 0;
  std::size_t slow_satisfied = 0;
  double median_min_excess = 0.0;
  double fast_bound = 0.0;
  std::optional<double> slow_bound;
};

struct SlopeFit {
  int theorem = 0;
  double sigma = 0.0;
  std::size_t cells = 0;
  std::optional<double> slope;  // absent with fewer than two cells
  std::optional<double> intercept;
  std::optional<double> ci_low;  // 95%, absent with fewer than three cells
  std::optional<double> ci_high;
  bool insufficient_cells() const { return !slope.has_value(); }
};

struct Report {
  std::vector<ReportCell> cells;  // sorted by theorem, sigma, n, p
  std::vector<SlopeFit> fits;     // one per (theorem, sigma)
  bool all_passed = true;
};

Report build_report(const std::vector<TrialResult>& results);

/// Least-squares slope of log(y) on log(x) with a Student-t interval.
SlopeFit fit_loglog(const std::vector<double>& x, const std::vector<double>& y);

void write_report_table(const Report& report, std::ostream& os);
void write_report_svg(const Report& report, std::ostream& os);

}  // namespace l1lb
