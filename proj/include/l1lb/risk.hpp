#pragma once

#include <iosfwd>
#include <optional>
#include <vector>

#include "l1lb/common.hpp"
#include "l1lb/instance.hpp"
#include "l1lb/lasso_path.hpp"

namespace l1lb {

/// Theorem-2 split of the excess into latent coordinates u, w1, w2.
struct TermDecomposition {
  double term1 = 0.0;  // ||b_u - tau b_v||^2
  double term2 = 0.0;  // (b_w1 + c b_v / sqrt 2 - 1/2)^2
  double term3 = 0.0;  // (b_w2 + c b_v / sqrt 2 - 1/2)^2
  double sum() const { return term1 + term2 + term3; }
};

struct ExcessRiskReport {
  double excess = 0.0;      // (b - b*)^T Sigma (b - b*)
  double total_risk = 0.0;  // sigma^2 + excess
  std::optional<TermDecomposition> terms;
};

ExcessRiskReport excess_risk(const Instance& instance, const Vector& beta);

struct EmpiricalRisk {
  double value = 0.0;           // mean squared residual on the test sample
  double standard_error = 0.0;  // sample standard deviation / sqrt(N)
};

EmpiricalRisk empirical_risk(const Vector& beta, const Sample& test_sample);

struct PathRiskMinimum {
  double budget = 0.0;
  double excess = 0.0;
};

/// One point of the excess-risk curve along a path.
struct RiskCurvePoint {
  double budget = 0.0;
  double excess = 0.0;
  bool segment_minimum = false;  // interior minimizer of a segment rather than a breakpoint
};

/// Streaming minimizer of the excess over a piecewise-linear path. Each segment contributes
/// the exact minimum of its quadratic excess profile.
class PathRiskTracker {
 public:
  explicit PathRiskTracker(const Instance& instance, bool keep_curve = false);

  void push(const Breakpoint& point);

  bool empty() const noexcept { return count_ == 0; }
  PathRiskMinimum minimum() const noexcept { return best_; }
  double last_excess() const noexcept { return last_excess_; }
  const std::vector<RiskCurvePoint>& curve() const noexcept { return curve_; }

 private:
  const Instance& instance_;
  bool keep_curve_;
  std::size_t count_ = 0;
  Vector prev_delta_;  // previous breakpoint minus beta*
  double prev_budget_ = 0.0;
  double last_excess_ = 0.0;
  PathRiskMinimum best_;
  std::vector<RiskCurvePoint> curve_;
};

/// Global continuous minimum of the excess over every budget on the path.
PathRiskMinimum min_excess_over_path(const Instance& instance, const LassoPath& path);

std::vector<RiskCurvePoint> risk_curve(const Instance& instance, const LassoPath& path);

/// `B,excess,total`
void write_risk_curve_csv(const std::vector<RiskCurvePoint>& curve, double sigma, std::ostream& os);

}  // namespace l1lb
