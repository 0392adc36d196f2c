#include "l1lb/risk.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

namespace l1lb {

ExcessRiskReport excess_risk(const Instance& instance, const Vector& beta) {
  if (beta.size() != instance.p) {
    throw std::invalid_argument("excess_risk: expected length " + std::to_string(instance.p) +
                                ", got " + std::to_string(beta.size()));
  }
  const Vector delta = beta - instance.beta_star;
  ExcessRiskReport report;
  report.excess = instance.covariance.quadratic_form(delta);
  report.total_risk = instance.sigma * instance.sigma + report.excess;

  if (instance.covariance.kind() == CovarianceKind::theorem2_structured) {
    const Index m = instance.p - 3;
    const double bv = beta[instance.v_index()];
    const double lift = instance.covariance.normalizer() / std::sqrt(2.0) * bv;
    TermDecomposition t;
    t.term1 = (beta.head(m) - instance.covariance.tau() * bv).squaredNorm();
    t.term2 = std::pow(beta[instance.w1_index()] + lift - 0.5, 2);
    t.term3 = std::pow(beta[instance.w2_index()] + lift - 0.5, 2);
    report.terms = t;
  }
  return report;
}

EmpiricalRisk empirical_risk(const Vector& beta, const Sample& test_sample) {
  const Index rows = test_sample.rows();
  if (rows == 0) throw std::invalid_argument("empirical_risk: empty test sample");
  if (beta.size() != test_sample.cols()) {
    throw std::invalid_argument("empirical_risk: length mismatch");
  }
  const Vector sq = (test_sample.y - test_sample.X * beta).array().square().matrix();
  EmpiricalRisk out;
  out.value = sq.mean();
  if (rows > 1) {
    const double var = (sq.array() - out.value).square().sum() / static_cast<double>(rows - 1);
    out.standard_error = std::sqrt(var / static_cast<double>(rows));
  }
  return out;
}

PathRiskTracker::PathRiskTracker(const Instance& instance, bool keep_curve)
    : instance_(instance), keep_curve_(keep_curve) {}

void PathRiskTracker::push(const Breakpoint& point) {
  const CovarianceOp& cov = instance_.covariance;
  Vector delta = point.beta.dense(instance_.p) - instance_.beta_star;
  const double here = cov.quadratic_form(delta);

  if (count_ > 0) {
    // excess(t) = e0 + 2 t b + t^2 a on the segment prev -> here
    const Vector step = delta - prev_delta_;
    const double a = cov.quadratic_form(step);
    const double b = cov.bilinear(prev_delta_, step);
    if (a > 0.0) {
      const double t = -b / a;
      if (t > 0.0 && t < 1.0) {
        const double inner = cov.quadratic_form(prev_delta_ + t * step);
        const double budget = prev_budget_ + t * (point.budget - prev_budget_);
        if (inner < best_.excess) best_ = {budget, inner};
        if (keep_curve_) curve_.push_back({budget, inner, true});
      }
    }
  }
  if (count_ == 0 || here < best_.excess) best_ = {point.budget, here};
  if (keep_curve_) curve_.push_back({point.budget, here, false});

  prev_delta_ = std::move(delta);
  prev_budget_ = point.budget;
  last_excess_ = here;
  ++count_;
}

PathRiskMinimum min_excess_over_path(const Instance& instance, const LassoPath& path) {
  if (path.empty()) throw std::invalid_argument("min_excess_over_path: empty path");
  if (path.dim() != instance.p) throw std::invalid_argument("min_excess_over_path: dimension mismatch");
  PathRiskTracker tracker(instance);
  for (const Breakpoint& bp : path.breakpoints()) tracker.push(bp);
  return tracker.minimum();
}

std::vector<RiskCurvePoint> risk_curve(const Instance& instance, const LassoPath& path) {
  PathRiskTracker tracker(instance, true);
  for (const Breakpoint& bp : path.breakpoints()) tracker.push(bp);
  return tracker.curve();
}

void write_risk_curve_csv(const std::vector<RiskCurvePoint>& curve, double sigma, std::ostream& os) {
  os << "B,excess,total\n";
  char b[64];
  char e[64];
  char t[64];
  for (const auto& pt : curve) {
    std::snprintf(b, sizeof b, "%.17g", pt.budget);
    std::snprintf(e, sizeof e, "%.17g", pt.excess);
    std::snprintf(t, sizeof t, "%.17g", sigma * sigma + pt.excess);
    os << b << ',' << e << ',' << t << '\n';
  }
}

}  // namespace l1lb
