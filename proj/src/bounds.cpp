#include "l1lb/bounds.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <stdexcept>

namespace l1lb {

namespace {

double ln(double x) { return std::log(x); }

void require(bool ok, const char* what) {
  if (!ok) throw std::invalid_argument(what);
}

}  // namespace

LowerBound theorem_lower_bound(int theorem_tag, long n, double sigma) {
  require(theorem_tag == 1 || theorem_tag == 2, "theorem must be 1 or 2");
  require(n >= 30, "lower bounds require n >= 30");
  require(sigma >= 0.0, "sigma must be >= 0");
  const double nn = static_cast<double>(n);
  const double fast_const = theorem_tag == 1 ? 32.0 : 288.0;
  const double slow_const = theorem_tag == 1 ? 102400.0 : 409600.0;

  LowerBound out;
  out.fast = 1.0 / (fast_const * nn * std::pow(ln(3.0 * nn), 2));
  if (sigma > 0.0) {
    const double ratio = std::sqrt(nn) / sigma;
    if (ratio >= 100.0) {
      const double arg = std::max(3.0 * nn, std::ceil(ratio));
      out.slow = sigma / (slow_const * std::sqrt(nn) * std::pow(ln(arg), 2));
    }
  }
  return out;
}

double optimistic_rate_bound(long n, long p, double budget, double comparator_risk) {
  require(n >= 3, "optimistic rate needs n >= 3");
  require(p >= 2, "optimistic rate needs p >= 2");
  require(budget >= 0.0 && comparator_risk >= 0.0, "budget and risk must be >= 0");
  const double nn = static_cast<double>(n);
  const double lead =
      std::pow(1.0 + budget, 2) * ln(static_cast<double>(p)) / (nn / std::pow(ln(nn), 3));
  return lead + std::sqrt(lead * comparator_risk);
}

double optimistic_sample_complexity(long k, long p, double lambda1, double epsilon, double sigma) {
  require(epsilon > 0.0, "epsilon must be > 0");
  require(k > 0 && p >= 2 && lambda1 > 0.0 && sigma >= 0.0,
          "sample complexity needs k > 0, p >= 2, lambda1 > 0, sigma >= 0");
  const double base = static_cast<double>(k) / (lambda1 * epsilon);
  return base * ln(static_cast<double>(p)) * ((sigma * sigma + epsilon) / epsilon) *
         std::pow(ln(base), 3);
}

double fast_rate_bound(long n, long p, long k, double sigma, double kappa) {
  require(kappa > 0.0, "kappa must be > 0");
  require(n > 0 && p >= 1 && k >= 0, "fast rate needs n > 0, p >= 1, k >= 0");
  return sigma * sigma * static_cast<double>(k) * ln(static_cast<double>(p)) /
         (kappa * kappa * static_cast<double>(n));
}

double fast_rate_sample_complexity(long k, long p, double sigma, double kappa, double epsilon) {
  require(kappa > 0.0, "kappa must be > 0");
  require(epsilon > 0.0, "epsilon must be > 0");
  return sigma * sigma * static_cast<double>(k) * ln(static_cast<double>(p)) /
         (kappa * kappa * epsilon);
}

double kappa_from_rip(double delta_2k, double theta_k2k) {
  require(delta_2k >= 0.0 && delta_2k < 1.0, "delta_2k must lie in [0, 1)");
  require(theta_k2k >= 0.0, "theta_k2k must be >= 0");
  if (!(delta_2k + 3.0 * theta_k2k < 1.0)) {
    throw std::invalid_argument("restricted isometry condition delta_2k + 3 theta_k2k < 1 violated");
  }
  return std::sqrt(1.0 - delta_2k) * (1.0 - 3.0 * theta_k2k / (1.0 - delta_2k));
}

double l1_budget_from_sparsity(long k, double lambda1) {
  require(lambda1 > 0.0, "lambda1 must be > 0");
  require(k >= 0, "k must be >= 0");
  return std::sqrt(4.0 * static_cast<double>(k) / lambda1);
}

std::vector<BoundRow> bound_table(const BoundParams& bp) {
  std::vector<BoundRow> rows;
  auto add = [&](std::string name, const std::function<double()>& f) {
    BoundRow row{std::move(name), std::nullopt, {}};
    try {
      row.value = f();
    } catch (const std::invalid_argument& e) {
      row.note = e.what();
    }
    rows.push_back(std::move(row));
  };
  for (int tag : {1, 2}) {
    const std::string prefix = "theorem" + std::to_string(tag);
    add(prefix + "_fast", [&] { return theorem_lower_bound(tag, bp.n, bp.sigma).fast; });
    add(prefix + "_slow", [&] {
      auto b = theorem_lower_bound(tag, bp.n, bp.sigma);
      if (!b.slow) throw std::invalid_argument("requires sigma > 0 and sqrt(n)/sigma >= 100");
      return *b.slow;
    });
  }
  add("optimistic_rate", [&] { return optimistic_rate_bound(bp.n, bp.p, bp.budget, bp.sigma * bp.sigma); });
  add("optimistic_sample_complexity",
      [&] { return optimistic_sample_complexity(bp.k, bp.p, bp.lambda1, bp.epsilon, bp.sigma); });
  add("fast_rate", [&] { return fast_rate_bound(bp.n, bp.p, bp.k, bp.sigma, bp.kappa); });
  add("fast_rate_sample_complexity",
      [&] { return fast_rate_sample_complexity(bp.k, bp.p, bp.sigma, bp.kappa, bp.epsilon); });
  add("kappa_from_rip", [&] { return kappa_from_rip(bp.delta_2k, bp.theta_k2k); });
  add("l1_budget_from_sparsity", [&] { return l1_budget_from_sparsity(bp.k, bp.lambda1); });
  return rows;
}

}  // namespace l1lb
