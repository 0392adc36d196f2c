#pragma once

#include <optional>
#include <string>
#include <vector>

namespace l1lb {

// Rate formulas with every O()/Theta() constant set to one. Logarithms are natural.

struct LowerBound {
  double fast = 0.0;
  std::optional<double> slow;  // present only when sigma > 0 and sqrt(n)/sigma >= 100
};

/// Excess-risk lower bounds of the two adversarial constructions:
///   theorem 1: fast 1/(32 n ln^2(3n)),  slow sigma/(102400 sqrt(n) ln^2(max{3n, ceil(sqrt(n)/sigma)}))
///   theorem 2: fast 1/(288 n ln^2(3n)), slow with 409600 in place of 102400.
/// The caller checks the p-side of the slow hypothesis (Instance::slow_bound_applicable).
LowerBound theorem_lower_bound(int theorem_tag, long n, double sigma);

/// (1+B)^2 ln p / (n / ln^3 n) + sqrt(that * comparator_risk); requires n >= 3, p >= 2.
double optimistic_rate_bound(long n, long p, double budget, double comparator_risk);

/// (k ln p / (lambda1 eps)) * ((sigma^2 + eps) / eps) * ln^3(k / (lambda1 eps)).
double optimistic_sample_complexity(long k, long p, double lambda1, double epsilon, double sigma);

/// sigma^2 k ln p / (kappa^2 n)
double fast_rate_bound(long n, long p, long k, double sigma, double kappa);

/// sigma^2 k ln p / (kappa^2 eps)
double fast_rate_sample_complexity(long k, long p, double sigma, double kappa, double epsilon);

/// Restricted-eigenvalue constant implied by restricted isometry:
/// sqrt(1 - delta) (1 - 3 theta / (1 - delta)), valid when delta + 3 theta < 1.
double kappa_from_rip(double delta_2k, double theta_k2k);

/// sqrt(4 k / lambda1): l1 radius of any k-sparse predictor that beats the zero predictor.
double l1_budget_from_sparsity(long k, double lambda1);

struct BoundParams {
  long n = 0;
  long p = 0;
  long k = 1;
  double sigma = 0.0;
  double budget = 1.0;
  double epsilon = 0.01;
  double lambda1 = 1.0;
  double kappa = 1.0;
  double delta_2k = 0.0;
  double theta_k2k = 0.0;
};

struct BoundRow {
  std::string name;
  std::optional<double> value;  // empty when the formula's preconditions fail
  std::string note;
};

/// Every formula evaluated at `params`; failed preconditions become empty rows with a note.
std::vector<BoundRow> bound_table(const BoundParams& params);

}  // namespace l1lb
