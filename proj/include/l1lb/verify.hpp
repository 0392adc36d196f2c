#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "l1lb/common.hpp"
#include "l1lb/instance.hpp"

namespace l1lb {

enum class InequalitySense { at_most, at_least };

/// One evaluation of a probabilistic inequality lhs <= rhs (or >=).
struct InequalityTrialLog {
  std::size_t trial_id = 0;
  double lhs = 0.0;
  double rhs = 0.0;
  double ratio = 0.0;  // lhs / rhs (0 when both vanish)
  bool satisfied = false;
  std::string context;
};

inline constexpr double kInequalitySlack = 1e-9;

InequalityTrialLog make_log(std::size_t trial_id, double lhs, double rhs, InequalitySense sense,
                            std::string context);

struct LogSummary {
  std::size_t count = 0;
  std::size_t violations = 0;
  double max_ratio = 0.0;
  double min_ratio = 0.0;
};

LogSummary summarize(const std::vector<InequalityTrialLog>& logs);

// --- upper-bound lemma on ||X_J^T X (b~ - b*)||_2 ---------------------------------

struct InequalitySides {
  double lhs = 0.0;
  double rhs = 0.0;
};

/// lhs = ||X_J^T X (b~ - b*)||_2,
/// rhs = ||Sigma||_sp * 16 sqrt(2) * n ln p * sqrt((b~ - b*)^T Sigma (b~ - b*)).
/// `spectral` is ||Sigma||_sp (pass the cached value).
InequalitySides lemma_max_sides(const Instance& instance, const Sample& sample,
                                const std::vector<Index>& support, const Vector& beta_tilde,
                                double spectral);

/// Per trial: a uniform J with |J| = n, then one Gaussian b~ on J and the scaled
/// directions t b*_J for t in {0.5, 1, 2}. Four logs per trial.
std::vector<InequalityTrialLog> check_lemma_max(const Instance& instance, const Sample& sample,
                                                std::size_t trials, std::uint64_t seed);

// --- lower-bound lemma on the centred correlations X_{J1}^T z ---------------------

/// v - mean(v) * 1
Vector project_out_mean(const Vector& v);

/// Smallest centred sum of squares over all index subsets of size k (a window of the sorted
/// values); equals the minimum over every J1 with |J1| >= k.
double min_centred_sum_of_squares(const Vector& values, Index k);

/// Per trial: z with ||z||^2 >= n/2 (resampled), a fresh design, one random admissible J1
/// (|J1| >= sqrt(n)/(2 sigma) inside [ceil(sqrt(n)/sigma)]) and the worst admissible J1.
/// Two logs per trial; rhs = lambda_min^2(Sigma_[ceil(sqrt n / sigma)]) n^{3/2} / (200 sigma).
std::vector<InequalityTrialLog> check_lemma_min(const Instance& instance, Index n, double sigma,
                                                std::size_t trials, std::uint64_t seed);

// --- frequency checks -------------------------------------------------------------

struct FrequencyCheck {
  std::size_t trials = 0;
  std::size_t violations = 0;
  double frequency = 0.0;
  double bound = 0.0;      // stated failure probability
  double threshold = 0.0;  // bound + 3 binomial standard errors
  bool passed = false;
};

FrequencyCheck make_frequency_check(std::size_t trials, std::size_t violations, double bound);

/// Frequency of ||z||^2 < n/2 for z ~ N(0, I_n); bound exp(-0.0625 n).
FrequencyCheck check_chi_square_fact(Index n, std::size_t trials, std::uint64_t seed);

/// sqrt(16 n ln p)
double gaussian_spectral_threshold(Index n, Index p);

/// Frequency of ||A||_sp > sqrt(16 n ln p) for n x n standard Gaussian A; bound exp(-2 n ln p).
FrequencyCheck check_gaussian_spectral_bound(Index n, Index p, std::size_t trials,
                                             std::uint64_t seed);

// --- eigenvalue conditions --------------------------------------------------------

/// Smallest eigenvalue of a symmetric matrix of order <= 3 in closed form.
double min_eigenvalue_closed_form(const Matrix& block);

struct SupportEigenvalue {
  std::vector<Index> support;
  double lambda_min = 0.0;
};

struct RestrictedEigenReport {
  std::vector<SupportEigenvalue> supports;  // every J with 1 <= |J| <= k
  double min_support_eigenvalue = 0.0;
  double kappa_upper_estimate = 0.0;        // smallest observed b^T Sigma b / ||b_J||^2 in the cone
  std::optional<Vector> witness;            // probe below `threshold`, if any
  std::vector<Index> witness_support;
};

inline constexpr Index kMaxEnumerationDim = 200;
inline constexpr Index kMaxEnumerationSparsity = 3;

/// Exact lambda_min(Sigma_J) for every |J| <= k and a one-sided kappa estimate from probes in
/// the cone ||b_{J^c}||_1 <= 3 ||b_J||_1. Certifies violations only.
RestrictedEigenReport check_restricted_eigenvalue(const Matrix& covariance, Index k,
                                                  std::size_t probes, std::uint64_t seed,
                                                  double threshold = 1e-6);

/// `trial_id,lhs,rhs,ratio,satisfied`
void write_inequality_csv(const std::vector<InequalityTrialLog>& logs, std::ostream& os);

}  // namespace l1lb
