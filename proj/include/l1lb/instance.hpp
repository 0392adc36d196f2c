#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "l1lb/common.hpp"

namespace l1lb {

enum class CovarianceKind { identity, theorem2_structured, dense };

/// Largest dimension for which a structured covariance may be materialized densely.
inline constexpr Index kMaxDenseDim = 2000;

/// Structured covariance operator.
///
/// The theorem-2 kind describes x = (u, v, w1, w2) with u, w1, w2 i.i.d. N(0, 1) and
/// v = c (w1 + w2) / sqrt(2) - u^T tau. It is stored through its factor L (Sigma = L^T L),
/// which maps a coefficient vector onto the latent coordinates (u, w1, w2):
///
///   L d = (d_u - tau d_v, d_w1 + c d_v / sqrt(2), d_w2 + c d_v / sqrt(2)).
class CovarianceOp {
 public:
  static CovarianceOp identity(Index p);
  static CovarianceOp theorem2(Index p);
  static CovarianceOp dense(Matrix sigma);

  CovarianceKind kind() const noexcept { return kind_; }
  Index dim() const noexcept { return p_; }

  /// tau and c = sqrt(1 - |tau|^2); empty / 1 unless theorem2_structured.
  const Vector& tau() const noexcept { return tau_; }
  double normalizer() const noexcept { return c_; }
  const Matrix& dense_matrix() const { return dense_; }

  Vector apply(const Vector& v) const;
  double bilinear(const Vector& a, const Vector& b) const;
  double quadratic_form(const Vector& v) const;

  /// Latent-coordinate factor image L v (identity: v; dense: not available).
  Vector factor_apply(const Vector& v) const;

  /// Restriction Sigma_J for an index set J.
  Matrix block(std::span<const Index> indices) const;

  /// Dense materialization; throws std::length_error above kMaxDenseDim for structured kinds.
  Matrix to_dense() const;

  /// Largest eigenvalue by power iteration, relative tolerance `tol`.
  double spectral_norm(double tol = 1e-8, int max_iter = 100000) const;

 private:
  CovarianceKind kind_ = CovarianceKind::identity;
  Index p_ = 0;
  Vector tau_;
  double c_ = 1.0;
  Matrix dense_;
};

/// Regression problem: covariance, true coefficients, noise level.
struct Instance {
  int theorem_tag = 0;  // 1, 2, or 0 for ad hoc dense test instances
  Index n = 0;
  Index p = 0;
  double sigma = 0.0;
  Vector beta_star;
  CovarianceOp covariance;
  bool slow_bound_applicable = false;
  /// Theorem 2 only: the dense representation of the same predictor.
  std::optional<Vector> beta_dense;

  /// Positions of (v, w1, w2) in theorem-2 covariate order.
  Index v_index() const { return p - 3; }
  Index w1_index() const { return p - 2; }
  Index w2_index() const { return p - 1; }
};

struct Sample {
  Matrix X;  // n x p, rows are covariate draws
  Vector y;
  Vector z;
  std::uint64_t seed = 0;

  Index rows() const { return X.rows(); }
  Index cols() const { return X.cols(); }
};

Instance make_theorem1_instance(Index n, Index p, double sigma);
Instance make_theorem2_instance(Index n, Index p, double sigma);
Instance make_instance(int theorem_tag, Index n, Index p, double sigma);

/// Ad hoc instance over an explicit covariance; used by tests, no theorem hypotheses enforced.
Instance make_dense_instance(Matrix sigma_matrix, Vector beta_star, Index n, double sigma);

/// n rows drawn from the instance, seeded.
Sample sample_design(const Instance& instance, std::uint64_t seed);
/// Same generator with an explicit row count (test samples, Monte Carlo risk).
Sample sample_rows(const Instance& instance, Index rows, std::uint64_t seed);

double covariance_quadratic_form(const Instance& instance, const Vector& v);
double spectral_norm(const Instance& instance);

/// True iff 100 <= sqrt(n)/sigma <= p (theorem 1) or <= p - 3 (theorem 2).
bool slow_bound_hypothesis(int theorem_tag, Index n, Index p, double sigma);

// Instance file: {version, theorem, n, p, sigma}; coefficients are rebuilt on load.
inline constexpr int kInstanceFileVersion = 1;
std::string instance_to_json(const Instance& instance);
Instance instance_from_json(const std::string& text);
void save_instance(const Instance& instance, const std::string& path);
Instance load_instance(const std::string& path);

/// Debug export: `i,j,value` for X and `i,y,z` for responses.
void write_design_csv(const Sample& sample, std::ostream& os);
void write_response_csv(const Sample& sample, std::ostream& os);

}  // namespace l1lb
