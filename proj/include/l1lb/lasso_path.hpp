#pragma once

#include <cstddef>
#include <functional>
#include <iosfwd>
#include <limits>
#include <vector>

#include "l1lb/common.hpp"
#include "l1lb/instance.hpp"

namespace l1lb {

/// Sparse coefficient vector, indices ascending.
struct SparseCoefs {
  std::vector<Index> index;
  std::vector<double> value;

  Index nnz() const;
  double l1() const;
  Vector dense(Index p) const;
  static SparseCoefs from_dense(const Vector& v);
};

/// One kink of the piecewise-linear solution path.
struct Breakpoint {
  double budget = 0.0;        // l1 norm of beta
  SparseCoefs beta;
  double rss = 0.0;
  double lagrange = 0.0;      // common |X_j^T r| on the active set
  std::vector<Index> active;  // active set for the segment that starts here
  std::vector<int> signs;
};

/// Solution path of min ||y - X b||^2 subject to ||b||_1 <= B.
class LassoPath {
 public:
  LassoPath() = default;
  LassoPath(Index n, Index p) : n_(n), p_(p) {}

  Index rows() const noexcept { return n_; }
  Index dim() const noexcept { return p_; }
  std::size_t size() const noexcept { return points_.size(); }
  bool empty() const noexcept { return points_.empty(); }
  const std::vector<Breakpoint>& breakpoints() const noexcept { return points_; }
  const Breakpoint& operator[](std::size_t k) const { return points_[k]; }
  const Breakpoint& back() const { return points_.back(); }

  /// True once the final point minimizes the RSS without constraint.
  bool reached_unconstrained() const noexcept { return unconstrained_; }
  /// True when the computation was cut short by an observer.
  bool stopped_early() const noexcept { return stopped_early_; }

  /// Constrained minimizer at budget B by segment interpolation.
  Vector evaluate(double budget) const;

  // builder interface used by the solver
  std::vector<Breakpoint>& mutable_breakpoints() noexcept { return points_; }
  void set_unconstrained(bool v) noexcept { unconstrained_ = v; }
  void set_stopped_early(bool v) noexcept { stopped_early_ = v; }

 private:
  Index n_ = 0;
  Index p_ = 0;
  std::vector<Breakpoint> points_;
  bool unconstrained_ = false;
  bool stopped_early_ = false;
};

struct PathOptions {
  /// Stop once this l1 budget is reached (infinity: run to the unconstrained optimum).
  double budget_max = std::numeric_limits<double>::infinity();
  /// Step cap; 0 selects 50 * (min(n, p) + 1) + 1000.
  std::size_t max_steps = 0;
  /// Steps shorter than this (relative to the current correlation level) are merged.
  double step_tol = 1e-12;
  /// A joining column is treated as dependent when its Cholesky pivot^2 falls below
  /// this fraction of its squared norm.
  double collinear_tol = 1e-10;
  /// Exact recomputation of correlations every this many steps.
  std::size_t refresh_every = 64;
  /// Called after every emitted breakpoint; returning false ends the path.
  std::function<bool(const Breakpoint&)> observer;
};

LassoPath compute_path(const Sample& sample, const PathOptions& options = {});
LassoPath compute_path(const Sample& sample, double budget_max);

struct ParetoCertificate {
  double lagrange_value = 0.0;
  double max_active_residual = 0.0;
  double max_inactive_excess = 0.0;
  Index sparsity = 0;
  bool passed = false;
};

/// KKT / equicorrelation check of beta against the sample.
ParetoCertificate pareto_certificate(const Sample& sample, const Vector& beta, double tol);

struct ConstrainedSolution {
  Vector beta;
  double rss = 0.0;
  ParetoCertificate certificate;
};

ConstrainedSolution solve_constrained(const Sample& sample, double budget);

struct PenalizedOptions {
  double tol = 1e-12;
  long max_sweeps = 1'000'000;
};

/// argmin RSS(b) + lambda ||b||_1 by cyclic coordinate descent; `start` warm-starts it.
Vector solve_penalized_oracle(const Sample& sample, double lambda,
                              const PenalizedOptions& options = {}, const Vector* start = nullptr);

double residual_sum_of_squares(const Sample& sample, const Vector& beta);

/// `k,B,rss,nnz`, and with coefficients `k,j,beta`.
void write_path_csv(const LassoPath& path, std::ostream& os);
void write_path_coefficients_csv(const LassoPath& path, std::ostream& os);

}  // namespace l1lb
