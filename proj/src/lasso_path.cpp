#include "l1lb/lasso_path.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <ostream>

namespace l1lb {

// ---------------------------------------------------------------------------
// SparseCoefs

Index SparseCoefs::nnz() const {
  return static_cast<Index>(std::count_if(value.begin(), value.end(),
                                          [](double v) { return v != 0.0; }));
}

double SparseCoefs::l1() const {
  double s = 0.0;
  for (double v : value) s += std::abs(v);
  return s;
}

Vector SparseCoefs::dense(Index p) const {
  Vector out = Vector::Zero(p);
  for (std::size_t t = 0; t < index.size(); ++t) out[index[t]] = value[t];
  return out;
}

SparseCoefs SparseCoefs::from_dense(const Vector& v) {
  SparseCoefs out;
  for (Index j = 0; j < v.size(); ++j) {
    if (v[j] != 0.0) {
      out.index.push_back(j);
      out.value.push_back(v[j]);
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// LassoPath

Vector LassoPath::evaluate(double budget) const {
  if (points_.empty()) {
    throw std::logic_error("evaluate on an empty path");
  }
  if (budget <= 0.0) {
    return Vector::Zero(p_);
  }
  const Breakpoint& last = points_.back();
  if (budget >= last.budget) {
    if (!unconstrained_ && budget > last.budget * (1.0 + 1e-12) + 1e-300) {
      throw std::out_of_range("budget beyond the computed path");
    }
    return last.beta.dense(p_);
  }
  auto it = std::lower_bound(points_.begin(), points_.end(), budget,
                             [](const Breakpoint& b, double v) { return b.budget < v; });
  const auto k = static_cast<std::size_t>(it - points_.begin());
  if (k == 0) return points_.front().beta.dense(p_);
  const Breakpoint& lo = points_[k - 1];
  const Breakpoint& hi = points_[k];
  const double t = (budget - lo.budget) / (hi.budget - lo.budget);
  return (1.0 - t) * lo.beta.dense(p_) + t * hi.beta.dense(p_);
}

// ---------------------------------------------------------------------------
// Solver

namespace {

// Cholesky factor of the active Gram matrix, grown and shrunk one column at a time.
class ActiveCholesky {
 public:
  Index size() const { return k_; }

  bool try_append(const Vector& cross, double diag, double rel_tol) {
    reserve(k_ + 1);
    Vector w = cross;
    if (k_ > 0) {
      L_.topLeftCorner(k_, k_).triangularView<Eigen::Lower>().solveInPlace(w);
    }
    const double pivot2 = diag - w.squaredNorm();
    if (!(pivot2 > rel_tol * diag)) return false;
    L_.row(k_).head(k_) = w.transpose();
    L_(k_, k_) = std::sqrt(pivot2);
    ++k_;
    return true;
  }

  void remove(Index q) {
    const Index m = k_ - q - 1;
    Vector x = L_.block(q + 1, q, m, 1);
    for (Index t = 0; t < m; ++t) {
      const Index row = q + 1 + t;
      const double ltt = L_(row, row);
      const double r = std::hypot(ltt, x[t]);
      const double c = r / ltt;
      const double s = x[t] / ltt;
      L_(row, row) = r;
      for (Index i = t + 1; i < m; ++i) {
        const Index ri = q + 1 + i;
        L_(ri, row) = (L_(ri, row) + s * x[i]) / c;
        x[i] = c * x[i] - s * L_(ri, row);
      }
    }
    for (Index i = q; i + 1 < k_; ++i) {
      for (Index j = 0; j <= i; ++j) {
        L_(i, j) = L_(i + 1, j < q ? j : j + 1);
      }
    }
    --k_;
  }

  Vector solve(const Vector& rhs) const {
    const auto lower = L_.topLeftCorner(k_, k_).triangularView<Eigen::Lower>();
    const Vector half = lower.solve(rhs);
    return lower.transpose().solve(half);
  }

 private:
  void reserve(Index want) {
    if (want <= L_.rows()) return;
    const Index cap = std::max<Index>(want, 2 * L_.rows() + 16);
    Matrix grown = Matrix::Zero(cap, cap);
    grown.topLeftCorner(k_, k_) = L_.topLeftCorner(k_, k_);
    L_.swap(grown);
  }

  Matrix L_;
  Index k_ = 0;
};

enum class Event { end, budget, join, drop };

enum : char { kInactive = 0, kActive = 1, kIgnored = 2 };

class HomotopySolver {
 public:
  HomotopySolver(const Sample& sample, const PathOptions& opt)
      : X_(sample.X), y_(sample.y), opt_(opt), n_(X_.rows()), p_(X_.cols()), path_(n_, p_) {}

  LassoPath run() {
    if (n_ < 1 || p_ < 1) throw std::invalid_argument("compute_path: empty design");
    if (y_.size() != n_) throw std::invalid_argument("compute_path: response length mismatch");
    if (opt_.budget_max < 0.0) throw std::invalid_argument("compute_path: negative budget");

    const std::size_t max_steps =
        opt_.max_steps ? opt_.max_steps
                       : 50 * static_cast<std::size_t>(std::min(n_, p_) + 1) + 1000;

    beta_ = Vector::Zero(p_);
    corr_ = X_.transpose() * y_;
    state_.assign(static_cast<std::size_t>(p_), kInactive);
    level_ = corr_.cwiseAbs().maxCoeff();
    level0_ = level_;

    emit();
    if (!(level_ > 0.0)) {
      path_.mutable_breakpoints().back().lagrange = 0.0;
      path_.set_unconstrained(true);
      return std::move(path_);
    }
    if (opt_.budget_max == 0.0) return std::move(path_);
    if (!notify()) return std::move(path_);

    Index just_dropped = -1;
    int dropped_sign = 0;
    for (std::size_t step = 1;; ++step) {
      if (step > max_steps) {
        throw DegeneratePathError(step, "step cap exceeded");
      }
      if (active_.empty()) {
        const Index j = strongest_inactive();
        if (j < 0) {
          path_.set_unconstrained(true);
          break;
        }
        join(j);
        set_last_active();
        continue;
      }

      const auto k = static_cast<Index>(active_.size());
      budget_ = 0.0;
      for (Index j : active_) budget_ += std::abs(beta_[j]);
      Vector sgn(k);
      for (Index t = 0; t < k; ++t) sgn[t] = signs_[static_cast<std::size_t>(t)];
      const Vector dir = chol_.solve(sgn);
      const double rate = sgn.dot(dir);  // d||beta||_1 / d gamma
      if (!dir.allFinite() || !(rate > 0.0)) {
        throw DegeneratePathError(step, "active Gram matrix is numerically singular");
      }
      const Vector drift = gram_.leftCols(k) * dir;

      // Candidate step lengths; the lowest index wins ties among joins.
      const double tie = 1e-12 * level0_;
      const double inf = std::numeric_limits<double>::infinity();
      double to_budget = inf;
      if (std::isfinite(opt_.budget_max)) {
        to_budget = std::max(0.0, (opt_.budget_max - budget_) / rate);
      }
      double to_join = inf;
      Index join_who = -1;
      for (Index j = 0; j < p_; ++j) {
        if (state_[static_cast<std::size_t>(j)] != kInactive) continue;
        const double aj = drift[j];
        const double cj = corr_[j];
        // a column that just left may come back only with the opposite sign
        const bool no_plus = j == just_dropped && dropped_sign > 0;
        const bool no_minus = j == just_dropped && dropped_sign < 0;
        double cand = inf;
        if (!no_plus && 1.0 - aj > 1e-14) cand = std::min(cand, std::max(0.0, (level_ - cj) / (1.0 - aj)));
        if (!no_minus && 1.0 + aj > 1e-14) cand = std::min(cand, std::max(0.0, (level_ + cj) / (1.0 + aj)));
        if (cand < to_join - tie) {
          to_join = cand;
          join_who = j;
        }
      }
      double to_drop = inf;
      Index drop_who = -1;
      for (Index t = 0; t < k; ++t) {
        const double b = beta_[active_[static_cast<std::size_t>(t)]];
        if (b == 0.0 || dir[t] * b >= 0.0) continue;
        const double cand = -b / dir[t];
        if (cand < to_drop) {
          to_drop = cand;
          drop_who = t;
        }
      }

      // Priority on ties: budget, end, drop, join.
      double gamma = std::min({to_budget, level_, to_drop, to_join});
      Event event = Event::join;
      Index who = join_who;
      if (to_budget <= gamma + tie) {
        event = Event::budget;
        gamma = to_budget;
      } else if (level_ <= gamma + tie) {
        event = Event::end;
        gamma = level_;
      } else if (to_drop <= gamma + tie) {
        event = Event::drop;
        gamma = to_drop;
        who = drop_who;
      }
      if (!std::isfinite(gamma) || gamma < 0.0) {
        throw DegeneratePathError(step, "invalid step length");
      }

      for (Index t = 0; t < k; ++t) beta_[active_[static_cast<std::size_t>(t)]] += gamma * dir[t];
      corr_.noalias() -= gamma * drift;
      level_ -= gamma;
      if (event == Event::end) level_ = 0.0;
      for (Index t = 0; t < k; ++t) {
        corr_[active_[static_cast<std::size_t>(t)]] = signs_[static_cast<std::size_t>(t)] * level_;
      }

      just_dropped = -1;
      switch (event) {
        case Event::end:
        case Event::budget:
          break;
        case Event::drop: {
          const Index j = active_[static_cast<std::size_t>(who)];
          dropped_sign = signs_[static_cast<std::size_t>(who)];
          beta_[j] = 0.0;
          remove_active(who);
          just_dropped = j;
          // Columns ignored as dependent may be independent of the smaller set.
          for (auto& s : state_) {
            if (s == kIgnored) s = kInactive;
          }
          break;
        }
        case Event::join:
          join(who);
          break;
      }

      if (step % opt_.refresh_every == 0 && event != Event::end) refresh();

      const bool tiny = gamma <= opt_.step_tol * level0_;
      if (tiny && event != Event::end && event != Event::budget) {
        set_last_active();
      } else {
        emit();
        if (event == Event::end) {
          path_.set_unconstrained(true);
          break;
        }
        if (event == Event::budget) break;
        if (!notify()) break;
      }
    }
    return std::move(path_);
  }

 private:
  Index strongest_inactive() {
    double best = 0.0;
    Index who = -1;
    for (Index j = 0; j < p_; ++j) {
      if (state_[static_cast<std::size_t>(j)] != kInactive) continue;
      const double v = std::abs(corr_[j]);
      if (v > best * (1.0 + 1e-12)) {
        best = v;
        who = j;
      }
    }
    if (who >= 0) level_ = best;
    return best > 0.0 ? who : -1;
  }

  void join(Index j) {
    const Vector g = X_.transpose() * X_.col(j);
    const auto k = static_cast<Index>(active_.size());
    Vector cross(k);
    for (Index t = 0; t < k; ++t) cross[t] = g[active_[static_cast<std::size_t>(t)]];
    if (!chol_.try_append(cross, g[j], opt_.collinear_tol)) {
      state_[static_cast<std::size_t>(j)] = kIgnored;
      return;
    }
    if (gram_.cols() <= k) {
      gram_.conservativeResize(p_, std::max<Index>(2 * gram_.cols(), 16));
    }
    gram_.col(k) = g;
    const int s = corr_[j] >= 0.0 ? 1 : -1;
    active_.push_back(j);
    signs_.push_back(s);
    state_[static_cast<std::size_t>(j)] = kActive;
    corr_[j] = s * level_;
  }

  void remove_active(Index t) {
    const auto k = static_cast<Index>(active_.size());
    chol_.remove(t);
    for (Index q = t; q + 1 < k; ++q) gram_.col(q) = gram_.col(q + 1);
    state_[static_cast<std::size_t>(active_[static_cast<std::size_t>(t)])] = kInactive;
    active_.erase(active_.begin() + t);
    signs_.erase(signs_.begin() + t);
  }

  Vector residual() const {
    Vector r = y_;
    for (Index j : active_) {
      if (beta_[j] != 0.0) r.noalias() -= beta_[j] * X_.col(j);
    }
    return r;
  }

  void refresh() {
    corr_ = X_.transpose() * residual();
    if (active_.empty()) return;
    double s = 0.0;
    for (std::size_t t = 0; t < active_.size(); ++t) s += signs_[t] * corr_[active_[t]];
    level_ = s / static_cast<double>(active_.size());
    for (std::size_t t = 0; t < active_.size(); ++t) corr_[active_[t]] = signs_[t] * level_;
  }

  void emit() {
    Breakpoint bp;
    std::vector<Index> support = active_;
    std::sort(support.begin(), support.end());
    for (Index j : support) {
      if (beta_[j] != 0.0) {
        bp.beta.index.push_back(j);
        bp.beta.value.push_back(beta_[j]);
      }
    }
    bp.budget = bp.beta.l1();
    budget_ = bp.budget;
    bp.rss = residual().squaredNorm();
    bp.lagrange = level_;
    bp.active = active_;
    bp.signs = signs_;
    path_.mutable_breakpoints().push_back(std::move(bp));
  }

  void set_last_active() {
    Breakpoint& bp = path_.mutable_breakpoints().back();
    bp.active = active_;
    bp.signs = signs_;
    bp.lagrange = level_;
  }

  bool notify() {
    if (!opt_.observer) return true;
    if (opt_.observer(path_.back())) return true;
    path_.set_stopped_early(true);
    return false;
  }

  const Matrix& X_;
  const Vector& y_;
  const PathOptions& opt_;
  Index n_;
  Index p_;
  LassoPath path_;

  Vector beta_;
  Vector corr_;  // X^T (y - X beta)
  double level_ = 0.0;
  double level0_ = 0.0;
  double budget_ = 0.0;
  std::vector<char> state_;
  std::vector<Index> active_;
  std::vector<int> signs_;
  Matrix gram_;  // X^T x_j for active j, in active order
  ActiveCholesky chol_;
};

}  // namespace

LassoPath compute_path(const Sample& sample, const PathOptions& options) {
  return HomotopySolver(sample, options).run();
}

LassoPath compute_path(const Sample& sample, double budget_max) {
  PathOptions opt;
  opt.budget_max = budget_max;
  return compute_path(sample, opt);
}

double residual_sum_of_squares(const Sample& sample, const Vector& beta) {
  return (sample.y - sample.X * beta).squaredNorm();
}

ParetoCertificate pareto_certificate(const Sample& sample, const Vector& beta, double tol) {
  if (beta.size() != sample.cols()) {
    throw std::invalid_argument("pareto_certificate: length mismatch");
  }
  const Vector g = sample.X.transpose() * (sample.y - sample.X * beta);
  ParetoCertificate cert;
  cert.lagrange_value = g.size() ? g.cwiseAbs().maxCoeff() : 0.0;
  cert.max_inactive_excess = -std::numeric_limits<double>::infinity();
  for (Index j = 0; j < beta.size(); ++j) {
    if (beta[j] != 0.0) {
      ++cert.sparsity;
      const double aligned = (beta[j] > 0.0 ? 1.0 : -1.0) * g[j];
      cert.max_active_residual =
          std::max(cert.max_active_residual, std::abs(aligned - cert.lagrange_value));
    } else {
      cert.max_inactive_excess =
          std::max(cert.max_inactive_excess, std::abs(g[j]) - cert.lagrange_value);
    }
  }
  if (cert.sparsity == beta.size()) cert.max_inactive_excess = 0.0;
  cert.passed = cert.max_active_residual <= tol && cert.max_inactive_excess <= tol &&
                cert.sparsity <= sample.rows();
  return cert;
}

ConstrainedSolution solve_constrained(const Sample& sample, double budget) {
  if (!(budget >= 0.0)) throw std::invalid_argument("solve_constrained: budget must be >= 0");
  const LassoPath path = compute_path(sample, budget);
  ConstrainedSolution out;
  out.beta = path.evaluate(std::min(budget, path.back().budget));
  out.rss = residual_sum_of_squares(sample, out.beta);
  out.certificate = pareto_certificate(sample, out.beta, 1e-8);
  return out;
}

Vector solve_penalized_oracle(const Sample& sample, double lambda, const PenalizedOptions& options,
                              const Vector* start) {
  if (!(lambda >= 0.0)) throw std::invalid_argument("penalized oracle: lambda must be >= 0");
  const Matrix& X = sample.X;
  const Index p = X.cols();
  Vector beta = start ? *start : Vector::Zero(p);
  Vector r = sample.y - X * beta;
  const Vector col_sq = X.colwise().squaredNorm().transpose();
  const double half = 0.5 * lambda;
  for (long sweep = 0; sweep < options.max_sweeps; ++sweep) {
    double largest = 0.0;
    for (Index j = 0; j < p; ++j) {
      if (col_sq[j] == 0.0) {
        beta[j] = 0.0;
        continue;
      }
      const double rho = X.col(j).dot(r) + col_sq[j] * beta[j];
      const double shrunk = rho > half ? rho - half : (rho < -half ? rho + half : 0.0);
      const double next = shrunk / col_sq[j];
      const double delta = next - beta[j];
      if (delta != 0.0) {
        r.noalias() -= delta * X.col(j);
        beta[j] = next;
        largest = std::max(largest, std::abs(delta));
      }
    }
    if (largest <= options.tol) return beta;
  }
  throw ConvergenceError("coordinate descent did not converge within " +
                         std::to_string(options.max_sweeps) + " sweeps");
}

void write_path_csv(const LassoPath& path, std::ostream& os) {
  os << "k,B,rss,nnz\n";
  char b[64];
  char r[64];
  for (std::size_t k = 0; k < path.size(); ++k) {
    std::snprintf(b, sizeof b, "%.17g", path[k].budget);
    std::snprintf(r, sizeof r, "%.17g", path[k].rss);
    os << k << ',' << b << ',' << r << ',' << path[k].beta.nnz() << '\n';
  }
}

void write_path_coefficients_csv(const LassoPath& path, std::ostream& os) {
  os << "k,j,beta\n";
  char v[64];
  for (std::size_t k = 0; k < path.size(); ++k) {
    const auto& beta = path[k].beta;
    for (std::size_t t = 0; t < beta.index.size(); ++t) {
      std::snprintf(v, sizeof v, "%.17g", beta.value[t]);
      os << k << ',' << beta.index[t] << ',' << v << '\n';
    }
  }
}

}  // namespace l1lb
