#include "l1lb/verify.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <ostream>

namespace l1lb {

namespace {

// First `k` entries of a uniform random permutation of [0, p).
std::vector<Index> random_subset(Index p, Index k, Rng& rng) {
  std::vector<Index> all(static_cast<std::size_t>(p));
  std::iota(all.begin(), all.end(), Index{0});
  for (Index t = 0; t < k; ++t) {
    std::uniform_int_distribution<Index> pick(t, p - 1);
    std::swap(all[static_cast<std::size_t>(t)], all[static_cast<std::size_t>(pick(rng))]);
  }
  all.resize(static_cast<std::size_t>(k));
  std::sort(all.begin(), all.end());
  return all;
}

// n x m design restricted to the first m covariates.
Matrix leading_columns(const Instance& instance, Index rows, Index m, std::uint64_t seed) {
  const bool iid = instance.covariance.kind() == CovarianceKind::identity ||
                   (instance.covariance.kind() == CovarianceKind::theorem2_structured &&
                    m <= instance.p - 3);
  if (iid) {
    NormalSource normal(seed);
    Matrix X(rows, m);
    for (Index i = 0; i < rows; ++i) {
      for (Index j = 0; j < m; ++j) X(i, j) = normal();
    }
    return X;
  }
  return sample_rows(instance, rows, seed).X.leftCols(m);
}

std::string format_support(const std::vector<Index>& s) {
  std::string out = "J={";
  for (std::size_t t = 0; t < s.size(); ++t) {
    if (t) out += ' ';
    out += std::to_string(s[t]);
  }
  return out + "}";
}

}  // namespace

InequalityTrialLog make_log(std::size_t trial_id, double lhs, double rhs, InequalitySense sense,
                            std::string context) {
  InequalityTrialLog log;
  log.trial_id = trial_id;
  log.lhs = lhs;
  log.rhs = rhs;
  log.ratio = rhs != 0.0 ? lhs / rhs : (lhs == 0.0 ? 0.0 : std::numeric_limits<double>::infinity());
  const double slack = kInequalitySlack * (1.0 + std::abs(rhs));
  log.satisfied = sense == InequalitySense::at_most ? lhs <= rhs + slack : lhs >= rhs - slack;
  log.context = std::move(context);
  return log;
}

LogSummary summarize(const std::vector<InequalityTrialLog>& logs) {
  LogSummary s;
  s.count = logs.size();
  if (logs.empty()) return s;
  s.max_ratio = -std::numeric_limits<double>::infinity();
  s.min_ratio = std::numeric_limits<double>::infinity();
  for (const auto& log : logs) {
    if (!log.satisfied) ++s.violations;
    s.max_ratio = std::max(s.max_ratio, log.ratio);
    s.min_ratio = std::min(s.min_ratio, log.ratio);
  }
  return s;
}

// ---------------------------------------------------------------------------

InequalitySides lemma_max_sides(const Instance& instance, const Sample& sample,
                                const std::vector<Index>& support, const Vector& beta_tilde,
                                double spectral) {
  if (beta_tilde.size() != instance.p || sample.cols() != instance.p) {
    throw std::invalid_argument("lemma_max_sides: dimension mismatch");
  }
  const Vector delta = beta_tilde - instance.beta_star;
  const Vector fitted = sample.X * delta;
  double lhs2 = 0.0;
  for (Index j : support) {
    const double v = sample.X.col(j).dot(fitted);
    lhs2 += v * v;
  }
  const double n = static_cast<double>(sample.rows());
  const double factor =
      spectral * 16.0 * std::numbers::sqrt2 * n * std::log(static_cast<double>(instance.p));
  return {std::sqrt(lhs2), factor * std::sqrt(instance.covariance.quadratic_form(delta))};
}

std::vector<InequalityTrialLog> check_lemma_max(const Instance& instance, const Sample& sample,
                                                std::size_t trials, std::uint64_t seed) {
  const Index n = sample.rows();
  const Index p = instance.p;
  if (n > p) throw std::invalid_argument("check_lemma_max: needs p >= n");
  const double spectral = instance.covariance.spectral_norm();
  std::vector<InequalityTrialLog> logs;
  logs.reserve(4 * trials);
  for (std::size_t t = 0; t < trials; ++t) {
    NormalSource normal(derive_seed(seed, 0, t));
    const std::vector<Index> J = random_subset(p, n, normal.engine());
    const std::string where = format_support(J);

    Vector gaussian = Vector::Zero(p);
    const double scale = 1.0 / std::sqrt(static_cast<double>(n));
    for (Index j : J) gaussian[j] = scale * normal();
    auto sides = lemma_max_sides(instance, sample, J, gaussian, spectral);
    logs.push_back(make_log(t, sides.lhs, sides.rhs, InequalitySense::at_most, "gaussian " + where));

    for (double mult : {0.5, 1.0, 2.0}) {
      Vector scaled = Vector::Zero(p);
      for (Index j : J) scaled[j] = mult * instance.beta_star[j];
      sides = lemma_max_sides(instance, sample, J, scaled, spectral);
      char label[32];
      std::snprintf(label, sizeof label, "scaled %.1f ", mult);
      logs.push_back(make_log(t, sides.lhs, sides.rhs, InequalitySense::at_most, label + where));
    }
  }
  return logs;
}

// ---------------------------------------------------------------------------

Vector project_out_mean(const Vector& v) {
  if (v.size() == 0) return v;
  return (v.array() - v.mean()).matrix();
}

double min_centred_sum_of_squares(const Vector& values, Index k) {
  if (k < 1 || k > values.size()) throw std::invalid_argument("window size out of range");
  std::vector<double> sorted(values.data(), values.data() + values.size());
  std::sort(sorted.begin(), sorted.end());
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t start = 0; start + static_cast<std::size_t>(k) <= sorted.size(); ++start) {
    // two-pass for accuracy; windows are short
    double mean = 0.0;
    for (Index t = 0; t < k; ++t) mean += sorted[start + static_cast<std::size_t>(t)];
    mean /= static_cast<double>(k);
    double ss = 0.0;
    for (Index t = 0; t < k; ++t) {
      const double d = sorted[start + static_cast<std::size_t>(t)] - mean;
      ss += d * d;
    }
    best = std::min(best, ss);
  }
  return best;
}

std::vector<InequalityTrialLog> check_lemma_min(const Instance& instance, Index n, double sigma,
                                                std::size_t trials, std::uint64_t seed) {
  if (!(sigma > 0.0)) throw HypothesisError("lemma_min: requires sigma > 0");
  const double ratio = std::sqrt(static_cast<double>(n)) / sigma;
  if (ratio < 100.0) {
    throw HypothesisError("lemma_min: hypothesis sqrt(n)/sigma >= 100 violated (got " +
                          std::to_string(ratio) + ")");
  }
  const auto m = static_cast<Index>(std::ceil(ratio));
  const auto k_min = static_cast<Index>(std::ceil(ratio / 2.0));
  if (m > instance.p) throw HypothesisError("lemma_min: ceil(sqrt(n)/sigma) exceeds p");

  std::vector<Index> leading(static_cast<std::size_t>(m));
  std::iota(leading.begin(), leading.end(), Index{0});
  const Matrix ambient = instance.covariance.block(leading);
  const double lambda_ambient =
      Eigen::SelfAdjointEigenSolver<Matrix>(ambient, Eigen::EigenvaluesOnly).eigenvalues()[0];
  const double nn = static_cast<double>(n);
  const double rhs = lambda_ambient * lambda_ambient * std::pow(nn, 1.5) / (200.0 * sigma);

  std::vector<InequalityTrialLog> logs;
  logs.reserve(2 * trials);
  for (std::size_t t = 0; t < trials; ++t) {
    NormalSource normal(derive_seed(seed, 1, t));
    Vector z(n);
    do {
      for (Index i = 0; i < n; ++i) z[i] = normal();
    } while (z.squaredNorm() < 0.5 * nn);

    const Matrix X = leading_columns(instance, n, m, derive_seed(seed, 2, t));
    const Vector corr = X.transpose() * z;

    std::uniform_int_distribution<Index> size_pick(k_min, m);
    const Index size = size_pick(normal.engine());
    const std::vector<Index> J1 = random_subset(m, size, normal.engine());
    Vector sub(size);
    for (Index a = 0; a < size; ++a) sub[a] = corr[J1[static_cast<std::size_t>(a)]];
    const double lhs = project_out_mean(sub).squaredNorm();

    std::string ctx = "random " + format_support(J1);
    char buf[96];
    std::snprintf(buf, sizeof buf, " lambda_ambient=%.17g", lambda_ambient);
    ctx += buf;
    if (instance.covariance.kind() != CovarianceKind::identity && size <= 200) {
      const double lambda_j1 =
          Eigen::SelfAdjointEigenSolver<Matrix>(instance.covariance.block(J1), Eigen::EigenvaluesOnly)
              .eigenvalues()[0];
      std::snprintf(buf, sizeof buf, " lambda_J1=%.17g", lambda_j1);
      ctx += buf;
    }
    logs.push_back(make_log(t, lhs, rhs, InequalitySense::at_least, std::move(ctx)));

    const double worst = min_centred_sum_of_squares(corr, k_min);
    logs.push_back(make_log(t, worst, rhs, InequalitySense::at_least,
                            "worst |J1|=" + std::to_string(k_min)));
  }
  return logs;
}

// ---------------------------------------------------------------------------

FrequencyCheck make_frequency_check(std::size_t trials, std::size_t violations, double bound) {
  if (trials == 0) throw std::invalid_argument("frequency check needs trials > 0");
  FrequencyCheck out;
  out.trials = trials;
  out.violations = violations;
  out.frequency = static_cast<double>(violations) / static_cast<double>(trials);
  out.bound = bound;
  const double b = std::clamp(bound, 0.0, 1.0);
  out.threshold = bound + 3.0 * std::sqrt(b * (1.0 - b) / static_cast<double>(trials));
  out.passed = out.frequency <= out.threshold;
  return out;
}

FrequencyCheck check_chi_square_fact(Index n, std::size_t trials, std::uint64_t seed) {
  if (n < 1) throw std::invalid_argument("chi-square check needs n >= 1");
  if (trials == 0) throw std::invalid_argument("chi-square check needs trials > 0");
  std::size_t violations = 0;
  for (std::size_t t = 0; t < trials; ++t) {
    NormalSource normal(derive_seed(seed, 3, t));
    double ss = 0.0;
    for (Index i = 0; i < n; ++i) {
      const double v = normal();
      ss += v * v;
    }
    if (ss < 0.5 * static_cast<double>(n)) ++violations;
  }
  return make_frequency_check(trials, violations, std::exp(-0.0625 * static_cast<double>(n)));
}

double gaussian_spectral_threshold(Index n, Index p) {
  return std::sqrt(16.0 * static_cast<double>(n) * std::log(static_cast<double>(p)));
}

FrequencyCheck check_gaussian_spectral_bound(Index n, Index p, std::size_t trials,
                                             std::uint64_t seed) {
  if (n < 1 || p < n) throw std::invalid_argument("spectral check needs 1 <= n <= p");
  if (trials == 0) throw std::invalid_argument("spectral check needs trials > 0");
  const double limit = gaussian_spectral_threshold(n, p);
  std::size_t violations = 0;
  Matrix A(n, n);
  for (std::size_t t = 0; t < trials; ++t) {
    NormalSource normal(derive_seed(seed, 4, t));
    for (Index i = 0; i < n; ++i) {
      for (Index j = 0; j < n; ++j) A(i, j) = normal();
    }
    const double norm = Eigen::JacobiSVD<Matrix>(A).singularValues()[0];
    if (norm > limit) ++violations;
  }
  const double nn = static_cast<double>(n);
  return make_frequency_check(trials, violations,
                              std::exp(-2.0 * nn * std::log(static_cast<double>(p))));
}

// ---------------------------------------------------------------------------

double min_eigenvalue_closed_form(const Matrix& a) {
  switch (a.rows()) {
    case 1:
      return a(0, 0);
    case 2: {
      const double mid = 0.5 * (a(0, 0) + a(1, 1));
      const double half = 0.5 * (a(0, 0) - a(1, 1));
      return mid - std::hypot(half, a(0, 1));
    }
    case 3: {
      const double off = a(0, 1) * a(0, 1) + a(0, 2) * a(0, 2) + a(1, 2) * a(1, 2);
      if (off == 0.0) return a.diagonal().minCoeff();
      const double q = a.trace() / 3.0;
      const double d0 = a(0, 0) - q;
      const double d1 = a(1, 1) - q;
      const double d2 = a(2, 2) - q;
      const double scale = std::sqrt((d0 * d0 + d1 * d1 + d2 * d2 + 2.0 * off) / 6.0);
      Matrix b = a;
      b.diagonal().array() -= q;
      b /= scale;
      const double r = std::clamp(b.determinant() / 2.0, -1.0, 1.0);
      const double phi = std::acos(r) / 3.0;
      return q + 2.0 * scale * std::cos(phi + 2.0 * std::numbers::pi / 3.0);
    }
    default:
      throw std::invalid_argument("closed-form eigenvalue needs order 1..3");
  }
}

RestrictedEigenReport check_restricted_eigenvalue(const Matrix& sigma, Index k, std::size_t probes,
                                                  std::uint64_t seed, double threshold) {
  const Index p = sigma.rows();
  if (p != sigma.cols()) throw std::invalid_argument("covariance must be square");
  if (p > kMaxEnumerationDim) {
    throw std::invalid_argument("restricted eigenvalue check limited to p <= " +
                                std::to_string(kMaxEnumerationDim));
  }
  if (k < 1 || k > kMaxEnumerationSparsity || k > p) {
    throw std::invalid_argument("restricted eigenvalue check limited to 1 <= k <= 3");
  }

  RestrictedEigenReport report;
  report.min_support_eigenvalue = std::numeric_limits<double>::infinity();
  std::vector<Index> best_support;
  auto visit = [&](std::vector<Index> J) {
    const double lam = min_eigenvalue_closed_form(
        [&] {
          Matrix b(static_cast<Index>(J.size()), static_cast<Index>(J.size()));
          for (std::size_t r = 0; r < J.size(); ++r)
            for (std::size_t c = 0; c < J.size(); ++c) b(r, c) = sigma(J[r], J[c]);
          return b;
        }());
    if (lam < report.min_support_eigenvalue) {
      report.min_support_eigenvalue = lam;
      best_support = J;
    }
    report.supports.push_back({std::move(J), lam});
  };
  for (Index i = 0; i < p; ++i) {
    visit({i});
    if (k < 2) continue;
    for (Index j = i + 1; j < p; ++j) {
      visit({i, j});
      if (k < 3) continue;
      for (Index l = j + 1; l < p; ++l) visit({i, j, l});
    }
  }

  // A support eigenvector lies in the cone with b_{J^c} = 0.
  double best = report.min_support_eigenvalue;
  Vector best_probe = Vector::Zero(p);
  {
    Matrix b(static_cast<Index>(best_support.size()), static_cast<Index>(best_support.size()));
    for (std::size_t r = 0; r < best_support.size(); ++r)
      for (std::size_t c = 0; c < best_support.size(); ++c)
        b(r, c) = sigma(best_support[r], best_support[c]);
    const Vector ev = Eigen::SelfAdjointEigenSolver<Matrix>(b).eigenvectors().col(0);
    for (std::size_t r = 0; r < best_support.size(); ++r) best_probe[best_support[r]] = ev[r];
  }
  std::vector<Index> witness_support = best_support;

  auto consider = [&](const Vector& probe, const std::vector<Index>& J) {
    double on = 0.0;
    for (Index j : J) on += probe[j] * probe[j];
    if (on == 0.0) return;
    const double r = probe.dot(sigma * probe) / on;
    if (r < best) {
      best = r;
      best_probe = probe;
      witness_support = J;
    }
  };

  // Pair probes e_i - t e_j with the optimal t clipped to the cone (t <= 3).
  for (Index i = 0; i < p; ++i) {
    for (Index j = 0; j < p; ++j) {
      if (i == j || sigma(j, j) <= 0.0) continue;
      const double t = std::clamp(sigma(i, j) / sigma(j, j), -3.0, 3.0);
      const double r = sigma(i, i) - 2.0 * t * sigma(i, j) + t * t * sigma(j, j);
      if (r < best) {
        Vector probe = Vector::Zero(p);
        probe[i] = 1.0;
        probe[j] = -t;
        consider(probe, {i});
      }
    }
  }

  NormalSource normal(seed);
  for (std::size_t s = 0; s < probes; ++s) {
    std::uniform_int_distribution<Index> size_pick(1, k);
    const Index size = size_pick(normal.engine());
    const std::vector<Index> J = random_subset(p, size, normal.engine());
    Vector probe = Vector::Zero(p);
    double on_l1 = 0.0;
    for (Index j : J) {
      probe[j] = normal();
      on_l1 += std::abs(probe[j]);
    }
    if (p > size) {
      std::uniform_int_distribution<Index> off_pick(1, p - size);
      const Index off_size = off_pick(normal.engine());
      std::vector<char> in_j(static_cast<std::size_t>(p), 0);
      for (Index j : J) in_j[static_cast<std::size_t>(j)] = 1;
      std::vector<Index> outside;
      for (Index j = 0; j < p; ++j)
        if (!in_j[static_cast<std::size_t>(j)]) outside.push_back(j);
      std::shuffle(outside.begin(), outside.end(), normal.engine());
      Vector tail = Vector::Zero(p);
      double tail_l1 = 0.0;
      for (Index t = 0; t < off_size; ++t) {
        const Index j = outside[static_cast<std::size_t>(t)];
        tail[j] = normal();
        tail_l1 += std::abs(tail[j]);
      }
      std::uniform_real_distribution<double> unit(0.0, 1.0);
      if (tail_l1 > 0.0) probe += tail * (3.0 * on_l1 * unit(normal.engine()) / tail_l1);
    }
    consider(probe, J);
  }

  report.kappa_upper_estimate = best;
  if (best < threshold) {
    report.witness = best_probe;
    report.witness_support = witness_support;
  }
  return report;
}

void write_inequality_csv(const std::vector<InequalityTrialLog>& logs, std::ostream& os) {
  os << "trial_id,lhs,rhs,ratio,satisfied\n";
  char l[64];
  char r[64];
  char q[64];
  for (const auto& log : logs) {
    std::snprintf(l, sizeof l, "%.17g", log.lhs);
    std::snprintf(r, sizeof r, "%.17g", log.rhs);
    std::snprintf(q, sizeof q, "%.17g", log.ratio);
    os << log.trial_id << ',' << l << ',' << r << ',' << q << ',' << (log.satisfied ? "true" : "false")
       << '\n';
  }
}

}  // namespace l1lb
