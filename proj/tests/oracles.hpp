#pragma once

// Independent reference computations used by the tests. Nothing here calls the solver or
// the structured covariance code.

#include <Eigen/Dense>

#include <cmath>
#include <limits>
#include <random>
#include <vector>

#include "l1lb/common.hpp"
#include "l1lb/instance.hpp"

namespace oracle {

using l1lb::Index;
using l1lb::Matrix;
using l1lb::Vector;

struct QpSolution {
  Vector beta;
  double rss = std::numeric_limits<double>::infinity();
};

// min ||y - X b||^2 s.t. ||b||_1 <= B by enumeration of sign patterns in {-1, 0, +1}^p.
// On each face {s^T b = B, sign(b) = s} the problem is an equality-constrained least squares,
// solved from its KKT system; the interior candidate is the least-squares fit itself.
inline QpSolution brute_force_constrained(const Matrix& X, const Vector& y, double B) {
  const Index p = X.cols();
  QpSolution best;
  best.beta = Vector::Zero(p);
  best.rss = y.squaredNorm();
  auto consider = [&](const Vector& b) {
    if (b.lpNorm<1>() > B * (1 + 1e-12) + 1e-14) return;
    const double r = (y - X * b).squaredNorm();
    if (r < best.rss) {
      best.rss = r;
      best.beta = b;
    }
  };
  consider(X.completeOrthogonalDecomposition().solve(y));

  std::vector<int> s(static_cast<std::size_t>(p), -1);
  Index total = 1;
  for (Index j = 0; j < p; ++j) total *= 3;
  for (Index code = 0; code < total; ++code) {
    Index c = code;
    std::vector<Index> S;
    for (Index j = 0; j < p; ++j) {
      s[j] = static_cast<int>(c % 3) - 1;
      c /= 3;
      if (s[j] != 0) S.push_back(j);
    }
    if (S.empty()) continue;
    const Index k = static_cast<Index>(S.size());
    Matrix K = Matrix::Zero(k + 1, k + 1);
    Vector rhs(k + 1);
    for (Index a = 0; a < k; ++a) {
      for (Index b = 0; b < k; ++b) K(a, b) = 2.0 * X.col(S[a]).dot(X.col(S[b]));
      K(a, k) = K(k, a) = s[S[a]];
      rhs[a] = 2.0 * X.col(S[a]).dot(y);
    }
    rhs[k] = B;
    const Vector sol = K.completeOrthogonalDecomposition().solve(rhs);
    if ((K * sol - rhs).norm() > 1e-8 * (1.0 + rhs.norm())) continue;
    Vector b = Vector::Zero(p);
    bool ok = true;
    for (Index a = 0; a < k; ++a) {
      if (s[S[a]] * sol[a] < -1e-12) ok = false;
      b[S[a]] = sol[a];
    }
    if (ok) consider(b);
  }
  return best;
}

inline double penalized_objective(const Matrix& X, const Vector& y, const Vector& b, double lambda) {
  return (y - X * b).squaredNorm() + lambda * b.lpNorm<1>();
}

// Theorem-2 covariance assembled from its latent representation: covariates are A * (u, w1, w2)
// with A mapping p-1 independent standard normals to (u, v, w1, w2).
inline Matrix theorem2_covariance(Index p) {
  const Index m = p - 3;
  const double lp = std::log(static_cast<double>(p));
  Vector tau(m);
  for (Index j = 0; j < m; ++j) tau[j] = 1.0 / (4.0 * lp * static_cast<double>(j + 1));
  const double c = std::sqrt(1.0 - tau.squaredNorm());
  Matrix A = Matrix::Zero(p, p - 1);
  for (Index j = 0; j < m; ++j) A(j, j) = 1.0;
  A.row(m).head(m) = -tau.transpose();
  A(m, m) = c / std::sqrt(2.0);
  A(m, m + 1) = c / std::sqrt(2.0);
  A(m + 1, m) = 1.0;
  A(m + 2, m + 1) = 1.0;
  return A * A.transpose();
}

inline Matrix random_gaussian(Index rows, Index cols, std::mt19937_64& rng) {
  std::normal_distribution<double> g;
  Matrix M(rows, cols);
  for (Index i = 0; i < rows; ++i) {
    for (Index j = 0; j < cols; ++j) M(i, j) = g(rng);
  }
  return M;
}

inline l1lb::Sample make_sample(Matrix X, Vector y) {
  l1lb::Sample s;
  s.z = Vector::Zero(y.size());
  s.X = std::move(X);
  s.y = std::move(y);
  return s;
}

// Random regression problem with a sparse truth plus noise.
inline l1lb::Sample random_problem(Index n, Index p, std::mt19937_64& rng) {
  Matrix X = random_gaussian(n, p, rng);
  std::normal_distribution<double> g;
  Vector beta = Vector::Zero(p);
  for (Index j = 0; j < std::min<Index>(p, 3); ++j) beta[(j * 7) % p] = g(rng);
  Vector y = X * beta;
  for (Index i = 0; i < n; ++i) y[i] += 0.5 * g(rng);
  return make_sample(std::move(X), std::move(y));
}

}  // namespace oracle
