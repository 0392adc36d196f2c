#include "l1lb/instance.hpp"

#include <cmath>
#include <fstream>
#include <ostream>
#include <sstream>

#include <json.hpp>

namespace l1lb {

namespace {

void check_dimensions(Index n, Index p, double sigma) {
  if (n < 30) {
    throw HypothesisError("hypothesis n >= 30 violated (n = " + std::to_string(n) + ")");
  }
  if (p < 3 * n) {
    throw HypothesisError("hypothesis p >= 3n violated (n = " + std::to_string(n) +
                          ", p = " + std::to_string(p) + ")");
  }
  if (!(sigma >= 0.0) || !std::isfinite(sigma)) {
    throw HypothesisError("hypothesis sigma >= 0 violated");
  }
}

// 1 / (j * 4 ln p) for j = 1..count
Vector harmonic_profile(Index count, Index p) {
  const double scale = 4.0 * std::log(static_cast<double>(p));
  Vector out(count);
  for (Index j = 0; j < count; ++j) {
    out[j] = 1.0 / (static_cast<double>(j + 1) * scale);
  }
  return out;
}

}  // namespace

// ---------------------------------------------------------------------------
// CovarianceOp

CovarianceOp CovarianceOp::identity(Index p) {
  CovarianceOp op;
  op.kind_ = CovarianceKind::identity;
  op.p_ = p;
  return op;
}

CovarianceOp CovarianceOp::theorem2(Index p) {
  if (p < 4) {
    throw std::invalid_argument("theorem-2 covariance needs p >= 4");
  }
  CovarianceOp op;
  op.kind_ = CovarianceKind::theorem2_structured;
  op.p_ = p;
  op.tau_ = harmonic_profile(p - 3, p);
  op.c_ = std::sqrt(1.0 - op.tau_.squaredNorm());
  return op;
}

CovarianceOp CovarianceOp::dense(Matrix sigma) {
  if (sigma.rows() != sigma.cols()) {
    throw std::invalid_argument("covariance matrix must be square");
  }
  if (!sigma.isApprox(sigma.transpose(), 1e-12)) {
    throw std::invalid_argument("covariance matrix must be symmetric");
  }
  CovarianceOp op;
  op.kind_ = CovarianceKind::dense;
  op.p_ = sigma.rows();
  op.dense_ = std::move(sigma);
  return op;
}

Vector CovarianceOp::factor_apply(const Vector& v) const {
  switch (kind_) {
    case CovarianceKind::identity:
      return v;
    case CovarianceKind::theorem2_structured: {
      const Index m = p_ - 3;
      const double dv = v[m];
      const double lift = c_ / std::sqrt(2.0) * dv;
      Vector out(p_ - 1);
      out.head(m) = v.head(m) - tau_ * dv;
      out[m] = v[m + 1] + lift;
      out[m + 1] = v[m + 2] + lift;
      return out;
    }
    case CovarianceKind::dense:
      break;
  }
  throw std::logic_error("factor_apply is not defined for dense covariances");
}

Vector CovarianceOp::apply(const Vector& v) const {
  if (v.size() != p_) {
    throw std::invalid_argument("covariance apply: length mismatch");
  }
  switch (kind_) {
    case CovarianceKind::identity:
      return v;
    case CovarianceKind::theorem2_structured: {
      // Sigma v = L^T (L v)
      const Index m = p_ - 3;
      const Vector w = factor_apply(v);
      Vector out(p_);
      out.head(m) = w.head(m);
      out[m] = -tau_.dot(w.head(m)) + c_ / std::sqrt(2.0) * (w[m] + w[m + 1]);
      out[m + 1] = w[m];
      out[m + 2] = w[m + 1];
      return out;
    }
    case CovarianceKind::dense:
      return dense_ * v;
  }
  return v;
}

double CovarianceOp::bilinear(const Vector& a, const Vector& b) const {
  if (a.size() != p_ || b.size() != p_) {
    throw std::invalid_argument("covariance bilinear form: length mismatch");
  }
  switch (kind_) {
    case CovarianceKind::identity:
      return a.dot(b);
    case CovarianceKind::theorem2_structured:
      return factor_apply(a).dot(factor_apply(b));
    case CovarianceKind::dense:
      return a.dot(dense_ * b);
  }
  return 0.0;
}

double CovarianceOp::quadratic_form(const Vector& v) const {
  if (v.size() != p_) {
    throw std::invalid_argument("covariance quadratic form: length mismatch");
  }
  switch (kind_) {
    case CovarianceKind::identity:
      return v.squaredNorm();
    case CovarianceKind::theorem2_structured:
      return factor_apply(v).squaredNorm();
    case CovarianceKind::dense:
      return std::max(0.0, v.dot(dense_ * v));
  }
  return 0.0;
}

Matrix CovarianceOp::block(std::span<const Index> indices) const {
  const auto k = static_cast<Index>(indices.size());
  Matrix out(k, k);
  if (kind_ == CovarianceKind::dense) {
    for (Index a = 0; a < k; ++a) {
      for (Index b = 0; b < k; ++b) {
        out(a, b) = dense_(indices[a], indices[b]);
      }
    }
    return out;
  }
  const Index m = p_ - 3;
  const double vw = c_ / std::sqrt(2.0);
  auto entry = [&](Index i, Index j) -> double {
    if (i == j) return 1.0;
    if (kind_ == CovarianceKind::identity) return 0.0;
    if (i > j) std::swap(i, j);
    // i < j from here on
    if (j < m) return 0.0;            // u, u
    if (j == m) return -tau_[i];      // u, v
    if (i < m) return 0.0;            // u, w
    if (i == m) return vw;            // v, w
    return 0.0;                       // w1, w2
  };
  for (Index a = 0; a < k; ++a) {
    for (Index b = 0; b < k; ++b) {
      if (indices[a] < 0 || indices[a] >= p_ || indices[b] < 0 || indices[b] >= p_) {
        throw std::out_of_range("covariance block: index out of range");
      }
      out(a, b) = entry(indices[a], indices[b]);
    }
  }
  return out;
}

Matrix CovarianceOp::to_dense() const {
  if (kind_ == CovarianceKind::dense) {
    return dense_;
  }
  if (p_ > kMaxDenseDim) {
    throw std::length_error("refusing to materialize a dense covariance with p = " +
                            std::to_string(p_));
  }
  std::vector<Index> all(static_cast<std::size_t>(p_));
  for (Index j = 0; j < p_; ++j) all[static_cast<std::size_t>(j)] = j;
  return block(all);
}

double CovarianceOp::spectral_norm(double tol, int max_iter) const {
  if (p_ == 0) return 0.0;
  if (kind_ == CovarianceKind::identity) return 1.0;
  NormalSource normal(0x5eedULL);
  Vector v(p_);
  for (Index j = 0; j < p_; ++j) v[j] = std::abs(normal()) + 1.0;
  v.normalize();
  double lambda = 0.0;
  for (int it = 0; it < max_iter; ++it) {
    Vector w = apply(v);
    const double next = v.dot(w);
    const double norm = w.norm();
    if (norm == 0.0) return 0.0;
    v = w / norm;
    if (it > 0 && std::abs(next - lambda) <= tol * std::abs(next)) {
      // Rayleigh quotient of the final iterate
      return v.dot(apply(v));
    }
    lambda = next;
  }
  throw ConvergenceError("power iteration did not converge");
}

// ---------------------------------------------------------------------------
// Instances

bool slow_bound_hypothesis(int theorem_tag, Index n, Index p, double sigma) {
  if (!(sigma > 0.0)) return false;
  const double ratio = std::sqrt(static_cast<double>(n)) / sigma;
  const double upper = theorem_tag == 2 ? static_cast<double>(p - 3) : static_cast<double>(p);
  return ratio >= 100.0 && ratio <= upper;
}

Instance make_theorem1_instance(Index n, Index p, double sigma) {
  check_dimensions(n, p, sigma);
  Instance inst;
  inst.theorem_tag = 1;
  inst.n = n;
  inst.p = p;
  inst.sigma = sigma;
  inst.beta_star.resize(p);
  inst.beta_star.head(p - 1) = harmonic_profile(p - 1, p);
  inst.beta_star[p - 1] = 0.5;
  inst.covariance = CovarianceOp::identity(p);
  inst.slow_bound_applicable = slow_bound_hypothesis(1, n, p, sigma);
  return inst;
}

Instance make_theorem2_instance(Index n, Index p, double sigma) {
  check_dimensions(n, p, sigma);
  if (p < 90) {
    throw HypothesisError("hypothesis p >= 90 violated (p = " + std::to_string(p) + ")");
  }
  Instance inst;
  inst.theorem_tag = 2;
  inst.n = n;
  inst.p = p;
  inst.sigma = sigma;
  inst.covariance = CovarianceOp::theorem2(p);
  inst.beta_star = Vector::Zero(p);
  inst.beta_star[inst.w1_index()] = 0.5;
  inst.beta_star[inst.w2_index()] = 0.5;

  const Vector& tau = inst.covariance.tau();
  const double scale = 1.0 / std::sqrt(2.0 * (1.0 - tau.squaredNorm()));
  Vector dense = Vector::Zero(p);
  dense.head(p - 3) = scale * tau;
  dense[inst.v_index()] = scale;
  inst.beta_dense = std::move(dense);
  inst.slow_bound_applicable = slow_bound_hypothesis(2, n, p, sigma);
  return inst;
}

Instance make_instance(int theorem_tag, Index n, Index p, double sigma) {
  switch (theorem_tag) {
    case 1:
      return make_theorem1_instance(n, p, sigma);
    case 2:
      return make_theorem2_instance(n, p, sigma);
    default:
      throw std::invalid_argument("theorem must be 1 or 2 (got " + std::to_string(theorem_tag) +
                                  ")");
  }
}

Instance make_dense_instance(Matrix sigma_matrix, Vector beta_star, Index n, double sigma) {
  if (beta_star.size() != sigma_matrix.rows()) {
    throw std::invalid_argument("beta_star length does not match covariance");
  }
  Instance inst;
  inst.theorem_tag = 0;
  inst.n = n;
  inst.p = beta_star.size();
  inst.sigma = sigma;
  inst.beta_star = std::move(beta_star);
  inst.covariance = CovarianceOp::dense(std::move(sigma_matrix));
  return inst;
}

// ---------------------------------------------------------------------------
// Sampling

Sample sample_rows(const Instance& instance, Index rows, std::uint64_t seed) {
  const Index p = instance.p;
  NormalSource normal(seed);
  Sample s;
  s.seed = seed;
  s.X.resize(rows, p);

  switch (instance.covariance.kind()) {
    case CovarianceKind::identity:
      for (Index i = 0; i < rows; ++i) {
        for (Index j = 0; j < p; ++j) s.X(i, j) = normal();
      }
      break;
    case CovarianceKind::theorem2_structured: {
      // Draw u, w1, w2 per row; v is their fixed linear combination.
      const Index m = p - 3;
      for (Index i = 0; i < rows; ++i) {
        for (Index j = 0; j < m; ++j) s.X(i, j) = normal();
        s.X(i, m + 1) = normal();
        s.X(i, m + 2) = normal();
      }
      const double lift = instance.covariance.normalizer() / std::sqrt(2.0);
      s.X.col(m) = lift * (s.X.col(m + 1) + s.X.col(m + 2)) -
                   s.X.leftCols(m) * instance.covariance.tau();
      break;
    }
    case CovarianceKind::dense: {
      // Symmetric square root handles singular (e.g. duplicated-covariate) matrices.
      Eigen::SelfAdjointEigenSolver<Matrix> eig(instance.covariance.dense_matrix());
      const Vector root = eig.eigenvalues().cwiseMax(0.0).cwiseSqrt();
      const Matrix factor = eig.eigenvectors() * root.asDiagonal();
      Matrix g(p, rows);
      for (Index i = 0; i < rows; ++i) {
        for (Index j = 0; j < p; ++j) g(j, i) = normal();
      }
      s.X = (factor * g).transpose();
      break;
    }
  }

  s.z.resize(rows);
  for (Index i = 0; i < rows; ++i) s.z[i] = normal();
  s.y = s.X * instance.beta_star + instance.sigma * s.z;
  return s;
}

Sample sample_design(const Instance& instance, std::uint64_t seed) {
  return sample_rows(instance, instance.n, seed);
}

double covariance_quadratic_form(const Instance& instance, const Vector& v) {
  if (v.size() != instance.p) {
    throw std::invalid_argument("quadratic form: expected length " + std::to_string(instance.p) +
                                ", got " + std::to_string(v.size()));
  }
  return instance.covariance.quadratic_form(v);
}

double spectral_norm(const Instance& instance) { return instance.covariance.spectral_norm(); }

// ---------------------------------------------------------------------------
// Files

std::string instance_to_json(const Instance& instance) {
  if (instance.theorem_tag != 1 && instance.theorem_tag != 2) {
    throw std::invalid_argument("only theorem instances can be serialized");
  }
  nlohmann::ordered_json j;
  j["version"] = kInstanceFileVersion;
  j["theorem"] = instance.theorem_tag;
  j["n"] = instance.n;
  j["p"] = instance.p;
  j["sigma"] = instance.sigma;
  return j.dump(2);
}

Instance instance_from_json(const std::string& text) {
  const auto j = nlohmann::json::parse(text);
  const int version = j.at("version").get<int>();
  if (version != kInstanceFileVersion) {
    throw std::invalid_argument("unsupported instance file version " + std::to_string(version));
  }
  return make_instance(j.at("theorem").get<int>(), j.at("n").get<Index>(), j.at("p").get<Index>(),
                       j.at("sigma").get<double>());
}

void save_instance(const Instance& instance, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path);
  out << instance_to_json(instance) << '\n';
}

Instance load_instance(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return instance_from_json(buf.str());
}

void write_design_csv(const Sample& sample, std::ostream& os) {
  os << "i,j,value\n";
  char buf[64];
  for (Index i = 0; i < sample.rows(); ++i) {
    for (Index j = 0; j < sample.cols(); ++j) {
      std::snprintf(buf, sizeof buf, "%.17g", sample.X(i, j));
      os << i << ',' << j << ',' << buf << '\n';
    }
  }
}

void write_response_csv(const Sample& sample, std::ostream& os) {
  os << "i,y,z\n";
  char y[64];
  char z[64];
  for (Index i = 0; i < sample.rows(); ++i) {
    std::snprintf(y, sizeof y, "%.17g", sample.y[i]);
    std::snprintf(z, sizeof z, "%.17g", sample.z[i]);
    os << i << ',' << y << ',' << z << '\n';
  }
}

}  // namespace l1lb
