#include <doctest.h>

#include <sstream>

#include "l1lb/bounds.hpp"
#include "l1lb/lasso_path.hpp"
#include "l1lb/risk.hpp"
#include "oracles.hpp"

using namespace l1lb;

TEST_CASE("excess risk at the truth and at zero") {
  const Instance t1 = make_theorem1_instance(30, 90, 0.2);
  const auto at_star = excess_risk(t1, t1.beta_star);
  CHECK(at_star.excess == 0.0);
  CHECK(at_star.total_risk == doctest::Approx(0.04));
  CHECK_FALSE(at_star.terms.has_value());
  CHECK(excess_risk(t1, Vector::Zero(90)).excess == doctest::Approx(t1.beta_star.squaredNorm()).epsilon(1e-15));
  CHECK_THROWS_AS(excess_risk(t1, Vector::Zero(89)), std::invalid_argument);

  const Instance t2 = make_theorem2_instance(30, 90, 0.0);
  CHECK(excess_risk(t2, t2.beta_star).excess == 0.0);
  CHECK(std::abs(excess_risk(t2, *t2.beta_dense).excess) < 1e-14);
}

TEST_CASE("term decomposition equals the dense quadratic form") {
  const Instance inst = make_theorem2_instance(30, 90, 0.0);
  const Matrix dense = oracle::theorem2_covariance(90);
  std::mt19937_64 rng(31);
  for (int probe = 0; probe < 50; ++probe) {
    Vector beta = 0.3 * oracle::random_gaussian(90, 1, rng);
    if (probe % 5 == 0) beta = *inst.beta_dense * (0.5 + 0.1 * probe / 5);
    const auto r = excess_risk(inst, beta);
    const Vector d = beta - inst.beta_star;
    const double ref = d.dot(dense * d);
    REQUIRE(r.terms.has_value());
    CHECK(r.excess == doctest::Approx(ref).epsilon(1e-10));
    CHECK(r.terms->sum() == doctest::Approx(ref).epsilon(1e-10));
    CHECK(r.terms->term1 >= 0.0);
  }
}

TEST_CASE("empirical risk agrees with the closed form") {
  const Index N = 100000;
  SUBCASE("beta = beta*, sigma = 0.2") {
    const Instance inst = make_theorem1_instance(30, 90, 0.2);
    const auto r = empirical_risk(inst.beta_star, sample_rows(inst, N, 101));
    CHECK(std::abs(r.value - 0.04) <= 3 * r.standard_error);
  }
  SUBCASE("beta = 0, sigma = 0") {
    const Instance inst = make_theorem1_instance(30, 90, 0.0);
    const auto r = empirical_risk(Vector::Zero(90), sample_rows(inst, N, 102));
    CHECK(std::abs(r.value - inst.beta_star.squaredNorm()) <= 3 * r.standard_error);
  }
  SUBCASE("20 random coefficient vectors, theorem 2") {
    const Instance inst = make_theorem2_instance(30, 90, 0.3);
    const Sample test = sample_rows(inst, N, 103);
    std::mt19937_64 rng(104);
    for (int k = 0; k < 20; ++k) {
      const Vector beta = 0.1 * oracle::random_gaussian(90, 1, rng);
      const auto r = empirical_risk(beta, test);
      CHECK(std::abs(r.value - excess_risk(inst, beta).total_risk) <= 3 * r.standard_error);
    }
  }
  SUBCASE("empty sample") {
    Sample empty;
    empty.X = Matrix(0, 3);
    CHECK_THROWS_AS(empirical_risk(Vector::Zero(3), empty), std::invalid_argument);
  }
}

TEST_CASE("continuous minimum over a segment") {
  // identity covariance, one segment from 0 to b: the minimizer is the projection of beta*
  Matrix sig = Matrix::Identity(3, 3);
  Vector star(3);
  star << 1.0, 1.0, 0.0;
  const Instance inst = make_dense_instance(sig, star, 5, 0.0);
  LassoPath path(5, 3);
  Breakpoint a, b;
  b.beta.index = {0, 2};
  b.beta.value = {2.0, 2.0};
  b.budget = 4.0;
  path.mutable_breakpoints() = {a, b};
  const auto m = min_excess_over_path(inst, path);
  // projection coefficient t = <star, b> / |b|^2 = 2 / 8
  const Vector proj = 0.25 * b.beta.dense(3);
  CHECK(m.excess == doctest::Approx((proj - star).squaredNorm()).epsilon(1e-14));
  CHECK(m.budget == doctest::Approx(1.0).epsilon(1e-14));
  const auto curve = risk_curve(inst, path);
  REQUIRE(curve.size() == 3);
  CHECK(curve[1].segment_minimum);

  CHECK_THROWS(min_excess_over_path(inst, LassoPath(5, 3)));
}

TEST_CASE("path through the truth has zero minimum") {
  // noiseless, n > p, identity covariance: the path ends at beta*
  std::mt19937_64 rng(6);
  Vector star = Vector::Zero(4);
  star << 0.5, -0.25, 0, 0.125;
  const Instance inst = make_dense_instance(Matrix::Identity(4, 4), star, 12, 0.0);
  const Sample s = sample_design(inst, 1);
  const auto m = min_excess_over_path(inst, compute_path(s));
  CHECK(m.excess < 1e-24);
}

TEST_CASE("minimum never exceeds any breakpoint excess") {
  for (int tag : {1, 2}) {
    const Instance inst = make_instance(tag, 30, 90, 0.0);
    const Sample s = sample_design(inst, 17);
    const LassoPath path = compute_path(s);
    const auto m = min_excess_over_path(inst, path);
    for (const auto& bp : path.breakpoints()) {
      CHECK(m.excess <= excess_risk(inst, bp.beta.dense(90)).excess);
    }
    // brute force along the path on a fine grid
    double grid_min = INFINITY;
    for (int k = 0; k <= 4000; ++k) {
      const double B = path.back().budget * k / 4000.0;
      grid_min = std::min(grid_min, excess_risk(inst, path.evaluate(B)).excess);
    }
    CHECK(m.excess <= grid_min + 1e-15);
    CHECK(m.excess >= grid_min - 1e-3 * grid_min);
    CHECK(m.excess >= theorem_lower_bound(tag, 30, 0.0).fast);
  }
}

TEST_CASE("risk curve csv") {
  std::vector<RiskCurvePoint> curve{{0.0, 0.5, false}, {1.0, 0.25, true}};
  std::ostringstream os;
  write_risk_curve_csv(curve, 0.5, os);
  CHECK(os.str() == "B,excess,total\n0,0.5,0.75\n1,0.25,0.5\n");
}
