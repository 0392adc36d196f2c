#include <doctest.h>

#include <cmath>
#include <stdexcept>

#include "l1lb/bounds.hpp"

using namespace l1lb;

TEST_CASE("theorem lower bounds") {
  const auto t1 = theorem_lower_bound(1, 30, 0.0);
  CHECK(t1.fast == doctest::Approx(5.14446808812e-5).epsilon(1e-10));
  CHECK_FALSE(t1.slow.has_value());
  CHECK(theorem_lower_bound(2, 30, 0.0).fast == doctest::Approx(5.71607565347e-6).epsilon(1e-10));
  const auto s = theorem_lower_bound(1, 400, 0.2);
  REQUIRE(s.slow.has_value());
  CHECK(*s.slow == doctest::Approx(1.94266609227e-9).epsilon(1e-10));
  // sqrt(n)/sigma just under 100
  CHECK_FALSE(theorem_lower_bound(1, 400, 0.2001).slow.has_value());
  CHECK_THROWS_AS(theorem_lower_bound(1, 29, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(theorem_lower_bound(3, 30, 0.0), std::invalid_argument);
  // ceil(sqrt(n)/sigma) beats 3n once sigma is small: n = 400, sigma = 0.001 -> 20000
  const double slow_small = *theorem_lower_bound(1, 400, 0.001).slow;
  CHECK(slow_small == doctest::Approx(0.001 / (102400.0 * 20.0 * std::pow(std::log(20000.0), 2))));
}

TEST_CASE("lower bound monotonicity") {
  for (int tag : {1, 2}) {
    double prev = INFINITY;
    for (long n = 30; n < 5000; n = n * 3 / 2) {
      const double f = theorem_lower_bound(tag, n, 0.0).fast;
      CHECK(f < prev);
      prev = f;
    }
    // slow bound increases with sigma while sqrt(n)/sigma >= 100
    double last = 0.0;
    for (int i = 1; i <= 20; ++i) {
      const double sigma = i / 100.0;
      const auto b = theorem_lower_bound(tag, 400, sigma);
      REQUIRE(b.slow.has_value());
      CHECK(*b.slow > last);
      last = *b.slow;
    }
  }
}

TEST_CASE("optimistic rate") {
  const double v = optimistic_rate_bound(1000, 100, 1.0, 0.25);
  CHECK(v == doctest::Approx(7.303836477).epsilon(1e-9));
  const double lead = std::log(100.0) / (1000.0 / std::pow(std::log(1000.0), 3));
  CHECK(optimistic_rate_bound(1000, 100, 0.0, 0.0) == doctest::Approx(lead).epsilon(1e-14));
  CHECK(optimistic_rate_bound(1000, 100, 1.0, 0.0) == doctest::Approx(4 * lead).epsilon(1e-14));
  CHECK(optimistic_rate_bound(1000, 100, 2.0, 0.25) > v);
  CHECK(optimistic_rate_bound(2000, 100, 1.0, 0.25) < v);
  CHECK_THROWS(optimistic_rate_bound(2, 100, 1.0, 0.25));
}

TEST_CASE("optimistic sample complexity") {
  // sigma = 0: the (sigma^2 + eps) / eps factor is one
  const double base = 10.0 / (0.5 * 0.01);
  CHECK(optimistic_sample_complexity(10, 100, 0.5, 0.01, 0.0) ==
        doctest::Approx(base * std::log(100.0) * std::pow(std::log(base), 3)));
  // eps = sigma^2: leading product scales like 1/eps
  const double a = optimistic_sample_complexity(5, 100, 1.0, 0.04, 0.2);
  const double b = optimistic_sample_complexity(5, 100, 1.0, 0.01, 0.1);
  const double la = std::pow(std::log(5.0 / 0.04), 3), lb = std::pow(std::log(5.0 / 0.01), 3);
  CHECK((b / lb) / (a / la) == doctest::Approx(4.0).epsilon(1e-12));
  // sigma^2 >> eps: halving eps quadruples the leading product
  const double c = optimistic_sample_complexity(5, 100, 1.0, 1e-6, 10.0);
  const double d = optimistic_sample_complexity(5, 100, 1.0, 5e-7, 10.0);
  const double lc = std::pow(std::log(5.0 / 1e-6), 3), ld = std::pow(std::log(5.0 / 5e-7), 3);
  CHECK((d / ld) / (c / lc) == doctest::Approx(4.0).epsilon(1e-6));
  CHECK_THROWS(optimistic_sample_complexity(5, 100, 1.0, 0.0, 1.0));
  CHECK_THROWS(optimistic_sample_complexity(5, 100, 1.0, -1.0, 1.0));
}

TEST_CASE("fast rate") {
  CHECK(fast_rate_bound(1000, 100, 2, 1.0, 1.0) == doctest::Approx(0.009210340372).epsilon(1e-10));
  CHECK(fast_rate_bound(1000, 100, 2, 0.0, 1.0) == 0.0);
  CHECK(fast_rate_bound(2000, 100, 2, 1.0, 1.0) == doctest::Approx(0.5 * fast_rate_bound(1000, 100, 2, 1.0, 1.0)));
  CHECK_THROWS(fast_rate_bound(1000, 100, 2, 1.0, 0.0));
  CHECK(fast_rate_sample_complexity(2, 100, 1.0, 1.0, 0.009210340372) == doctest::Approx(1000.0).epsilon(1e-9));
  CHECK_THROWS(fast_rate_sample_complexity(2, 100, 1.0, -1.0, 0.1));
}

TEST_CASE("kappa from restricted isometry constants") {
  CHECK(kappa_from_rip(0.0, 0.0) == 1.0);
  CHECK(kappa_from_rip(0.5, 0.0) == doctest::Approx(std::sqrt(0.5)));
  CHECK_THROWS_WITH_AS(kappa_from_rip(0.4, 0.2), doctest::Contains("< 1"), std::invalid_argument);
  CHECK_THROWS(kappa_from_rip(1.0, 0.0));
}

TEST_CASE("l1 budget from sparsity") {
  CHECK(l1_budget_from_sparsity(4, 1.0) == 4.0);
  CHECK(l1_budget_from_sparsity(0, 3.0) == 0.0);
  CHECK(l1_budget_from_sparsity(1, 4.0) == 1.0);
  CHECK_THROWS(l1_budget_from_sparsity(1, 0.0));
}

TEST_CASE("bound table") {
  BoundParams bp;
  bp.n = 400;
  bp.p = 1200;
  bp.sigma = 0.2;
  bp.delta_2k = 0.4;
  bp.theta_k2k = 0.2;
  const auto rows = bound_table(bp);
  CHECK(rows.size() == 10);
  auto find = [&](const std::string& name) {
    for (const auto& r : rows) {
      if (r.name == name) return r;
    }
    FAIL("missing row " << name);
    return rows.front();
  };
  CHECK(find("theorem1_slow").value.has_value());
  CHECK_FALSE(find("kappa_from_rip").value.has_value());
  CHECK_FALSE(find("kappa_from_rip").note.empty());
  // pure: repeated evaluation is bit-identical
  const auto again = bound_table(bp);
  for (std::size_t i = 0; i < rows.size(); ++i) CHECK(rows[i].value == again[i].value);
}
