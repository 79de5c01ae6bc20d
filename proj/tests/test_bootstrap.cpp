#include <doctest.h>

#include <cmath>
#include <random>
#include <vector>

#include "dmq/bootstrap.hpp"
#include "dmq/error.hpp"
#include "dmq/evt.hpp"
#include "dmq/tmodel.hpp"

using namespace dmq;

namespace {

Sample pareto_sample(std::size_t n, std::size_t d, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Sample s(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(d));
  for (Eigen::Index i = 0; i < s.size(); ++i) s.data()[i] = std::pow(1.0 - u(rng), -0.5);
  return s;
}

}  // namespace

TEST_SUITE("bootstrap") {
  TEST_CASE("error by hand") {
    const std::vector<double> s{1, 2, 4};
    CHECK(bootstrap_error(s, 2) == doctest::Approx(0.9233).epsilon(1e-3));
  }

  TEST_CASE("error vanishes when M2 = 2 M1^2") {
    // Spacings ln(x) - ln(1) = {2, 0} give M1 = 1, M2 = 2.
    const std::vector<double> s{1, 1, std::exp(2.0)};
    CHECK(bootstrap_error(s, 2) == doctest::Approx(0.0).epsilon(1e-24));
  }

  TEST_CASE("error is scale invariant") {
    const std::vector<double> s{0.5, 1.1, 1.7, 2.9, 6.0, 13.0};
    std::vector<double> c(s);
    for (auto& v : c) v *= 37.0;
    for (std::size_t k = 2; k <= 5; ++k) {
      CHECK(bootstrap_error(c, k) == doctest::Approx(bootstrap_error(s, k)).epsilon(1e-10));
    }
  }

  TEST_CASE("running-sum curve agrees with direct evaluation") {
    std::mt19937_64 rng(31);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::vector<double> s(200);
    for (auto& v : s) v = std::pow(1.0 - u(rng), -0.4);
    std::sort(s.begin(), s.end());
    const auto curve = bootstrap_error_curve(s, 199);
    REQUIRE(curve.size() == 198);
    for (std::size_t k = 2; k <= 199; k += 7) {
      CHECK(curve[k - 2] == doctest::Approx(bootstrap_error(s, k)).epsilon(1e-9));
    }
  }

  TEST_CASE("resample sizes") {
    CHECK(resample_size_m1(500, 0.25) == 105);
    CHECK(resample_size_m2(105, 500) == 22);
    CHECK(resample_size_m1(10000, 0.25) == 1000);  // exact power
    CHECK(resample_size_m1(10000, 0.5) == 100);
    CHECK(resample_size_m1(5000, 0.25) == 594);
    CHECK(resample_size_m2(594, 5000) == 70);
  }

  TEST_CASE("convergence rate") {
    CHECK(convergence_rate(10, 100) == doctest::Approx(-0.5));
    CHECK(convergence_rate(100, 1000) == doctest::Approx(-1.0));
    CHECK(convergence_rate(21, 105) == doctest::Approx(-0.9458).epsilon(1e-4));
    CHECK_THROWS_AS(convergence_rate(105, 105), NumericalError);
    CHECK_THROWS_AS(convergence_rate(1, 105), NumericalError);
  }

  TEST_CASE("selection is reproducible and independent of the worker count") {
    const Sample s = pareto_sample(3000, 2, 32);
    BootstrapOptions o;
    o.b1 = 200;
    o.workers = 1;
    const KSelection a = select_k(s, o);
    o.workers = 4;
    const KSelection b = select_k(s, o);
    CHECK(a.k_hat == b.k_hat);
    CHECK(a.k_j_m1 == b.k_j_m1);
    CHECK(a.k_j_m2 == b.k_j_m2);
    CHECK(a.k_raw == b.k_raw);
    CHECK_FALSE(a.fallback);
    CHECK(a.m1 == resample_size_m1(3000, 0.25));
    CHECK(a.k_hat >= 2);
    CHECK(a.k_hat <= 2999);
    o.seed += 1;
    const KSelection c = select_k(s, o);
    CHECK(c.m2 == a.m2);
  }

  TEST_CASE("k for a resample size minimises the average error") {
    const Sample s = pareto_sample(400, 1, 33);
    BootstrapOptions o;
    const KForSize r = optimal_k_for_size(s, 400, 1, 7, o);
    CHECK(r.min_retained_rows == 400);
    CHECK(r.k[0] >= 2);
    CHECK(r.k[0] <= 399);
  }

  TEST_CASE("small samples fall back to floor(sqrt(n))") {
    const Sample s = pareto_sample(400, 2, 34);  // 400 * 4 < 2000
    const KSelection sel = select_k(s);
    CHECK(sel.fallback);
    CHECK(sel.k_hat == 20);
    CHECK_FALSE(sel.warnings.empty());
  }

  TEST_CASE("sparse positive rows fall back") {
    // Only a few rows have every coordinate positive.
    Sample s = pareto_sample(3000, 2, 35);
    for (Eigen::Index i = 0; i < s.rows(); ++i)
      if (i % 10 != 0) s(i, 1) = -s(i, 1);
    const KSelection sel = select_k(s);
    CHECK(sel.fallback);
    CHECK(sel.k_hat == 54);
  }

  TEST_CASE("argument checks") {
    const Sample s = pareto_sample(3000, 2, 36);
    BootstrapOptions o;
    o.epsilon = 0.5;
    CHECK_THROWS_AS(select_k(s, o), UsageError);
    o.epsilon = 0.25;
    o.b1 = 0;
    CHECK_THROWS_AS(select_k(s, o), UsageError);
  }
}
