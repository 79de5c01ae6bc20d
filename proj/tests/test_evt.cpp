#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include "dmq/error.hpp"
#include "dmq/evt.hpp"

using namespace dmq;

TEST_SUITE("evt") {
  TEST_CASE("log moments by hand") {
    const std::vector<double> s{1, 2, 4};
    CHECK(log_moment(s, 2, 1) == doctest::Approx(0.5 * (std::log(4.0) + std::log(2.0))));
    CHECK(log_moment(s, 2, 1) == doctest::Approx(1.0397).epsilon(1e-4));
    CHECK(log_moment(s, 2, 2) == doctest::Approx(1.2011).epsilon(1e-4));
    const std::vector<double> flat{1, 3, 3, 3};
    CHECK(log_moment(flat, 2, 1) == 0.0);
  }

  TEST_CASE("moment estimator by hand") {
    const std::vector<double> s{1, 2, 4};
    CHECK(gamma_moment(s, 2) == doctest::Approx(-2.9603).epsilon(1e-4));
    const std::vector<double> e{1, std::exp(1.0), std::exp(2.0)};
    CHECK(gamma_moment(e, 2) == doctest::Approx(-2.5).epsilon(1e-12));
    CHECK(gamma_from_moments(1.5, 2.5) == doctest::Approx(-2.5));
  }

  TEST_CASE("degenerate moments") {
    CHECK_THROWS_AS(gamma_from_moments(0.0, 0.0), DegenerateMomentsError);
    CHECK_THROWS_AS(gamma_from_moments(2.0, 4.0), DegenerateMomentsError);
    // Two-point sample: one positive log-spacing, so M1^2 == M2.
    const std::vector<double> two{1, 2};
    CHECK_THROWS_AS(gamma_moment(two, 1), DegenerateMomentsError);
  }

  TEST_CASE("range and positivity checks") {
    const std::vector<double> s{1, 2, 4};
    CHECK_THROWS_AS(log_moment(s, 0, 1), UsageError);
    CHECK_THROWS_AS(log_moment(s, 3, 1), UsageError);
    CHECK_THROWS_AS(log_moment(s, 2, 3), UsageError);
    const std::vector<double> neg{-3, -1, 2};
    CHECK_THROWS_AS(log_moment(neg, 2, 1), PositivityError);
    try {
      (void)log_moment(neg, 2, 1);
    } catch (const PositivityError& e) {
      CHECK(std::string(e.what()).find("recenter") != std::string::npos);
    }
  }

  TEST_CASE("joint index is the mean") {
    const std::vector<double> g{0.2, 0.4};
    CHECK(joint_gamma(g) == doctest::Approx(0.3));
    const std::vector<double> same(3, 1.0 / 3.0);
    CHECK(joint_gamma(same) == doctest::Approx(1.0 / 3.0));
    CHECK_THROWS_AS(joint_gamma(std::vector<double>{}), UsageError);
  }

  TEST_CASE("normalising sequences") {
    const std::vector<double> s{1, 2, 4};
    const NormSequences a = norm_sequences(s, 2, 1.5);
    CHECK(a.b == 1.0);
    CHECK(a.a == doctest::Approx(1.0397).epsilon(1e-4));
    const NormSequences z = norm_sequences(s, 2, 0.0);
    CHECK(z.a == doctest::Approx(log_moment(s, 2, 1)));
    const NormSequences m = norm_sequences(s, 2, -1.0);
    CHECK(m.a == doctest::Approx(2.0 * log_moment(s, 2, 1)));
    const std::vector<double> flat{1, 3, 3, 3};
    CHECK_THROWS_AS(norm_sequences(flat, 2, 0.5), DegenerateMomentsError);
  }

  TEST_CASE("Pareto tail index recovered") {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::vector<double> x(100000);
    for (auto& v : x) v = std::pow(1.0 - u(rng), -1.0 / 3.0);
    std::sort(x.begin(), x.end());
    CHECK(std::abs(gamma_moment(x, 1000) - 1.0 / 3.0) < 0.1);
  }

  TEST_CASE("fit is invariant to row order and equivariant to scale") {
    std::mt19937_64 rng(12);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    Sample s(500, 2);
    for (Eigen::Index i = 0; i < 500; ++i) {
      s(i, 0) = std::pow(1.0 - u(rng), -0.5);
      s(i, 1) = std::pow(1.0 - u(rng), -0.25);
    }
    const TailFit base = fit_tails(s, 50);
    Sample shuffled = s;
    for (Eigen::Index i = 499; i > 0; --i) shuffled.row(i).swap(shuffled.row(static_cast<Eigen::Index>(rng() % (i + 1))));
    const TailFit perm = fit_tails(shuffled, 50);
    CHECK(perm.gamma_marginal == base.gamma_marginal);
    CHECK(perm.a == base.a);
    CHECK(perm.b == base.b);

    Sample scaled = s;
    scaled.col(0) *= 7.5;
    const TailFit sc = fit_tails(scaled, 50);
    CHECK(sc.gamma_marginal[0] == doctest::Approx(base.gamma_marginal[0]).epsilon(1e-12));
    CHECK(sc.a[0] == doctest::Approx(7.5 * base.a[0]).epsilon(1e-12));
    CHECK(sc.b[0] == doctest::Approx(7.5 * base.b[0]).epsilon(1e-12));
    CHECK(sc.gamma_marginal[1] == base.gamma_marginal[1]);
    CHECK(base.gamma == doctest::Approx(0.5 * (base.gamma_marginal[0] + base.gamma_marginal[1])));
  }

  TEST_CASE("one-column fit equals the marginal estimator") {
    Sample s(5, 1);
    s << 4, 1, 3, 2, 8;
    const std::vector<double> sorted{1, 2, 3, 4, 8};
    const TailFit f = fit_tails(s, 3);
    CHECK(f.gamma_marginal[0] == gamma_moment(sorted, 3));
    CHECK(f.b[0] == 2.0);
    CHECK(order_stats(s).sorted[0] == sorted);
  }

  TEST_CASE("marginal errors carry the marginal index") {
    Sample s(4, 2);
    s << 1, -4, 2, -3, 3, -2, 4, -1;
    try {
      (void)fit_tails(s, 2);
      FAIL("expected a positivity error");
    } catch (const PositivityError& e) {
      CHECK(std::string(e.what()).find("marginal 2") != std::string::npos);
    }
  }

  TEST_CASE("disparity warning and heavy-tail check") {
    TailFit f;
    f.gamma_marginal = {0.3, 0.32};
    f.gamma = 0.31;
    CHECK_FALSE(gamma_disparity_warning(f).has_value());
    f.gamma_marginal = {0.1, 0.5};
    f.gamma = 0.3;
    CHECK(gamma_disparity_warning(f).has_value());
    CHECK_NOTHROW(require_heavy_tails(f));
    f.gamma_marginal = {0.1, -0.01};
    CHECK_THROWS_AS(require_heavy_tails(f), HeavyTailError);
  }
}
