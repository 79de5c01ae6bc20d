#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "dmq/error.hpp"
#include "dmq/evt.hpp"
#include "dmq/quantile.hpp"
#include "dmq/tmodel.hpp"
#include "oracles.hpp"

using namespace dmq;

namespace {

TParams model_2d() {
  TParams p;
  p.mu = Vector::Zero(2);
  p.sigma.resize(2, 2);
  p.sigma << 5, 0.1, 0.1, 1;
  p.nu = 3;
  return p;
}

TParams model_3d() {
  TParams p;
  p.mu = Vector::Zero(3);
  p.sigma.resize(3, 3);
  p.sigma << 5, 2.44, -1.88, 2.44, 2.12, 0.04, -1.88, 0.04, 2.36;
  p.nu = 4;
  return p;
}

Matrix corr2(double r) {
  Matrix c(2, 2);
  c << 1, r, r, 1;
  return c;
}

}  // namespace

TEST_SUITE("tmodel") {
  TEST_CASE("univariate distribution function against closed forms") {
    for (double x : {-30.0, -3.0, -0.7, 0.0, 0.4, 2.0, 11.0}) {
      CHECK(t_cdf(x, 1.0) == doctest::Approx(test::t1_cdf_closed(x)).epsilon(1e-12));
      CHECK(t_cdf(x, 2.0) == doctest::Approx(test::t2_cdf_closed(x)).epsilon(1e-12));
      CHECK(t_cdf(x, 4.0) == doctest::Approx(test::t4_cdf_closed(x)).epsilon(1e-12));
    }
    CHECK(t_cdf(2.0, 4.0) == doctest::Approx(0.94194).epsilon(1e-5));
  }

  TEST_CASE("bivariate distribution function") {
    Vector x(2);
    x << 0.3, -0.8;
    CHECK(t_cdf(x, corr2(0.0), 3.0) == doctest::Approx(t_cdf(0.3, 3.0) * t_cdf(-0.8, 3.0)));
    // Orthant probability at the origin: 1/4 + asin(r) / (2 pi), for any nu.
    Vector o = Vector::Zero(2);
    for (double r : {-0.6, 0.2, 0.75}) {
      CHECK(t_cdf(o, corr2(r), 3.0) ==
            doctest::Approx(0.25 + std::asin(r) / (2.0 * std::numbers::pi)).epsilon(1e-8));
    }
    Vector swapped(2);
    swapped << -0.8, 0.3;
    CHECK(t_cdf(x, corr2(0.4), 5.0) == doctest::Approx(t_cdf(swapped, corr2(0.4), 5.0)).epsilon(1e-9));
    CHECK_THROWS_AS(t_cdf(x, corr2(1.0), 3.0), DataError);
  }

  TEST_CASE("tail dependence function hand values") {
    Vector one = Vector::Ones(2);
    CHECK(t_stdf(one, corr2(0.0), 3.0) == doctest::Approx(2.0 * test::t4_cdf_closed(2.0)).epsilon(1e-10));
    CHECK(t_stdf(one, corr2(0.0), 3.0) == doctest::Approx(1.8839).epsilon(1e-4));
  }

  TEST_CASE("tail dependence function properties") {
    std::mt19937_64 rng(41);
    std::uniform_real_distribution<double> uz(0.2, 4.0), uc(0.2, 6.0);
    Matrix c3(3, 3);
    c3 << 1, 0.5, -0.3, 0.5, 1, 0.1, -0.3, 0.1, 1;
    for (int t = 0; t < 40; ++t) {
      Vector z(3);
      z << uz(rng), uz(rng), uz(rng);
      const double c = uc(rng);
      const double l = t_stdf(z, c3, 4.0);
      CHECK(c * t_stdf(c * z, c3, 4.0) == doctest::Approx(l).epsilon(1e-10));
      CHECK(l >= z.cwiseInverse().maxCoeff() * (1 - 1e-12));
      CHECK(l <= z.cwiseInverse().sum() * (1 + 1e-12));
      // simultaneous permutation (0 1 2) -> (2 0 1)
      Eigen::PermutationMatrix<3> p;
      p.indices() << 2, 0, 1;
      CHECK(t_stdf(p * z, p * c3 * p.transpose(), 4.0) == doctest::Approx(l).epsilon(1e-9));
    }
    Matrix bad = corr2(1.0);
    CHECK_THROWS_AS(t_stdf(Vector::Ones(2), bad, 3.0), DataError);
    CHECK_THROWS_AS(t_stdf(Vector::Ones(4), Matrix::Identity(4, 4), 3.0), UsageError);
  }

  TEST_CASE("theoretical rho") {
    TParams p;
    p.mu = Vector::Zero(2);
    p.sigma = Matrix::Identity(2, 2);
    p.nu = 3;
    Vector th(2);
    th << std::sqrt(0.5), std::sqrt(0.5);
    CHECK(theoretical_rho(th, p, Direction::e(2)) == doctest::Approx(std::sqrt(2.0) * 2.0 * test::t4_cdf_closed(2.0)).epsilon(1e-9));
    CHECK(theoretical_rho(th, p, Direction::e(2)) == doctest::Approx(2.664).epsilon(1e-3));
  }

  TEST_CASE("principal components") {
    const Direction u2 = fpc_direction(model_2d().sigma);
    CHECK(u2[0] == doctest::Approx(0.9997).epsilon(1e-3));
    CHECK(u2[1] == doctest::Approx(0.025).epsilon(1e-3));
    const Direction u3 = fpc_direction(model_3d().sigma);
    CHECK(std::abs(u3[0] - 0.8417) < 1e-3);
    CHECK(std::abs(u3[1] - 0.4202) < 1e-3);
    CHECK(std::abs(u3[2] + 0.3392) < 1e-3);
    Matrix diag = Matrix::Zero(2, 2);
    diag(0, 0) = 4;
    diag(1, 1) = 1;
    CHECK_THROWS_AS(fpc_direction(diag), InvalidDirectionError);
    CHECK_THROWS_AS(fpc_direction(Matrix::Identity(2, 2)), NumericalError);
  }

  TEST_CASE("rotated scale matrix") {
    const TParams r = rotate_elliptical(model_2d(), rotation_for(fpc_direction(model_2d().sigma)));
    Matrix ref(2, 2);
    ref << 3.0001, 2.0025, 2.0025, 2.9999;
    CHECK((r.sigma - ref).cwiseAbs().maxCoeff() < 1e-3);
    CHECK(r.sigma(0, 1) == r.sigma(1, 0));
    CHECK(r.nu == 3.0);
  }

  TEST_CASE("quantile by bisection") {
    CHECK(t_quantile_bisect(0.999, 3.0) == doctest::Approx(10.215).epsilon(1e-4));
    CHECK(t_cdf(t_quantile_bisect(0.3, 4.0), 4.0) == doctest::Approx(0.3).epsilon(1e-9));
  }

  TEST_CASE("asymptotic quantile reduces to b at unit base and to quantile_point") {
    const TParams p = model_2d();
    const Direction u = Direction::e(2);
    Vector th(2);
    th << 0.8, 0.6;
    const double alpha = 1e-3;
    const double rho = theoretical_rho(th, p, u);
    const double t = rho * th[0] / alpha;
    const Vector x = asymptotic_quantile(p, u, alpha, th, t);
    CHECK(x[0] == doctest::Approx(theoretical_norm_sequences(p, 0, t).b).epsilon(1e-12));

    const double t2 = 1e4;
    TailFit f;
    f.n = 10000;
    f.k = 1;  // k/n = 1/t2
    f.gamma_marginal = {p.gamma(), p.gamma()};
    f.gamma = p.gamma();
    for (std::size_t j = 0; j < 2; ++j) {
      const auto s = theoretical_norm_sequences(p, j, t2);
      f.a.push_back(s.a);
      f.b.push_back(s.b);
    }
    const Vector via_fit = quantile_point(f, rho, th, alpha);
    const Vector direct = asymptotic_quantile(p, u, alpha, th, t2);
    CHECK((via_fit - direct).cwiseAbs().maxCoeff() < 1e-10);
  }

  TEST_CASE("sampling") {
    const TParams p = model_2d();
    const Sample a = sample_t(p, 20000, 5);
    const Sample b = sample_t(p, 20000, 5);
    CHECK(a == b);
    CHECK(a.rows() == 20000);
    // Covariance of a t_nu is sigma * nu / (nu - 2); with nu = 3 the sample version is noisy,
    // so only the median-based scale is checked: median |X_1| / median |X_2| ~ sqrt(5).
    std::vector<double> c1, c2;
    for (Eigen::Index i = 0; i < a.rows(); ++i) {
      c1.push_back(std::abs(a(i, 0)));
      c2.push_back(std::abs(a(i, 1)));
    }
    std::nth_element(c1.begin(), c1.begin() + 10000, c1.end());
    std::nth_element(c2.begin(), c2.begin() + 10000, c2.end());
    CHECK(c1[10000] / c2[10000] == doctest::Approx(std::sqrt(5.0)).epsilon(0.05));
    // P(X_1 <= 0) = 1/2 for a centred model.
    const double below = static_cast<double>((a.col(0).array() <= 0.0).count()) / 20000.0;
    CHECK(below == doctest::Approx(0.5).epsilon(0.03));
  }

  TEST_CASE("parameter validation") {
    TParams p = model_2d();
    p.sigma(0, 1) = 0.2;
    CHECK_THROWS_AS(validate(p), DataError);
    p = model_2d();
    p.nu = 0;
    CHECK_THROWS_AS(validate(p), DataError);
    p = model_2d();
    p.sigma(1, 1) = -1;
    CHECK_THROWS_AS(validate(p), DataError);
  }

  TEST_CASE("relative error") {
    Vector a(2), b(2);
    a << 3, 4;
    b << 3, 5;
    CHECK(relative_error(a, b) == doctest::Approx(0.2));
    CHECK_THROWS_AS(relative_error(Vector::Zero(2), b), NumericalError);
  }
}
