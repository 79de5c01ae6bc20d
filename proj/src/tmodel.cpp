#include "dmq/tmodel.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/special_functions/beta.hpp>
#include <algorithm>
#include <cmath>
#include <numbers>
#include <limits>
#include <random>
#include <sstream>

#include "dmq/error.hpp"

namespace dmq {

void validate(const TParams& params) {
  const Eigen::Index d = params.mu.size();
  if (d < 1) throw DataError("t model needs dimension >= 1");
  if (params.sigma.rows() != d || params.sigma.cols() != d) {
    throw DataError("t model scale matrix must be " + std::to_string(d) + "x" + std::to_string(d));
  }
  if (!(params.nu > 0.0) || !std::isfinite(params.nu)) {
    throw DataError("t model degrees of freedom must be positive and finite");
  }
  if (!params.mu.allFinite() || !params.sigma.allFinite()) {
    throw DataError("t model parameters must be finite");
  }
  const double scale = std::max(1.0, params.sigma.cwiseAbs().maxCoeff());
  if ((params.sigma - params.sigma.transpose()).cwiseAbs().maxCoeff() > 1e-12 * scale) {
    throw DataError("t model scale matrix is not symmetric");
  }
  const Eigen::SelfAdjointEigenSolver<Matrix> eig(params.sigma);
  if (eig.info() != Eigen::Success || !(eig.eigenvalues().minCoeff() > 0.0)) {
    throw DataError("t model scale matrix is not positive definite");
  }
}

Matrix symmetric_sqrt(const Matrix& spd) {
  const Eigen::SelfAdjointEigenSolver<Matrix> eig(spd);
  if (eig.info() != Eigen::Success || !(eig.eigenvalues().minCoeff() > 0.0)) {
    throw DataError("matrix square root needs a symmetric positive definite matrix");
  }
  return eig.operatorSqrt();
}

Sample sample_t(const TParams& params, std::size_t n, std::uint64_t seed) {
  validate(params);
  const Eigen::Index d = params.dim();
  const Matrix root = symmetric_sqrt(params.sigma);
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::chi_squared_distribution<double> chi2(params.nu);

  Sample out(static_cast<Eigen::Index>(n), d);
  Vector z(d);
  for (Eigen::Index i = 0; i < out.rows(); ++i) {
    for (Eigen::Index j = 0; j < d; ++j) z[j] = normal(rng);
    const double s = chi2(rng);
    const double radial = 1.0 / std::sqrt(s / params.nu);
    out.row(i) = (params.mu + root * z * radial).transpose();
  }
  return out;
}

TParams rotate_elliptical(const TParams& params, const RotationMatrix& r) {
  validate(params);
  if (r.dim() != params.dim()) throw DataError("rotation and model dimensions differ");
  TParams out;
  out.mu = r.matrix() * params.mu;
  const Matrix s = r.matrix() * params.sigma * r.matrix().transpose();
  out.sigma = 0.5 * (s + s.transpose());
  out.nu = params.nu;
  return out;
}

Direction fpc_direction(const Matrix& sigma) {
  if (sigma.rows() != sigma.cols() || sigma.rows() < 2) {
    throw DataError("principal component needs a square matrix of dimension >= 2");
  }
  const Eigen::SelfAdjointEigenSolver<Matrix> eig(0.5 * (sigma + sigma.transpose()));
  if (eig.info() != Eigen::Success) throw NumericalError("eigen decomposition failed");
  const Vector& values = eig.eigenvalues();  // ascending
  const Eigen::Index d = values.size();
  const double top = values[d - 1];
  if (!(top - values[d - 2] >= 1e-10 * std::abs(top))) {
    throw NumericalError("degenerate principal component: leading eigenvalue is not simple");
  }
  Vector v = eig.eigenvectors().col(d - 1);
  if (v[0] < 0.0) v = -v;
  try {
    return Direction(v);
  } catch (const InvalidDirectionError& e) {
    throw InvalidDirectionError(std::string("principal component lies on a coordinate boundary: ") +
                                e.what());
  }
}

Matrix correlation_from_scale(const Matrix& sigma) {
  const Vector s = sigma.diagonal().cwiseSqrt();
  Matrix c = sigma.array() / (s * s.transpose()).array();
  c.diagonal().setOnes();
  return c;
}

double t_cdf(double x, double nu) {
  if (!(nu > 0.0)) throw UsageError("t distribution needs nu > 0");
  if (std::isnan(x)) throw UsageError("t_cdf argument is NaN");
  if (x == std::numeric_limits<double>::infinity()) return 1.0;
  if (x == -std::numeric_limits<double>::infinity()) return 0.0;
  // P(T > |x|) = I_{nu/(nu+x^2)}(nu/2, 1/2) / 2
  const double tail = 0.5 * boost::math::ibeta(0.5 * nu, 0.5, nu / (nu + x * x));
  return x >= 0.0 ? 1.0 - tail : tail;
}

namespace {

double t_density(double x, double nu) {
  const double log_c = std::lgamma(0.5 * (nu + 1.0)) - std::lgamma(0.5 * nu) -
                       0.5 * std::log(nu * std::numbers::pi);
  return std::exp(log_c - 0.5 * (nu + 1.0) * std::log1p(x * x / nu));
}

double bivariate_t_cdf(double x1, double x2, double rho, double nu) {
  if (std::isnan(x1) || std::isnan(x2)) throw UsageError("t_cdf argument is NaN");
  const double inf = std::numeric_limits<double>::infinity();
  if (x1 == -inf || x2 == -inf) return 0.0;
  if (x1 == inf) return t_cdf(x2, nu);
  if (x2 == inf) return t_cdf(x1, nu);
  if (rho == 0.0) return t_cdf(x1, nu) * t_cdf(x2, nu);

  const double one_minus = 1.0 - rho * rho;
  // X2 | X1 = s is t_{nu+1} with location rho s and scale sqrt((nu + s^2)(1 - rho^2)/(nu + 1)).
  auto integrand = [&](double s) {
    const double scale = std::sqrt((nu + s * s) * one_minus / (nu + 1.0));
    return t_density(s, nu) * t_cdf((x2 - rho * s) / scale, nu + 1.0);
  };
  double error = 0.0;
  const double value = boost::math::quadrature::gauss_kronrod<double, 61>::integrate(
      integrand, -inf, x1, 20, 1e-9, &error);
  if (!std::isfinite(value) || error > 1e-8) {
    std::ostringstream os;
    os << "bivariate t quadrature did not converge (estimated error " << error << ")";
    throw NumericalError(os.str());
  }
  return std::clamp(value, 0.0, 1.0);
}

}  // namespace

double t_cdf(const Vector& x, const Matrix& corr, double nu) {
  if (!(nu > 0.0)) throw UsageError("t distribution needs nu > 0");
  if (x.size() == 1) return t_cdf(x[0], nu);
  if (x.size() == 2) {
    if (corr.rows() != 2 || corr.cols() != 2) throw DataError("bivariate t needs a 2x2 correlation");
    const double rho = corr(0, 1);
    if (!(std::abs(rho) < 1.0)) throw DataError("bivariate t correlation must lie in (-1, 1)");
    return bivariate_t_cdf(x[0], x[1], rho, nu);
  }
  throw UsageError("t_cdf supports dimension 1 or 2 only, got " + std::to_string(x.size()));
}

double t_stdf(const Vector& z, const Matrix& corr, double nu) {
  const Eigen::Index d = z.size();
  if (d != 2 && d != 3) {
    throw UsageError("t tail dependence function supports dimension 2 or 3 only");
  }
  if (corr.rows() != d || corr.cols() != d) throw DataError("correlation matrix dimension mismatch");
  if (!(nu > 0.0)) throw UsageError("t distribution needs nu > 0");
  for (Eigen::Index j = 0; j < d; ++j) {
    if (!(z[j] > 0.0) || !std::isfinite(z[j])) throw UsageError("t_stdf needs positive finite z");
  }
  for (Eigen::Index i = 0; i < d; ++i) {
    for (Eigen::Index j = i + 1; j < d; ++j) {
      if (!(std::abs(corr(i, j)) < 1.0)) {
        throw DataError("comonotone-degenerate correlation: |r_" + std::to_string(i + 1) +
                        std::to_string(j + 1) + "| = 1");
      }
    }
  }

  const double nu1 = nu + 1.0;
  double total = 0.0;
  for (Eigen::Index j = 0; j < d; ++j) {
    std::vector<Eigen::Index> others;
    for (Eigen::Index i = 0; i < d; ++i)
      if (i != j) others.push_back(i);
    Vector arg(d - 1);
    for (Eigen::Index p = 0; p < d - 1; ++p) {
      const Eigen::Index i = others[static_cast<std::size_t>(p)];
      const double r = corr(i, j);
      arg[p] = std::sqrt(nu1 / (1.0 - r * r)) * (std::pow(z[i] / z[j], 1.0 / nu) - r);
    }
    double prob = 0.0;
    if (d == 2) {
      prob = t_cdf(arg[0], nu1);
    } else {
      // partial correlation of the two remaining coordinates given coordinate j
      const Eigen::Index i = others[0];
      const Eigen::Index l = others[1];
      const double rij = corr(i, j);
      const double rlj = corr(l, j);
      const double partial =
          (corr(i, l) - rij * rlj) / (std::sqrt(1.0 - rij * rij) * std::sqrt(1.0 - rlj * rlj));
      Matrix q(2, 2);
      q << 1.0, partial, partial, 1.0;
      prob = t_cdf(arg, q, nu1);
    }
    total += prob / z[j];
  }
  return total;
}

double theoretical_rho(const Vector& theta, const TParams& params, const Direction& u) {
  if (theta.size() != params.dim()) throw DataError("theta dimension does not match the model");
  for (Eigen::Index j = 0; j < theta.size(); ++j) {
    if (!(theta[j] > 0.0)) {
      throw UsageError("theoretical rho needs an interior theta (all components > 0)");
    }
  }
  const TParams rotated = rotate_elliptical(params, rotation_for(u));
  return t_stdf(theta, correlation_from_scale(rotated.sigma), params.nu);
}

double t_quantile_bisect(double p, double nu) {
  if (!(p > 0.0 && p < 1.0)) throw UsageError("quantile level must lie in (0, 1)");
  double lo = -1.0;
  double hi = 1.0;
  for (int i = 0; i < 2000 && t_cdf(lo, nu) > p; ++i) lo *= 2.0;
  for (int i = 0; i < 2000 && t_cdf(hi, nu) < p; ++i) hi *= 2.0;
  for (int step = 0; step < 200; ++step) {
    const double mid = 0.5 * (lo + hi);
    if (hi - lo <= 1e-10 * std::max(1.0, std::abs(mid))) return mid;
    if (t_cdf(mid, nu) < p) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  throw NumericalError("t quantile inversion did not reach tolerance 1e-10 in 200 steps");
}

TNormSequences theoretical_norm_sequences(const TParams& params, std::size_t j, double t) {
  validate(params);
  if (j >= static_cast<std::size_t>(params.dim())) throw UsageError("marginal index out of range");
  if (!(t > 1.0)) throw UsageError("normalisation level t must exceed 1");
  const auto jj = static_cast<Eigen::Index>(j);
  const double scale = std::sqrt(params.sigma(jj, jj));
  const double q = scale * t_quantile_bisect(1.0 - 1.0 / t, params.nu);
  TNormSequences out{params.gamma() * q, params.mu[jj] + q};
  if (!(out.a > 0.0 && out.b > 0.0)) {
    std::ostringstream os;
    os << "normalisation sequences at t=" << t << " are not positive (a=" << out.a
       << ", b=" << out.b << "); use a larger t";
    throw DataError(os.str());
  }
  return out;
}

Vector asymptotic_quantile(const TParams& params, const Direction& u, double alpha,
                           const Vector& theta, double t) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw UsageError("alpha must lie in (0, 1)");
  const TParams rotated = rotate_elliptical(params, rotation_for(u));
  const double rho = theoretical_rho(theta, params, u);
  const double g = params.gamma();
  Vector x(theta.size());
  for (Eigen::Index j = 0; j < theta.size(); ++j) {
    const auto seq = theoretical_norm_sequences(rotated, static_cast<std::size_t>(j), t);
    const double base = rho * theta[j] / (t * alpha);
    x[j] = seq.a * (std::pow(base, g) - 1.0) / g + seq.b;
  }
  return x;
}

double relative_error(const Vector& x_tilde, const Vector& x_hat) {
  if (x_tilde.size() != x_hat.size()) throw DataError("relative error: dimension mismatch");
  const double ref = x_tilde.norm();
  if (!(ref > 0.0)) throw NumericalError("relative error: reference vector has zero norm");
  return (x_tilde - x_hat).norm() / ref;
}

}  // namespace dmq
