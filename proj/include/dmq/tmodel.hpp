#pragma once

#include <cstddef>
#include <cstdint>

#include "dmq/geometry.hpp"

namespace dmq {

/// Multivariate t model: location mu, scale matrix sigma, degrees of freedom nu.
struct TParams {
  Vector mu;
  Matrix sigma;
  double nu = 0.0;

  Eigen::Index dim() const { return mu.size(); }
  double gamma() const { return 1.0 / nu; }
};

/// Throws DataError unless sigma is square, symmetric (1e-12) and positive definite, mu matches,
/// and nu > 0.
void validate(const TParams& params);

/// Symmetric (spectral) square root of an SPD matrix.
Matrix symmetric_sqrt(const Matrix& spd);

/// n draws of mu + sigma^{1/2} N / sqrt(S / nu), N ~ N(0, I_d), S ~ chi-square(nu).
Sample sample_t(const TParams& params, std::size_t n, std::uint64_t seed);

/// Parameters of R X: (R mu, R sigma R', nu), re-symmetrised.
TParams rotate_elliptical(const TParams& params, const RotationMatrix& r);

/// Leading eigenvector of sigma with a positive first component.
Direction fpc_direction(const Matrix& sigma);

Matrix correlation_from_scale(const Matrix& sigma);

/// Univariate standard t distribution function.
double t_cdf(double x, double nu);

/// Distribution function of a standard t with correlation matrix `corr`, dimension 1 or 2.
/// The bivariate case integrates the conditional univariate t over the first coordinate.
double t_cdf(const Vector& x, const Matrix& corr, double nu);

/// Stable tail dependence (exponent) function of the t extreme value limit at z > 0,
/// for dimension 2 or 3.
double t_stdf(const Vector& z, const Matrix& corr, double nu);

/// rho_tilde_u(theta): t_stdf at theta under the correlation of the model rotated by R_u.
double theoretical_rho(const Vector& theta, const TParams& params, const Direction& u);

struct TNormSequences {
  double a = 0.0;
  double b = 0.0;
};

/// b_j(t) = F_j^{-1}(1 - 1/t) and a_j(t) = (b_j(t) - mu_j) / nu for marginal j of `params`.
TNormSequences theoretical_norm_sequences(const TParams& params, std::size_t j, double t);

/// Standard t quantile by bisection on t_cdf (tolerance 1e-10, at most 200 steps).
double t_quantile_bisect(double p, double nu);

/// Asymptotic quantile point x_tilde in rotated coordinates at level alpha and normalisation t.
Vector asymptotic_quantile(const TParams& params, const Direction& u, double alpha,
                           const Vector& theta, double t);

/// ||x_tilde - x_hat|| / ||x_tilde||.
double relative_error(const Vector& x_tilde, const Vector& x_hat);

}  // namespace dmq
