#pragma once

#include <cstddef>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "dmq/bootstrap.hpp"
#include "dmq/evt.hpp"
#include "dmq/geometry.hpp"
#include "dmq/stdf.hpp"

namespace dmq {

/// Unit vectors with positive components, parametrised by d-1 angles each taking m evenly
/// spaced values in [delta, pi/2 - delta]:
///   theta_1 = cos phi_1, theta_2 = sin phi_1 cos phi_2, ..., theta_d = prod sin phi_i.
/// Points are ordered lexicographically in the angles, the last angle varying fastest.
struct ThetaGrid {
  std::size_t d = 0;
  std::size_t m = 0;
  double delta = 0.0;
  std::vector<Vector> thetas;
  std::vector<std::vector<double>> angles;

  std::size_t size() const { return thetas.size(); }
};

inline constexpr std::size_t kDefaultGridResolution = 64;
inline constexpr double kDefaultGridDelta = 0.01;

ThetaGrid theta_grid(std::size_t d, std::size_t m = kDefaultGridResolution,
                     double delta = kDefaultGridDelta);

/// Unit vector for the given d-1 polar angles.
Vector theta_from_angles(const std::vector<double>& angles);

/// x_j = a_j ((k rho theta_j / (n alpha))^gamma_j - 1) / gamma_j + b_j, in rotated coordinates.
Vector quantile_point(const TailFit& fit, double rho, const Vector& theta, double alpha);

struct SurfacePoint {
  Vector theta;
  std::vector<double> angles;
  Vector x_rotated;
  Vector x_original;
  double rho = 0.0;
  bool floored = false;
};

struct QuantileSurface {
  std::string source = "estimate";  // "estimate" or "oracle"
  double alpha = 0.0;
  Vector direction;
  std::size_t k = 0;
  double gamma = 0.0;
  Vector center;  // added back to R' x_rotated; zero unless the data was recentred
  std::optional<TailFit> fit;
  std::optional<KSelection> selection;
  std::vector<SurfacePoint> points;
  std::vector<std::string> warnings;
};

struct EstimateOptions {
  std::optional<std::size_t> k;      // nullopt selects k with the bootstrap
  std::optional<std::size_t> k_rho;  // separate k for rho_hat; defaults to k
  BootstrapOptions bootstrap;
  bool center = false;  // subtract the componentwise median before rotating
  std::size_t min_rows = 50;
  unsigned workers = 0;
};

/// Everything estimated from a sample in one direction; reused for surfaces and tail levels.
struct DirectionalFit {
  RotationMatrix rotation;
  Vector center;
  TailFit fit;
  std::shared_ptr<const StdfContext> rho_context;
  std::optional<KSelection> selection;
  std::vector<std::string> warnings;
};

Vector componentwise_median(const Sample& sample);

DirectionalFit fit_directional(const Sample& sample, const Direction& u,
                               const EstimateOptions& opts = {});

QuantileSurface surface_from_fit(const DirectionalFit& model, double alpha, const ThetaGrid& grid,
                                 unsigned workers = 0);

QuantileSurface estimate_surface(const Sample& sample, const Direction& u, double alpha,
                                 const ThetaGrid& grid, const EstimateOptions& opts = {});

struct TailLevel {
  double alpha_z = 1.0;
  bool extremal = false;  // false when every w_j is zero; alpha_z is then reported as 1
};

/// Level alpha_z at which the estimated quantile surface passes through z (original
/// coordinates, already centred). `fit` provides the extrapolation; `rho_ctx` evaluates rho_hat.
TailLevel tail_level(const TailFit& fit, const StdfContext& rho_ctx, const RotationMatrix& r,
                     const Vector& z);

TailLevel tail_level(const DirectionalFit& model, const Vector& z);

struct OutlierFlag {
  double alpha_z = 1.0;
  bool extremal = false;
  bool flagged = false;
};

std::vector<OutlierFlag> flag_outliers(const DirectionalFit& model, const Sample& sample,
                                       double alpha, unsigned workers = 0);

std::vector<OutlierFlag> flag_outliers(const Sample& sample, const Direction& u, double alpha,
                                       const EstimateOptions& opts = {});

}  // namespace dmq
