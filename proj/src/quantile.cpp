#include "dmq/quantile.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "dmq/error.hpp"
#include "dmq/parallel.hpp"

namespace dmq {

namespace {

void check_alpha(double alpha) {
  if (!(alpha > 0.0 && alpha < 1.0)) {
    std::ostringstream os;
    os << "alpha must lie in (0, 1), got " << alpha;
    throw UsageError(os.str());
  }
}

std::string format_vector(const Vector& v) {
  std::ostringstream os;
  os << '(';
  for (Eigen::Index i = 0; i < v.size(); ++i) os << (i ? ", " : "") << v[i];
  os << ')';
  return os.str();
}

}  // namespace

Vector theta_from_angles(const std::vector<double>& angles) {
  const std::size_t d = angles.size() + 1;
  Vector theta(static_cast<Eigen::Index>(d));
  double sin_prod = 1.0;
  for (std::size_t i = 0; i + 1 < d; ++i) {
    theta[static_cast<Eigen::Index>(i)] = sin_prod * std::cos(angles[i]);
    sin_prod *= std::sin(angles[i]);
  }
  theta[static_cast<Eigen::Index>(d - 1)] = sin_prod;
  return theta;
}

ThetaGrid theta_grid(std::size_t d, std::size_t m, double delta) {
  if (d < 2) throw UsageError("theta grid needs dimension >= 2");
  if (m < 2) throw UsageError("theta grid resolution m must be >= 2");
  if (!(delta > 0.0 && delta < std::numbers::pi / 4.0)) {
    throw UsageError("theta grid margin delta must lie in (0, pi/4)");
  }
  ThetaGrid grid;
  grid.d = d;
  grid.m = m;
  grid.delta = delta;

  const double span = std::numbers::pi / 2.0 - 2.0 * delta;
  std::vector<double> levels(m);
  for (std::size_t i = 0; i < m; ++i) {
    levels[i] = delta + span * static_cast<double>(i) / static_cast<double>(m - 1);
  }

  const std::size_t angles_per_point = d - 1;
  std::size_t total = 1;
  for (std::size_t i = 0; i < angles_per_point; ++i) total *= m;
  grid.thetas.reserve(total);
  grid.angles.reserve(total);
  std::vector<std::size_t> idx(angles_per_point, 0);
  for (std::size_t p = 0; p < total; ++p) {
    std::vector<double> phi(angles_per_point);
    for (std::size_t i = 0; i < angles_per_point; ++i) phi[i] = levels[idx[i]];
    grid.thetas.push_back(theta_from_angles(phi));
    grid.angles.push_back(std::move(phi));
    for (std::size_t i = angles_per_point; i-- > 0;) {
      if (++idx[i] < m) break;
      idx[i] = 0;
    }
  }
  return grid;
}

Vector quantile_point(const TailFit& fit, double rho, const Vector& theta, double alpha) {
  check_alpha(alpha);
  require_heavy_tails(fit);
  if (static_cast<std::size_t>(theta.size()) != fit.dim()) {
    throw DataError("theta dimension does not match the tail fit");
  }
  if (!(rho > 0.0) || !std::isfinite(rho)) throw UsageError("rho must be positive and finite");
  const double scale = static_cast<double>(fit.k) * rho / (static_cast<double>(fit.n) * alpha);
  Vector x(theta.size());
  for (Eigen::Index j = 0; j < theta.size(); ++j) {
    const auto jj = static_cast<std::size_t>(j);
    const double base = scale * theta[j];
    if (!(base > 0.0) || !std::isfinite(base)) {
      throw UsageError("non-positive extrapolation base for coordinate " + std::to_string(jj + 1));
    }
    const double g = fit.gamma_marginal[jj];
    x[j] = fit.a[jj] * (std::pow(base, g) - 1.0) / g + fit.b[jj];
  }
  return x;
}

Vector componentwise_median(const Sample& sample) {
  Vector med(sample.cols());
  std::vector<double> col(static_cast<std::size_t>(sample.rows()));
  for (Eigen::Index j = 0; j < sample.cols(); ++j) {
    for (Eigen::Index i = 0; i < sample.rows(); ++i) col[static_cast<std::size_t>(i)] = sample(i, j);
    std::sort(col.begin(), col.end());
    const std::size_t n = col.size();
    med[j] = n % 2 ? col[n / 2] : 0.5 * (col[n / 2 - 1] + col[n / 2]);
  }
  return med;
}

DirectionalFit fit_directional(const Sample& sample, const Direction& u, const EstimateOptions& opts) {
  const auto n = static_cast<std::size_t>(sample.rows());
  if (n < opts.min_rows) {
    throw DataError("sample has " + std::to_string(n) + " rows; at least " +
                    std::to_string(opts.min_rows) + " are required");
  }
  if (sample.cols() != u.dim()) {
    throw DataError("direction dimension " + std::to_string(u.dim()) +
                    " does not match sample dimension " + std::to_string(sample.cols()));
  }
  if (!sample.allFinite()) throw DataError("sample contains non-finite values");

  const Vector center = opts.center ? componentwise_median(sample) : Vector::Zero(sample.cols());
  const Sample centered = opts.center ? Sample(sample.rowwise() - center.transpose()) : sample;
  RotationMatrix r = rotation_for(u);
  const Sample rotated = rotate(r, centered);

  std::vector<std::string> warnings;
  std::optional<KSelection> selection;
  std::size_t k = 0;
  if (opts.k) {
    k = *opts.k;
    if (k < 2 || k > n - 1) {
      throw UsageError("k=" + std::to_string(k) + " out of range [2, " + std::to_string(n - 1) + "]");
    }
  } else {
    BootstrapOptions bopts = opts.bootstrap;
    if (bopts.workers == 0) bopts.workers = opts.workers;
    selection = select_k(rotated, bopts);
    k = selection->k_hat;
    warnings.insert(warnings.end(), selection->warnings.begin(), selection->warnings.end());
  }

  auto fit_at = [&](std::size_t kk) {
    try {
      return fit_tails(rotated, kk);
    } catch (const PositivityError& e) {
      std::ostringstream os;
      os << "rotated data violates the positive upper-end point assumption (" << e.what()
         << "); recenter data, e.g. subtract the componentwise median "
         << format_vector(componentwise_median(sample)) << " or enable centering";
      throw PositivityError(os.str());
    }
  };

  TailFit fit = fit_at(k);
  require_heavy_tails(fit);
  if (auto w = gamma_disparity_warning(fit)) warnings.push_back(*w);

  std::shared_ptr<const StdfContext> ctx;
  if (opts.k_rho && *opts.k_rho != k) {
    if (*opts.k_rho < 2 || *opts.k_rho > n - 1) throw UsageError("k_rho out of range");
    TailFit rho_fit = fit_at(*opts.k_rho);
    require_heavy_tails(rho_fit);
    ctx = std::make_shared<const StdfContext>(rotated, std::move(rho_fit));
  } else {
    ctx = std::make_shared<const StdfContext>(rotated, fit);
  }

  return DirectionalFit{std::move(r), center, std::move(fit), std::move(ctx), std::move(selection),
                        std::move(warnings)};
}

QuantileSurface surface_from_fit(const DirectionalFit& model, double alpha, const ThetaGrid& grid,
                                 unsigned workers) {
  check_alpha(alpha);
  if (grid.d != model.fit.dim()) throw DataError("grid dimension does not match the sample");

  QuantileSurface s;
  s.alpha = alpha;
  s.direction = model.rotation.direction().components();
  s.k = model.fit.k;
  s.gamma = model.fit.gamma;
  s.center = model.center;
  s.fit = model.fit;
  s.selection = model.selection;
  s.warnings = model.warnings;
  s.points.resize(grid.size());

  parallel_for(grid.size(), workers, [&](std::size_t i) {
    SurfacePoint& p = s.points[i];
    p.theta = grid.thetas[i];
    p.angles = grid.angles[i];
    const RhoEstimate rho = rho_hat(*model.rho_context, p.theta);
    p.rho = rho.value;
    p.floored = rho.floored;
    p.x_rotated = quantile_point(model.fit, rho.value, p.theta, alpha);
    p.x_original = unrotate(model.rotation, p.x_rotated) + model.center;
  });

  const auto floored = std::count_if(s.points.begin(), s.points.end(),
                                     [](const SurfacePoint& p) { return p.floored; });
  if (floored > 0) {
    s.warnings.push_back(std::to_string(floored) + " of " + std::to_string(s.points.size()) +
                         " grid points had no exceedances; rho_hat floored at 1/k");
  }
  return s;
}

QuantileSurface estimate_surface(const Sample& sample, const Direction& u, double alpha,
                                 const ThetaGrid& grid, const EstimateOptions& opts) {
  check_alpha(alpha);
  return surface_from_fit(fit_directional(sample, u, opts), alpha, grid, opts.workers);
}

TailLevel tail_level(const TailFit& fit, const StdfContext& rho_ctx, const RotationMatrix& r,
                     const Vector& z) {
  require_heavy_tails(fit);
  const Vector zr = rotate(r, z);
  Vector w(zr.size());
  for (Eigen::Index j = 0; j < zr.size(); ++j) {
    const auto jj = static_cast<std::size_t>(j);
    const double g = fit.gamma_marginal[jj];
    const double arg = 1.0 + g * (zr[j] - fit.b[jj]) / fit.a[jj];
    w[j] = arg > 0.0 ? std::pow(arg, 1.0 / g) : 0.0;
  }
  const double norm = w.norm();
  TailLevel out;
  if (!(norm > 0.0)) return out;
  const RhoEstimate rho = rho_hat(rho_ctx, w / norm);
  out.extremal = true;
  out.alpha_z = static_cast<double>(fit.k) / static_cast<double>(fit.n) * rho.value / norm;
  return out;
}

TailLevel tail_level(const DirectionalFit& model, const Vector& z) {
  return tail_level(model.fit, *model.rho_context, model.rotation, z - model.center);
}

std::vector<OutlierFlag> flag_outliers(const DirectionalFit& model, const Sample& sample, double alpha,
                                       unsigned workers) {
  if (!(alpha > 0.0 && alpha <= 1.0)) throw UsageError("alpha must lie in (0, 1]");
  std::vector<OutlierFlag> flags(static_cast<std::size_t>(sample.rows()));
  parallel_for(flags.size(), workers, [&](std::size_t i) {
    const Vector z = sample.row(static_cast<Eigen::Index>(i)).transpose();
    const TailLevel level = tail_level(model, z);
    flags[i] = {level.alpha_z, level.extremal, level.extremal && level.alpha_z < alpha};
  });
  return flags;
}

std::vector<OutlierFlag> flag_outliers(const Sample& sample, const Direction& u, double alpha,
                                       const EstimateOptions& opts) {
  return flag_outliers(fit_directional(sample, u, opts), sample, alpha, opts.workers);
}

}  // namespace dmq
