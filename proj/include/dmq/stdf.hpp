#pragma once

#include <cstddef>
#include <vector>

#include "dmq/evt.hpp"
#include "dmq/geometry.hpp"

namespace dmq {

/// Rotated sample plus the tail fit used to normalise it. Immutable after construction;
/// holds a per-marginal descending index so that exceedance counts cost
/// O(sum of the smaller marginal exceedance counts) instead of O(n d).
class StdfContext {
 public:
  StdfContext(const Sample& rotated, TailFit fit);

  const TailFit& fit() const { return fit_; }
  std::size_t n() const { return n_; }
  std::size_t dim() const { return d_; }
  double value(std::size_t row, std::size_t col) const { return rows_[row * d_ + col]; }

  /// Number of rows with at least one coordinate strictly above its threshold.
  std::size_t exceedance_count(const std::vector<double>& thresholds) const;
  /// Number of rows whose coordinate j is strictly above t.
  std::size_t marginal_exceedances(std::size_t j, double t) const;

 private:
  TailFit fit_;
  std::size_t n_ = 0;
  std::size_t d_ = 0;
  std::vector<double> rows_;                      // row-major copy of the sample
  std::vector<std::vector<double>> desc_values_;  // per marginal, descending
  std::vector<std::vector<std::size_t>> desc_rows_;
};

/// -ln G_hat(x) = (1/k) #{i : some (X_i)_j > a_j x_j + b_j}.
double empirical_neg_log_G(const StdfContext& ctx, const std::vector<double>& x);

struct RhoEstimate {
  double value = 0.0;     // count / k, or 1/k when floored
  std::size_t count = 0;  // raw union exceedance count
  bool floored = false;   // true when count == 0
};

/// rho_hat(theta) = -ln G_hat((theta_j^gamma_j - 1) / gamma_j).
/// theta must have non-negative finite components; every gamma_j must be positive.
RhoEstimate rho_hat(const StdfContext& ctx, const Vector& theta);

/// Normalised-scale argument (theta_j^gamma_j - 1)/gamma_j used by rho_hat.
std::vector<double> frechet_argument(const TailFit& fit, const Vector& theta);

}  // namespace dmq
