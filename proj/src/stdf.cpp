#include "dmq/stdf.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "dmq/error.hpp"

namespace dmq {

StdfContext::StdfContext(const Sample& rotated, TailFit fit) : fit_(std::move(fit)) {
  n_ = static_cast<std::size_t>(rotated.rows());
  d_ = static_cast<std::size_t>(rotated.cols());
  if (fit_.n != n_) {
    throw DataError("tail fit was computed on " + std::to_string(fit_.n) +
                    " rows but the sample has " + std::to_string(n_));
  }
  if (fit_.dim() != d_) {
    throw DataError("tail fit dimension " + std::to_string(fit_.dim()) +
                    " does not match sample dimension " + std::to_string(d_));
  }
  rows_.resize(n_ * d_);
  for (std::size_t i = 0; i < n_; ++i)
    for (std::size_t j = 0; j < d_; ++j)
      rows_[i * d_ + j] = rotated(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));

  desc_values_.resize(d_);
  desc_rows_.resize(d_);
  for (std::size_t j = 0; j < d_; ++j) {
    auto& idx = desc_rows_[j];
    idx.resize(n_);
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    std::stable_sort(idx.begin(), idx.end(),
                     [&](std::size_t a, std::size_t b) { return value(a, j) > value(b, j); });
    auto& vals = desc_values_[j];
    vals.resize(n_);
    for (std::size_t r = 0; r < n_; ++r) vals[r] = value(idx[r], j);
  }
}

std::size_t StdfContext::marginal_exceedances(std::size_t j, double t) const {
  const auto& vals = desc_values_[j];
  // first position whose value is <= t
  const auto it = std::partition_point(vals.begin(), vals.end(), [t](double v) { return v > t; });
  return static_cast<std::size_t>(it - vals.begin());
}

std::size_t StdfContext::exceedance_count(const std::vector<double>& thresholds) const {
  if (thresholds.size() != d_) {
    throw DataError("threshold vector has dimension " + std::to_string(thresholds.size()) +
                    ", expected " + std::to_string(d_));
  }
  std::vector<std::size_t> m(d_);
  for (std::size_t j = 0; j < d_; ++j) m[j] = marginal_exceedances(j, thresholds[j]);
  const std::size_t widest =
      static_cast<std::size_t>(std::max_element(m.begin(), m.end()) - m.begin());

  // |A_w| plus, for every other marginal l, the rows of A_l not already in A_w or an
  // earlier A_l'.
  std::size_t count = m[widest];
  for (std::size_t l = 0; l < d_; ++l) {
    if (l == widest) continue;
    for (std::size_t r = 0; r < m[l]; ++r) {
      const std::size_t row = desc_rows_[l][r];
      bool seen = value(row, widest) > thresholds[widest];
      for (std::size_t p = 0; p < l && !seen; ++p) {
        if (p != widest && value(row, p) > thresholds[p]) seen = true;
      }
      if (!seen) ++count;
    }
  }
  return count;
}

double empirical_neg_log_G(const StdfContext& ctx, const std::vector<double>& x) {
  const TailFit& fit = ctx.fit();
  if (x.size() != ctx.dim()) throw DataError("argument dimension does not match the sample");
  std::vector<double> t(x.size());
  for (std::size_t j = 0; j < x.size(); ++j) t[j] = fit.a[j] * x[j] + fit.b[j];
  return static_cast<double>(ctx.exceedance_count(t)) / static_cast<double>(fit.k);
}

std::vector<double> frechet_argument(const TailFit& fit, const Vector& theta) {
  if (static_cast<std::size_t>(theta.size()) != fit.dim()) {
    throw DataError("theta dimension does not match the tail fit");
  }
  require_heavy_tails(fit);
  std::vector<double> x(fit.dim());
  for (std::size_t j = 0; j < fit.dim(); ++j) {
    const double th = theta[static_cast<Eigen::Index>(j)];
    if (!(th >= 0.0) || !std::isfinite(th)) {
      throw UsageError("theta components must be finite and non-negative");
    }
    const double g = fit.gamma_marginal[j];
    x[j] = (std::pow(th, g) - 1.0) / g;
  }
  return x;
}

RhoEstimate rho_hat(const StdfContext& ctx, const Vector& theta) {
  const TailFit& fit = ctx.fit();
  const std::vector<double> x = frechet_argument(fit, theta);
  std::vector<double> t(x.size());
  for (std::size_t j = 0; j < x.size(); ++j) t[j] = fit.a[j] * x[j] + fit.b[j];
  RhoEstimate out;
  out.count = ctx.exceedance_count(t);
  const double k = static_cast<double>(fit.k);
  if (out.count == 0) {
    out.value = 1.0 / k;
    out.floored = true;
  } else {
    out.value = static_cast<double>(out.count) / k;
  }
  return out;
}

}  // namespace dmq
