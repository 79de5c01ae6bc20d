#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "dmq/geometry.hpp"

namespace dmq {

/// Per-marginal ascending order statistics of a sample.
struct MarginalOrderStats {
  std::vector<std::vector<double>> sorted;  // sorted[j] holds column j, non-decreasing
  std::size_t n = 0;

  std::size_t dim() const { return sorted.size(); }
};

MarginalOrderStats order_stats(const Sample& sample);

/// Tail fit of a (rotated) sample at intermediate sequence k.
struct TailFit {
  std::size_t k = 0;
  std::size_t n = 0;
  std::vector<double> gamma_marginal;  // moment estimates, one per coordinate
  double gamma = 0.0;                  // joint index (mean of the marginal estimates)
  std::vector<double> a;               // scale normalisation a_j(n/k)
  std::vector<double> b;               // location normalisation b_j(n/k) = X_{n-k:n}
  std::vector<double> m1;              // first log-moment per coordinate

  std::size_t dim() const { return gamma_marginal.size(); }
};

/// M^(r)_k = (1/k) sum_{i<k} (ln X_{n-i:n} - ln X_{n-k:n})^r for r in {1, 2}.
/// `sorted` must be ascending; requires 1 <= k <= n-1 and a strictly positive threshold.
double log_moment(std::span<const double> sorted, std::size_t k, int r);

/// Moment (Dekkers-Einmahl-de Haan) estimator of the extreme value index.
double gamma_moment(std::span<const double> sorted, std::size_t k);

/// Same estimator from precomputed log-moments; throws DegenerateMomentsError when
/// M2 == 0 or M1^2 == M2.
double gamma_from_moments(double m1, double m2);

/// Joint tail index: arithmetic mean of the marginal estimates.
double joint_gamma(std::span<const double> gammas);

struct NormSequences {
  double a = 0.0;
  double b = 0.0;
};

/// a = X_{n-k:n} M1 max(1, 1 - gamma),  b = X_{n-k:n}.
NormSequences norm_sequences(std::span<const double> sorted, std::size_t k, double gamma_j);

TailFit fit_tails(const MarginalOrderStats& stats, std::size_t k);
TailFit fit_tails(const Sample& rotated, std::size_t k);

/// Warning text when the marginal estimates disagree by more than half their mean.
std::optional<std::string> gamma_disparity_warning(const TailFit& fit);

/// Throws HeavyTailError unless every marginal estimate is strictly positive.
void require_heavy_tails(const TailFit& fit);

}  // namespace dmq
