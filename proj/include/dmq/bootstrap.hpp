#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "dmq/geometry.hpp"

namespace dmq {

struct BootstrapOptions {
  double epsilon = 0.25;
  std::size_t b1 = 1000;
  std::uint64_t seed = 20240517;
  std::size_t min_retained = 10;  // positive rows a resample must keep
  std::size_t max_attempts = 100;  // redraws per resample before giving up
  unsigned workers = 0;            // 0 = hardware concurrency
};

/// Outcome of the sample-fraction selection.
struct KSelection {
  std::size_t k_hat = 0;
  std::size_t n = 0;
  std::size_t m1 = 0;
  std::size_t m2 = 0;
  double epsilon = 0.0;
  std::size_t b1 = 0;
  std::uint64_t seed = 0;
  std::vector<std::size_t> k_j_m1;  // empty on the small-sample path
  std::vector<std::size_t> k_j_m2;
  std::vector<double> pi_j;
  std::vector<double> correction;  // (1 - 1/pi_j)^(1/(2 pi_j - 1)), 1 when replaced
  double k_raw = 0.0;              // unrounded average before clamping
  bool fallback = false;           // small-sample rule used instead of the bootstrap
  std::vector<std::string> warnings;
};

/// Resample-level result for one resample size m.
struct KForSize {
  std::size_t m = 0;
  std::vector<std::size_t> k;          // argmin of the average error, per marginal
  std::vector<double> min_error;       // average error at that k
  std::size_t min_retained_rows = 0;   // smallest retained row count over the resamples
  std::size_t redraws = 0;             // total resamples redrawn for too few positive rows
};

/// (M2 - 2 M1^2)^2 for an ascending marginal at k.
double bootstrap_error(std::span<const double> sorted, std::size_t k);

/// bootstrap_error for k = 2..k_max (entry i corresponds to k = i + 2), computed in one pass
/// with running log sums. Requires all values positive and k_max <= sorted.size() - 1.
std::vector<double> bootstrap_error_curve(std::span<const double> sorted, std::size_t k_max);

/// m1 = floor(n^(1 - epsilon)), exact at integer powers.
std::size_t resample_size_m1(std::size_t n, double epsilon);
/// m2 = floor(m1^2 / n) in integer arithmetic.
std::size_t resample_size_m2(std::size_t m1, std::size_t n);

/// Draws `b` resamples of size m with replacement (per-resample RNG streams derived from
/// `seed`), drops rows with a non-positive coordinate, and returns per marginal the k in
/// [2, min retained - 1] minimising the error averaged over the resamples.
KForSize optimal_k_for_size(const Sample& rotated, std::size_t m, std::size_t b,
                            std::uint64_t seed, const BootstrapOptions& opts = {});

/// log k / (2 log k - 2 log m1); negative for 2 <= k < m1.
double convergence_rate(std::size_t k_m1, std::size_t m1);

/// Full multivariate bootstrap selection of k on an already rotated sample.
KSelection select_k(const Sample& rotated, const BootstrapOptions& opts = {});

}  // namespace dmq
