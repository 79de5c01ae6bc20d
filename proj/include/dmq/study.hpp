#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "dmq/bootstrap.hpp"
#include "dmq/config.hpp"
#include "dmq/quantile.hpp"
#include "dmq/tmodel.hpp"

namespace dmq {

/// Linear-interpolation percentile (p in [0, 1]) of unsorted values.
double percentile(std::vector<double> values, double p);

/// Surface of asymptotic quantile points x_tilde for a t model, tagged source = "oracle".
QuantileSurface oracle_surface(const TParams& params, const Direction& u, double alpha,
                               const ThetaGrid& grid, double t);

struct StudyConfig {
  TParams params;
  std::size_t n = 5000;
  std::size_t replicates = 100;
  DirectionSpec direction;        // "fpc" resolves against params.sigma
  std::optional<double> alpha;    // default 1/n
  std::size_t grid_m = kDefaultGridResolution;
  double delta = kDefaultGridDelta;
  std::optional<std::size_t> k;   // default: bootstrap per replicate
  double epsilon = 0.25;
  std::size_t b1 = 1000;
  std::uint64_t seed = 20240517;
  std::optional<double> t_norm;   // oracle normalisation level, default 1/alpha
  unsigned workers = 0;
  bool keep_going = false;  // record failed replicates instead of aborting the study
};

struct ReplicateResult {
  bool ok = true;
  std::string error;  // "kind: message" when !ok
  std::size_t k = 0;
  bool fallback = false;
  double gamma = 0.0;
  std::vector<double> gamma_marginal;
  double re = 0.0;  // NaN when the oracle is unavailable (d > 3)
  std::vector<double> rho;
  std::vector<Vector> x_rotated;
  std::vector<Vector> x_original;
  std::size_t floored = 0;
};

struct StudyResult {
  StudyConfig config;
  Vector direction;
  double alpha = 0.0;
  double t_norm = 0.0;
  ThetaGrid grid;
  bool has_oracle = false;
  std::vector<double> rho_tilde;
  std::vector<Vector> oracle_rotated;
  std::vector<Vector> oracle_original;
  std::vector<ReplicateResult> replicates;
};

/// Simulates `replicates` t samples, estimates each surface and compares with the oracle.
/// Replicate r draws its sample from derive_seed(seed, 0, r) and bootstraps with
/// derive_seed(seed, 1, r), so results do not depend on the worker count.
/// A failing replicate throws with its index prefixed, unless keep_going is set; it is then
/// marked !ok and left out of the bands and summaries.
StudyResult run_study(const StudyConfig& config);

struct StudyFiles {
  std::string replicates_csv;
  std::string rho_csv;
  std::string bands_csv;
  std::string summary_json;
};

StudyFiles render_study(const StudyResult& result);

/// Writes <prefix>_replicates.csv, <prefix>_rho.csv, <prefix>_bands.csv, <prefix>_summary.json.
void write_study(const StudyResult& result, const std::string& prefix);

}  // namespace dmq
