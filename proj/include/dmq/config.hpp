#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "dmq/geometry.hpp"
#include "dmq/quantile.hpp"

namespace dmq {

/// Level syntax: a decimal ("0.0008") or a fraction ("1/1250"). Result must lie in (0, 1).
double parse_alpha(const std::string& text);

/// "auto" (nullopt) or a positive integer.
std::optional<std::size_t> parse_k(const std::string& text);

/// Comma-separated reals.
std::vector<double> parse_list(const std::string& text);

struct DirectionSpec {
  enum class Kind { e, neg_e, fpc, explicit_vector };
  Kind kind = Kind::e;
  std::vector<double> components;  // explicit_vector only
};

/// "e", "-e", "fpc", or a comma-separated vector.
DirectionSpec parse_direction(const std::string& text);

/// Sample covariance with divisor n - 1.
Matrix sample_covariance(const Sample& sample);

/// Direction for a d-dimensional analysis. "fpc" uses `scale` (e.g. a sample covariance).
Direction resolve_direction(const DirectionSpec& spec, Eigen::Index d, const Matrix& scale);

/// Square matrix from a row-major comma list of d*d values.
Matrix parse_square_matrix(const std::string& text, Eigen::Index d);

enum class OutputFormat { json, csv };
OutputFormat parse_format(const std::string& text);

/// Parsed command-line / config-file settings shared by the subcommands.
struct RunConfig {
  std::string input;
  bool has_header = false;
  std::string output;
  OutputFormat format = OutputFormat::json;
  DirectionSpec direction;
  std::optional<double> alpha;  // nullopt means 1/n where a default exists
  std::optional<std::size_t> k;  // nullopt = bootstrap ("auto")
  std::size_t grid = kDefaultGridResolution;
  double delta = kDefaultGridDelta;
  double epsilon = 0.25;
  std::size_t b1 = 1000;
  std::uint64_t seed = 20240517;
  bool center = false;
  std::size_t replicates = 100;
  std::vector<double> mu;
  std::string sigma;  // row-major list, parsed once the dimension is known
  double nu = 3.0;
  std::size_t n = 5000;
  unsigned workers = 0;

  EstimateOptions estimate_options() const;
};

}  // namespace dmq
