#include "dmq/config.hpp"

#include <cerrno>
#include <cmath>
#include <cstdlib>
#include <sstream>

#include "dmq/error.hpp"
#include "dmq/tmodel.hpp"

namespace dmq {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

double parse_real(const std::string& text, const std::string& what) {
  const std::string t = trim(text);
  errno = 0;
  char* end = nullptr;
  const double v = std::strtod(t.c_str(), &end);
  if (t.empty() || errno != 0 || end != t.c_str() + t.size() || !std::isfinite(v)) {
    throw UsageError("invalid " + what + ": '" + text + "'");
  }
  return v;
}

}  // namespace

double parse_alpha(const std::string& text) {
  const auto slash = text.find('/');
  double alpha = 0.0;
  if (slash == std::string::npos) {
    alpha = parse_real(text, "alpha");
  } else {
    const double num = parse_real(text.substr(0, slash), "alpha numerator");
    const double den = parse_real(text.substr(slash + 1), "alpha denominator");
    if (den == 0.0) throw UsageError("alpha denominator is zero");
    alpha = num / den;
  }
  if (!(alpha > 0.0 && alpha < 1.0)) throw UsageError("alpha must lie in (0, 1): '" + text + "'");
  return alpha;
}

std::optional<std::size_t> parse_k(const std::string& text) {
  const std::string t = trim(text);
  if (t == "auto") return std::nullopt;
  if (t.empty() || t.find_first_not_of("0123456789") != std::string::npos) {
    throw UsageError("k must be 'auto' or a positive integer, got '" + text + "'");
  }
  return static_cast<std::size_t>(std::stoull(t));
}

std::vector<double> parse_list(const std::string& text) {
  std::vector<double> out;
  std::istringstream is(text);
  std::string cell;
  while (std::getline(is, cell, ',')) out.push_back(parse_real(cell, "list value"));
  if (out.empty()) throw UsageError("empty list");
  return out;
}

DirectionSpec parse_direction(const std::string& text) {
  const std::string t = trim(text);
  DirectionSpec spec;
  if (t == "e") {
    spec.kind = DirectionSpec::Kind::e;
  } else if (t == "-e") {
    spec.kind = DirectionSpec::Kind::neg_e;
  } else if (t == "fpc") {
    spec.kind = DirectionSpec::Kind::fpc;
  } else {
    spec.kind = DirectionSpec::Kind::explicit_vector;
    spec.components = parse_list(t);
  }
  return spec;
}

Matrix sample_covariance(const Sample& sample) {
  if (sample.rows() < 2) throw DataError("covariance needs at least two rows");
  const Vector mean = sample.colwise().mean().transpose();
  const Sample centered = sample.rowwise() - mean.transpose();
  return centered.transpose() * centered / static_cast<double>(sample.rows() - 1);
}

Direction resolve_direction(const DirectionSpec& spec, Eigen::Index d, const Matrix& scale) {
  switch (spec.kind) {
    case DirectionSpec::Kind::e: return Direction::e(d);
    case DirectionSpec::Kind::neg_e: return Direction::neg_e(d);
    case DirectionSpec::Kind::fpc: return fpc_direction(scale);
    case DirectionSpec::Kind::explicit_vector: break;
  }
  if (static_cast<Eigen::Index>(spec.components.size()) != d) {
    throw UsageError("direction has " + std::to_string(spec.components.size()) +
                     " components but the data has dimension " + std::to_string(d));
  }
  return Direction(Eigen::Map<const Vector>(spec.components.data(), d));
}

Matrix parse_square_matrix(const std::string& text, Eigen::Index d) {
  const auto values = parse_list(text);
  if (static_cast<Eigen::Index>(values.size()) != d * d) {
    throw UsageError("sigma needs " + std::to_string(d * d) + " row-major values, got " +
                     std::to_string(values.size()));
  }
  Matrix m(d, d);
  for (Eigen::Index i = 0; i < d; ++i)
    for (Eigen::Index j = 0; j < d; ++j) m(i, j) = values[static_cast<std::size_t>(i * d + j)];
  return m;
}

OutputFormat parse_format(const std::string& text) {
  const std::string t = trim(text);
  if (t == "json") return OutputFormat::json;
  if (t == "csv") return OutputFormat::csv;
  throw UsageError("format must be 'json' or 'csv', got '" + text + "'");
}

EstimateOptions RunConfig::estimate_options() const {
  EstimateOptions opts;
  opts.k = k;
  opts.bootstrap.epsilon = epsilon;
  opts.bootstrap.b1 = b1;
  opts.bootstrap.seed = seed;
  opts.bootstrap.workers = workers;
  opts.center = center;
  opts.workers = workers;
  return opts;
}

}  // namespace dmq
