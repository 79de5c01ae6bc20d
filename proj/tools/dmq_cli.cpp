#include <CLI11.hpp>
#include <json.hpp>

#include <cmath>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include "dmq/config.hpp"
#include "dmq/error.hpp"
#include "dmq/io.hpp"
#include "dmq/quantile.hpp"
#include "dmq/study.hpp"
#include "dmq/tmodel.hpp"

namespace {

using dmq::RunConfig;

int exit_code(dmq::ErrorKind kind) {
  switch (kind) {
    case dmq::ErrorKind::usage: return 2;
    case dmq::ErrorKind::data: return 3;
    case dmq::ErrorKind::numerical: return 4;
  }
  return 4;
}

void report_error(const std::string& kind, const std::string& message) {
  nlohmann::json j{{"error", kind}, {"message", message}};
  std::cerr << j.dump() << '\n';
}

// Raw string settings, parsed after CLI11 has merged flags with the config file.
struct RawSettings {
  std::string direction = "e";
  std::string alpha;
  std::string k = "auto";
  std::string format = "json";
  std::string mu;
  std::string t_norm;
  bool inverse = false;
  bool keep_going = false;
};

void emit(const std::string& path, const std::string& content) {
  if (path.empty() || path == "-") {
    std::cout << content;
  } else {
    dmq::write_text_file(path, content);
  }
}

dmq::Sample load(const RunConfig& cfg) {
  if (cfg.input.empty()) throw dmq::UsageError("--input is required");
  return dmq::read_csv(cfg.input, cfg.has_header);
}

dmq::Direction data_direction(const RunConfig& cfg, const dmq::Sample& sample) {
  const auto d = sample.cols();
  const dmq::Matrix scale = cfg.direction.kind == dmq::DirectionSpec::Kind::fpc
                                ? dmq::sample_covariance(sample)
                                : dmq::Matrix::Identity(d, d);
  return dmq::resolve_direction(cfg.direction, d, scale);
}

double resolved_alpha(const RunConfig& cfg, std::size_t n) {
  return cfg.alpha.value_or(1.0 / static_cast<double>(n));
}

dmq::TParams model_params(const RunConfig& cfg) {
  if (cfg.sigma.empty()) throw dmq::UsageError("--sigma is required");
  const auto values = dmq::parse_list(cfg.sigma);
  const auto d = static_cast<Eigen::Index>(std::llround(std::sqrt(static_cast<double>(values.size()))));
  if (d * d != static_cast<Eigen::Index>(values.size())) {
    throw dmq::UsageError("--sigma must list d*d values, got " + std::to_string(values.size()));
  }
  dmq::TParams p;
  p.sigma = dmq::parse_square_matrix(cfg.sigma, d);
  p.nu = cfg.nu;
  if (cfg.mu.empty()) {
    p.mu = dmq::Vector::Zero(d);
  } else {
    if (static_cast<Eigen::Index>(cfg.mu.size()) != d) {
      throw dmq::UsageError("--mu has " + std::to_string(cfg.mu.size()) +
                            " components but sigma is " + std::to_string(d) + "x" +
                            std::to_string(d));
    }
    p.mu = Eigen::Map<const dmq::Vector>(cfg.mu.data(), d);
  }
  dmq::validate(p);
  return p;
}

std::string vector_json_lines(const std::vector<std::string>& warnings) {
  nlohmann::json j{{"warnings", warnings}};
  return j.dump(2) + "\n";
}

std::string render_surface(const dmq::QuantileSurface& s, dmq::OutputFormat format) {
  if (format == dmq::OutputFormat::csv) return dmq::surface_to_csv(s);
  return dmq::to_json(s).dump(2) + "\n";
}

int run_rotate(const RunConfig& cfg, bool inverse) {
  const dmq::Sample sample = load(cfg);
  const dmq::RotationMatrix r = dmq::rotation_for(data_direction(cfg, sample));
  const dmq::Sample out = inverse ? dmq::unrotate(r, sample) : dmq::rotate(r, sample);
  if (cfg.format == dmq::OutputFormat::json) {
    nlohmann::json j;
    j["direction"] = std::vector<double>(r.direction().components().data(),
                                         r.direction().components().data() + r.dim());
    auto rows = nlohmann::json::array();
    for (Eigen::Index i = 0; i < r.dim(); ++i) {
      std::vector<double> row(static_cast<std::size_t>(r.dim()));
      for (Eigen::Index c = 0; c < r.dim(); ++c) row[static_cast<std::size_t>(c)] = r.matrix()(i, c);
      rows.push_back(row);
    }
    j["rotation"] = rows;
    auto pts = nlohmann::json::array();
    for (Eigen::Index i = 0; i < out.rows(); ++i) {
      std::vector<double> row(static_cast<std::size_t>(out.cols()));
      for (Eigen::Index c = 0; c < out.cols(); ++c) row[static_cast<std::size_t>(c)] = out(i, c);
      pts.push_back(row);
    }
    j["points"] = pts;
    emit(cfg.output, j.dump(2) + "\n");
  } else {
    std::ostringstream os;
    dmq::write_csv(os, out);
    emit(cfg.output, os.str());
  }
  return 0;
}

int run_select_k(const RunConfig& cfg) {
  const dmq::Sample sample = load(cfg);
  const dmq::RotationMatrix r = dmq::rotation_for(data_direction(cfg, sample));
  dmq::Sample centred = sample;
  if (cfg.center) centred.rowwise() -= dmq::componentwise_median(sample).transpose();
  const dmq::Sample rotated = dmq::rotate(r, centred);
  const dmq::KSelection sel = dmq::select_k(rotated, cfg.estimate_options().bootstrap);
  emit(cfg.output, dmq::to_json(sel).dump(2) + "\n");
  for (const auto& w : sel.warnings) std::cerr << "warning: " << w << '\n';
  return 0;
}

int run_estimate(const RunConfig& cfg) {
  const dmq::Sample sample = load(cfg);
  const dmq::Direction u = data_direction(cfg, sample);
  const double alpha = resolved_alpha(cfg, static_cast<std::size_t>(sample.rows()));
  const dmq::ThetaGrid grid =
      dmq::theta_grid(static_cast<std::size_t>(sample.cols()), cfg.grid, cfg.delta);
  const dmq::QuantileSurface s = dmq::estimate_surface(sample, u, alpha, grid, cfg.estimate_options());
  emit(cfg.output, render_surface(s, cfg.format));
  if (!cfg.output.empty() && cfg.output != "-") {
    dmq::write_text_file(cfg.output + ".report.json", vector_json_lines(s.warnings));
  }
  for (const auto& w : s.warnings) std::cerr << "warning: " << w << '\n';
  return 0;
}

int run_flag(const RunConfig& cfg) {
  const dmq::Sample sample = load(cfg);
  const dmq::Direction u = data_direction(cfg, sample);
  const double alpha = resolved_alpha(cfg, static_cast<std::size_t>(sample.rows()));
  const dmq::DirectionalFit model = dmq::fit_directional(sample, u, cfg.estimate_options());
  const auto flags = dmq::flag_outliers(model, sample, alpha, cfg.workers);
  std::size_t flagged = 0;
  for (const auto& f : flags) flagged += f.flagged ? 1 : 0;
  if (cfg.format == dmq::OutputFormat::json) {
    nlohmann::json j;
    j["alpha"] = alpha;
    j["k"] = model.fit.k;
    j["flagged"] = flagged;
    auto rows = nlohmann::json::array();
    for (const auto& f : flags) {
      rows.push_back({{"alpha_z", f.alpha_z}, {"extremal", f.extremal}, {"flagged", f.flagged}});
    }
    j["rows"] = rows;
    j["warnings"] = model.warnings;
    emit(cfg.output, j.dump(2) + "\n");
  } else {
    std::ostringstream os;
    os << "row,alpha_z,extremal,flagged\n";
    for (std::size_t i = 0; i < flags.size(); ++i) {
      os << i << ',' << dmq::format_double(flags[i].alpha_z) << ',' << (flags[i].extremal ? 1 : 0)
         << ',' << (flags[i].flagged ? 1 : 0) << '\n';
    }
    emit(cfg.output, os.str());
  }
  for (const auto& w : model.warnings) std::cerr << "warning: " << w << '\n';
  return 0;
}

int run_simulate(const RunConfig& cfg) {
  const dmq::TParams p = model_params(cfg);
  const dmq::Sample s = dmq::sample_t(p, cfg.n, cfg.seed);
  std::ostringstream os;
  dmq::write_csv(os, s);
  emit(cfg.output, os.str());
  return 0;
}

dmq::Direction model_direction(const RunConfig& cfg, const dmq::TParams& p) {
  return dmq::resolve_direction(cfg.direction, p.dim(), p.sigma);
}

int run_oracle(const RunConfig& cfg, const std::string& t_norm) {
  const dmq::TParams p = model_params(cfg);
  const dmq::Direction u = model_direction(cfg, p);
  if (!cfg.alpha) throw dmq::UsageError("--alpha is required for oracle-t");
  const double alpha = *cfg.alpha;
  const double t = t_norm.empty() ? 1.0 / alpha : std::stod(t_norm);
  const dmq::ThetaGrid grid = dmq::theta_grid(static_cast<std::size_t>(p.dim()), cfg.grid, cfg.delta);
  emit(cfg.output, render_surface(dmq::oracle_surface(p, u, alpha, grid, t), cfg.format));
  return 0;
}

int run_study(const RunConfig& cfg, const RawSettings& raw) {
  if (cfg.output.empty()) throw dmq::UsageError("--output (file prefix) is required for mc-study");
  dmq::StudyConfig sc;
  sc.params = model_params(cfg);
  sc.n = cfg.n;
  sc.replicates = cfg.replicates;
  sc.direction = cfg.direction;
  sc.alpha = cfg.alpha;
  sc.grid_m = cfg.grid;
  sc.delta = cfg.delta;
  sc.k = cfg.k;
  sc.epsilon = cfg.epsilon;
  sc.b1 = cfg.b1;
  sc.seed = cfg.seed;
  if (!raw.t_norm.empty()) sc.t_norm = std::stod(raw.t_norm);
  sc.keep_going = raw.keep_going;
  sc.workers = cfg.workers;
  dmq::write_study(dmq::run_study(sc), cfg.output);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Extreme directional multivariate quantiles"};
  app.set_config("--config", "", "flat key=value file; command-line flags take precedence");
  app.require_subcommand(1, 1);
  app.fallthrough();

  RunConfig cfg;
  RawSettings raw;
  app.add_option("--input", cfg.input, "CSV sample, one observation per line");
  app.add_flag("--has-header", cfg.has_header, "skip the first CSV line");
  app.add_option("--output", cfg.output, "output path (mc-study: file prefix); stdout when omitted");
  app.add_option("--format", raw.format, "json or csv")->capture_default_str();
  app.add_option("--direction", raw.direction, "e, -e, fpc or a comma list")->capture_default_str();
  app.add_option("--alpha", raw.alpha, "level, decimal or a/b; default 1/n");
  app.add_option("--k", raw.k, "integer or auto")->capture_default_str();
  app.add_option("--grid", cfg.grid, "angle resolution m")->capture_default_str();
  app.add_option("--delta", cfg.delta, "angle margin")->capture_default_str();
  app.add_option("--epsilon", cfg.epsilon, "bootstrap resample exponent")->capture_default_str();
  app.add_option("--b1", cfg.b1, "bootstrap resamples")->capture_default_str();
  app.add_option("--seed", cfg.seed, "master seed")->capture_default_str();
  app.add_flag("--center", cfg.center, "subtract the componentwise median first");
  app.add_option("--replicates", cfg.replicates, "Monte Carlo replicates")->capture_default_str();
  app.add_option("--mu", raw.mu, "t location, comma list; default zero");
  app.add_option("--sigma", cfg.sigma, "t scale matrix, row-major comma list");
  app.add_option("--nu", cfg.nu, "t degrees of freedom")->capture_default_str();
  app.add_option("--n", cfg.n, "sample size")->capture_default_str();
  app.add_option("--threads", cfg.workers, "worker threads, 0 = all cores")->capture_default_str();
  app.add_option("--t-norm", raw.t_norm, "oracle normalisation level t; default 1/alpha");

  auto* rotate = app.add_subcommand("rotate", "apply R_u to every row");
  rotate->add_flag("--inverse", raw.inverse, "apply R_u' instead");
  auto* select = app.add_subcommand("select-k", "bootstrap choice of k");
  auto* estimate = app.add_subcommand("estimate", "quantile surface from data");
  auto* flag = app.add_subcommand("flag", "per-row tail level and outlier flag");
  auto* simulate = app.add_subcommand("simulate-t", "draw a multivariate t sample");
  auto* oracle = app.add_subcommand("oracle-t", "theoretical surface of a t model");
  auto* study = app.add_subcommand("mc-study", "Monte Carlo study against the t oracle");
  study->add_flag("--keep-going", raw.keep_going, "record failed replicates instead of stopping");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    report_error("usage", e.what());
    return 2;
  }

  try {
    cfg.format = dmq::parse_format(raw.format);
    cfg.direction = dmq::parse_direction(raw.direction);
    if (!raw.alpha.empty()) cfg.alpha = dmq::parse_alpha(raw.alpha);
    cfg.k = dmq::parse_k(raw.k);
    if (!raw.mu.empty()) cfg.mu = dmq::parse_list(raw.mu);

    if (rotate->parsed()) return run_rotate(cfg, raw.inverse);
    if (select->parsed()) return run_select_k(cfg);
    if (estimate->parsed()) return run_estimate(cfg);
    if (flag->parsed()) return run_flag(cfg);
    if (simulate->parsed()) return run_simulate(cfg);
    if (oracle->parsed()) return run_oracle(cfg, raw.t_norm);
    if (study->parsed()) return run_study(cfg, raw);
  } catch (const dmq::Error& e) {
    report_error(dmq::to_string(e.kind()), e.what());
    return exit_code(e.kind());
  } catch (const std::invalid_argument& e) {
    report_error("usage", e.what());
    return 2;
  } catch (const std::exception& e) {
    report_error("numerical", e.what());
    return 4;
  }
  return 2;
}
