#include "dmq/study.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "dmq/error.hpp"
#include "dmq/io.hpp"
#include "dmq/parallel.hpp"

namespace dmq {

double percentile(std::vector<double> values, double p) {
  if (values.empty()) throw UsageError("percentile of an empty set");
  std::sort(values.begin(), values.end());
  const double pos = std::clamp(p, 0.0, 1.0) * static_cast<double>(values.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, values.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  if (frac == 0.0 || values[lo] == values[hi]) return values[lo];
  return values[lo] + frac * (values[hi] - values[lo]);
}

QuantileSurface oracle_surface(const TParams& params, const Direction& u, double alpha,
                               const ThetaGrid& grid, double t) {
  const RotationMatrix r = rotation_for(u);
  QuantileSurface s;
  s.source = "oracle";
  s.alpha = alpha;
  s.direction = u.components();
  s.k = 0;
  s.gamma = params.gamma();
  s.center = Vector::Zero(u.dim());
  s.points.resize(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) {
    SurfacePoint& p = s.points[i];
    p.theta = grid.thetas[i];
    p.angles = grid.angles[i];
    p.rho = theoretical_rho(p.theta, params, u);
    p.x_rotated = asymptotic_quantile(params, u, alpha, p.theta, t);
    p.x_original = unrotate(r, p.x_rotated);
  }
  return s;
}

StudyResult run_study(const StudyConfig& config) {
  validate(config.params);
  if (config.replicates < 1) throw UsageError("replicates must be >= 1");
  const Eigen::Index d = config.params.dim();
  if (d < 2) throw UsageError("study needs dimension >= 2");

  StudyResult out;
  out.config = config;
  const Direction u = resolve_direction(config.direction, d, config.params.sigma);
  out.direction = u.components();
  out.alpha = config.alpha.value_or(1.0 / static_cast<double>(config.n));
  if (!(out.alpha > 0.0 && out.alpha < 1.0)) throw UsageError("alpha must lie in (0, 1)");
  out.t_norm = config.t_norm.value_or(1.0 / out.alpha);
  out.grid = theta_grid(static_cast<std::size_t>(d), config.grid_m, config.delta);

  const Vector center_theta = Vector::Constant(d, 1.0 / std::sqrt(static_cast<double>(d)));
  Vector oracle_center;
  out.has_oracle = d <= 3;
  if (out.has_oracle) {
    const QuantileSurface oracle = oracle_surface(config.params, u, out.alpha, out.grid, out.t_norm);
    for (const auto& p : oracle.points) {
      out.rho_tilde.push_back(p.rho);
      out.oracle_rotated.push_back(p.x_rotated);
      out.oracle_original.push_back(p.x_original);
    }
    oracle_center = asymptotic_quantile(config.params, u, out.alpha, center_theta, out.t_norm);
  }

  out.replicates.resize(config.replicates);
  const unsigned outer = config.workers;
  parallel_for(config.replicates, outer, [&](std::size_t r) {
    try {
      const Sample sample = sample_t(config.params, config.n, derive_seed(config.seed, 0, r));
      EstimateOptions opts;
      opts.k = config.k;
      opts.bootstrap.epsilon = config.epsilon;
      opts.bootstrap.b1 = config.b1;
      opts.bootstrap.seed = derive_seed(config.seed, 1, r);
      opts.bootstrap.workers = 1;
      opts.workers = 1;
      const DirectionalFit model = fit_directional(sample, u, opts);
      const QuantileSurface surface = surface_from_fit(model, out.alpha, out.grid, 1);

      ReplicateResult& rep = out.replicates[r];
      rep.k = model.fit.k;
      rep.fallback = model.selection && model.selection->fallback;
      rep.gamma = model.fit.gamma;
      rep.gamma_marginal = model.fit.gamma_marginal;
      for (const auto& p : surface.points) {
        rep.rho.push_back(p.rho);
        rep.x_rotated.push_back(p.x_rotated);
        rep.x_original.push_back(p.x_original);
        rep.floored += p.floored ? 1 : 0;
      }
      if (out.has_oracle) {
        const RhoEstimate rho = rho_hat(*model.rho_context, center_theta);
        const Vector x_hat = quantile_point(model.fit, rho.value, center_theta, out.alpha);
        rep.re = relative_error(oracle_center, x_hat);
      } else {
        rep.re = std::numeric_limits<double>::quiet_NaN();
      }
    } catch (const Error& e) {
      if (!config.keep_going) throw Error(e.kind(), "replicate " + std::to_string(r) + ": " + e.what());
      ReplicateResult& rep = out.replicates[r];
      rep = ReplicateResult{};
      rep.ok = false;
      rep.error = std::string(to_string(e.kind())) + ": " + e.what();
    }
  });
  if (std::none_of(out.replicates.begin(), out.replicates.end(),
                   [](const ReplicateResult& r) { return r.ok; })) {
    throw NumericalError("every replicate failed; first: " + out.replicates.front().error);
  }
  return out;
}

namespace {

std::string join_header(const std::vector<std::string>& cols) {
  std::string s;
  for (std::size_t i = 0; i < cols.size(); ++i) s += (i ? "," : "") + cols[i];
  return s + "\n";
}

std::vector<std::string> numbered(const std::string& stem, std::size_t count) {
  std::vector<std::string> out;
  for (std::size_t i = 1; i <= count; ++i) out.push_back(stem + "_" + std::to_string(i));
  return out;
}

void append(std::vector<std::string>& to, const std::vector<std::string>& from) {
  to.insert(to.end(), from.begin(), from.end());
}

}  // namespace

StudyFiles render_study(const StudyResult& result) {
  const std::size_t d = static_cast<std::size_t>(result.direction.size());
  const double gamma = result.config.params.gamma();
  StudyFiles files;

  {
    std::ostringstream os;
    std::vector<std::string> cols{"replicate", "ok", "k", "fallback", "gamma"};
    append(cols, numbered("gamma", d));
    append(cols, numbered("gamma_ratio", d));
    cols.emplace_back("re");
    cols.emplace_back("floored_points");
    os << join_header(cols);
    for (std::size_t r = 0; r < result.replicates.size(); ++r) {
      const auto& rep = result.replicates[r];
      if (!rep.ok) {
        os << r << ",0";
        for (std::size_t c = 2; c < cols.size(); ++c) os << ",nan";
        os << '\n';
        continue;
      }
      os << r << ",1," << rep.k << ',' << (rep.fallback ? 1 : 0) << ',' << format_double(rep.gamma);
      for (double g : rep.gamma_marginal) os << ',' << format_double(g);
      for (double g : rep.gamma_marginal) os << ',' << format_double(g / gamma);
      os << ',' << format_double(rep.re) << ',' << rep.floored << '\n';
    }
    files.replicates_csv = os.str();
  }

  {
    std::ostringstream os;
    std::vector<std::string> cols{"replicate", "point"};
    append(cols, numbered("angle", d - 1));
    cols.emplace_back("rho_hat");
    cols.emplace_back("rho_tilde");
    os << join_header(cols);
    for (std::size_t r = 0; r < result.replicates.size(); ++r) {
      const auto& rep = result.replicates[r];
      if (!rep.ok) continue;
      for (std::size_t p = 0; p < result.grid.size(); ++p) {
        os << r << ',' << p;
        for (double a : result.grid.angles[p]) os << ',' << format_double(a);
        os << ',' << format_double(rep.rho[p]) << ','
           << (result.has_oracle ? format_double(result.rho_tilde[p]) : std::string("nan")) << '\n';
      }
    }
    files.rho_csv = os.str();
  }

  {
    std::ostringstream os;
    std::vector<std::string> cols{"point"};
    append(cols, numbered("angle", d - 1));
    append(cols, numbered("theta", d));
    for (const char* space : {"rotated", "original"}) {
      for (const char* stat : {"q15", "median", "q85", "oracle"}) {
        append(cols, numbered(std::string(space) + "_" + stat, d));
      }
    }
    os << join_header(cols);
    std::vector<const ReplicateResult*> good;
    for (const auto& rep : result.replicates)
      if (rep.ok) good.push_back(&rep);
    std::vector<double> column(good.size());
    for (std::size_t p = 0; p < result.grid.size(); ++p) {
      os << p;
      for (double a : result.grid.angles[p]) os << ',' << format_double(a);
      for (std::size_t j = 0; j < d; ++j) os << ',' << format_double(result.grid.thetas[p][static_cast<Eigen::Index>(j)]);
      for (int space = 0; space < 2; ++space) {
        std::vector<double> q15(d), q50(d), q85(d);
        for (std::size_t j = 0; j < d; ++j) {
          for (std::size_t r = 0; r < good.size(); ++r) {
            const auto& pts = space == 0 ? good[r]->x_rotated : good[r]->x_original;
            column[r] = pts[p][static_cast<Eigen::Index>(j)];
          }
          q15[j] = percentile(column, 0.15);
          q50[j] = percentile(column, 0.50);
          q85[j] = percentile(column, 0.85);
        }
        for (const auto* vals : {&q15, &q50, &q85})
          for (double v : *vals) os << ',' << format_double(v);
        for (std::size_t j = 0; j < d; ++j) {
          if (result.has_oracle) {
            const auto& o = space == 0 ? result.oracle_rotated[p] : result.oracle_original[p];
            os << ',' << format_double(o[static_cast<Eigen::Index>(j)]);
          } else {
            os << ",nan";
          }
        }
      }
      os << '\n';
    }
    files.bands_csv = os.str();
  }

  {
    std::vector<double> ks, res;
    std::vector<std::vector<double>> ratios(d);
    std::size_t fallbacks = 0;
    auto failures = nlohmann::json::array();
    for (std::size_t r = 0; r < result.replicates.size(); ++r) {
      const auto& rep = result.replicates[r];
      if (!rep.ok) {
        failures.push_back({{"replicate", r}, {"error", rep.error}});
        continue;
      }
      ks.push_back(static_cast<double>(rep.k));
      if (result.has_oracle) res.push_back(rep.re);
      for (std::size_t j = 0; j < d; ++j) ratios[j].push_back(rep.gamma_marginal[j] / gamma);
      fallbacks += rep.fallback ? 1 : 0;
    }
    auto summary = [](const std::vector<double>& v) {
      return nlohmann::json{{"q25", percentile(v, 0.25)},
                            {"median", percentile(v, 0.5)},
                            {"q75", percentile(v, 0.75)}};
    };
    nlohmann::json j;
    j["n"] = result.config.n;
    j["replicates"] = result.replicates.size();
    j["alpha"] = result.alpha;
    j["t_norm"] = result.t_norm;
    j["nu"] = result.config.params.nu;
    j["seed"] = result.config.seed;
    j["direction"] = std::vector<double>(result.direction.data(), result.direction.data() + d);
    j["grid"] = {{"m", result.grid.m}, {"delta", result.grid.delta}, {"points", result.grid.size()}};
    j["k"] = summary(ks);
    j["bootstrap_fallbacks"] = fallbacks;
    j["failed_replicates"] = failures;
    auto rj = nlohmann::json::array();
    for (const auto& r : ratios) rj.push_back(summary(r));
    j["gamma_ratio"] = rj;
    if (result.has_oracle) j["re"] = summary(res);
    files.summary_json = j.dump(2) + "\n";
  }
  return files;
}

void write_study(const StudyResult& result, const std::string& prefix) {
  const StudyFiles files = render_study(result);
  write_text_file(prefix + "_replicates.csv", files.replicates_csv);
  write_text_file(prefix + "_rho.csv", files.rho_csv);
  write_text_file(prefix + "_bands.csv", files.bands_csv);
  write_text_file(prefix + "_summary.json", files.summary_json);
}

}  // namespace dmq
