#include "dmq/bootstrap.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

#include "dmq/error.hpp"
#include "dmq/evt.hpp"
#include "dmq/parallel.hpp"

namespace dmq {

double bootstrap_error(std::span<const double> sorted, std::size_t k) {
  const double m1 = log_moment(sorted, k, 1);
  const double m2 = log_moment(sorted, k, 2);
  const double e = m2 - 2.0 * m1 * m1;
  return e * e;
}

std::vector<double> bootstrap_error_curve(std::span<const double> sorted, std::size_t k_max) {
  const std::size_t n = sorted.size();
  if (k_max < 2 || k_max + 1 > n) {
    throw UsageError("error curve needs 2 <= k_max <= n-1 (k_max=" + std::to_string(k_max) +
                     ", n=" + std::to_string(n) + ")");
  }
  if (!(sorted[n - k_max - 1] > 0.0)) {
    throw PositivityError("positivity violated in bootstrap resample; recenter data");
  }
  // Logs shifted by the maximum keep the running sums small.
  const double shift = std::log(sorted[n - 1]);
  std::vector<double> curve(k_max - 1);
  double s1 = 0.0;
  double s2 = 0.0;
  for (std::size_t k = 1; k <= k_max; ++k) {
    const double l = std::log(sorted[n - k]) - shift;  // X_{n-k+1:n}, the k-th largest
    s1 += l;
    s2 += l * l;
    if (k < 2) continue;
    const double lt = std::log(sorted[n - k - 1]) - shift;
    const double kk = static_cast<double>(k);
    const double m1 = s1 / kk - lt;
    const double m2 = s2 / kk - 2.0 * lt * s1 / kk + lt * lt;
    const double e = m2 - 2.0 * m1 * m1;
    curve[k - 2] = e * e;
  }
  return curve;
}

std::size_t resample_size_m1(std::size_t n, double epsilon) {
  const double v = std::pow(static_cast<double>(n), 1.0 - epsilon);
  const double r = std::round(v);
  if (std::abs(v - r) <= 1e-9 * std::max(1.0, v)) return static_cast<std::size_t>(r);
  return static_cast<std::size_t>(std::floor(v));
}

std::size_t resample_size_m2(std::size_t m1, std::size_t n) { return m1 * m1 / n; }

double convergence_rate(std::size_t k_m1, std::size_t m1) {
  if (k_m1 < 2 || k_m1 >= m1) {
    throw NumericalError("convergence rate needs 2 <= k_j(m1) < m1 (k=" + std::to_string(k_m1) +
                         ", m1=" + std::to_string(m1) + ")");
  }
  const double lk = std::log(static_cast<double>(k_m1));
  return lk / (2.0 * lk - 2.0 * std::log(static_cast<double>(m1)));
}

namespace {

struct ResampleCurves {
  std::size_t retained = 0;
  std::size_t redraws = 0;
  std::vector<std::vector<double>> curves;  // per marginal
};

ResampleCurves run_resample(const Sample& rotated, std::size_t m, std::uint64_t stream_seed,
                            const BootstrapOptions& opts) {
  const std::size_t n = static_cast<std::size_t>(rotated.rows());
  const Eigen::Index d = rotated.cols();
  std::mt19937_64 rng(stream_seed);
  std::uniform_int_distribution<std::size_t> pick(0, n - 1);

  ResampleCurves out;
  std::vector<std::vector<double>> cols(static_cast<std::size_t>(d));
  for (std::size_t attempt = 0; attempt < opts.max_attempts; ++attempt) {
    for (auto& c : cols) c.clear();
    for (std::size_t draw = 0; draw < m; ++draw) {
      const auto row = static_cast<Eigen::Index>(pick(rng));
      if ((rotated.row(row).array() > 0.0).all()) {
        for (Eigen::Index j = 0; j < d; ++j) cols[static_cast<std::size_t>(j)].push_back(rotated(row, j));
      }
    }
    const std::size_t kept = cols[0].size();
    if (kept >= opts.min_retained && kept >= 3) {
      out.retained = kept;
      out.curves.reserve(cols.size());
      for (auto& c : cols) {
        std::sort(c.begin(), c.end());
        out.curves.push_back(bootstrap_error_curve(c, kept - 1));
      }
      return out;
    }
    ++out.redraws;
  }
  std::ostringstream os;
  os << "bootstrap resample of size " << m << " kept fewer than " << opts.min_retained
     << " rows with positive coordinates after " << opts.max_attempts << " attempts";
  throw ResampleError(os.str());
}

}  // namespace

KForSize optimal_k_for_size(const Sample& rotated, std::size_t m, std::size_t b, std::uint64_t seed,
                            const BootstrapOptions& opts) {
  if (b < 1) throw UsageError("number of bootstrap resamples must be >= 1");
  if (m < 3) throw UsageError("bootstrap resample size must be >= 3");
  if (rotated.rows() < 2 || rotated.cols() < 1) throw DataError("bootstrap needs a non-empty sample");

  std::vector<ResampleCurves> results(b);
  parallel_for(b, opts.workers, [&](std::size_t i) {
    results[i] = run_resample(rotated, m, derive_seed(seed, i), opts);
  });

  KForSize out;
  out.m = m;
  out.min_retained_rows = results[0].retained;
  for (const auto& r : results) {
    out.min_retained_rows = std::min(out.min_retained_rows, r.retained);
    out.redraws += r.redraws;
  }
  // k ranges over [2, min retained - 1] so that every resample contributes to every k.
  const std::size_t len = out.min_retained_rows - 2;
  const std::size_t d = results[0].curves.size();
  out.k.resize(d);
  out.min_error.resize(d);
  std::vector<double> avg(len);
  for (std::size_t j = 0; j < d; ++j) {
    std::fill(avg.begin(), avg.end(), 0.0);
    for (const auto& r : results)
      for (std::size_t i = 0; i < len; ++i) avg[i] += r.curves[j][i];
    std::size_t best = 0;
    for (std::size_t i = 1; i < len; ++i)
      if (avg[i] < avg[best]) best = i;
    out.k[j] = best + 2;
    out.min_error[j] = avg[best] / static_cast<double>(b);
  }
  return out;
}

KSelection select_k(const Sample& rotated, const BootstrapOptions& opts) {
  if (!(opts.epsilon > 0.0 && opts.epsilon < 0.5)) {
    throw UsageError("epsilon must lie in (0, 1/2)");
  }
  if (opts.b1 < 1) throw UsageError("B1 must be >= 1");
  const std::size_t n = static_cast<std::size_t>(rotated.rows());
  const std::size_t d = static_cast<std::size_t>(rotated.cols());
  if (n < 3) throw DataError("k selection needs at least 3 rows");

  KSelection sel;
  sel.n = n;
  sel.epsilon = opts.epsilon;
  sel.b1 = opts.b1;
  sel.seed = opts.seed;
  sel.m1 = resample_size_m1(n, opts.epsilon);
  sel.m2 = resample_size_m2(sel.m1, n);

  auto fallback = [&](const std::string& reason) {
    sel.fallback = true;
    sel.k_j_m1.clear();
    sel.k_j_m2.clear();
    sel.pi_j.clear();
    sel.correction.clear();
    sel.k_raw = std::floor(std::sqrt(static_cast<double>(n)));
    sel.k_hat = std::clamp<std::size_t>(static_cast<std::size_t>(sel.k_raw), 2, n - 1);
    sel.warnings.push_back(reason + "; using k = floor(sqrt(n)) = " + std::to_string(sel.k_hat));
    return sel;
  };

  // n < 2000 / 2^d, written without division.
  const bool small = d < 11 && (n << d) < 2000;
  if (small) {
    return fallback("sample too small for the bootstrap selection (n=" + std::to_string(n) +
                    " < 2000/2^d); the bootstrap is unreliable at this size");
  }
  if (sel.m2 < opts.min_retained) {
    return fallback("second resample size m2=" + std::to_string(sel.m2) + " is below " +
                    std::to_string(opts.min_retained));
  }

  // Expected number of rows an m2 resample keeps after dropping non-positive rows.
  std::size_t positive = 0;
  for (Eigen::Index i = 0; i < rotated.rows(); ++i) positive += (rotated.row(i).array() > 0.0).all() ? 1 : 0;
  const double expected = static_cast<double>(sel.m2) * static_cast<double>(positive) / static_cast<double>(n);
  if (expected < static_cast<double>(opts.min_retained)) {
    std::ostringstream os;
    os << "an m2=" << sel.m2 << " resample is expected to keep " << expected
       << " positive rows, below " << opts.min_retained;
    return fallback(os.str());
  }

  KForSize stage1;
  KForSize stage2;
  try {
    stage1 = optimal_k_for_size(rotated, sel.m1, opts.b1, derive_seed(opts.seed, 1), opts);
    stage2 = optimal_k_for_size(rotated, sel.m2, opts.b1, derive_seed(opts.seed, 2), opts);
  } catch (const ResampleError& e) {
    return fallback(std::string("bootstrap resampling failed (") + e.what() + ")");
  }
  sel.k_j_m1 = stage1.k;
  sel.k_j_m2 = stage2.k;

  double total = 0.0;
  for (std::size_t j = 0; j < d; ++j) {
    const double pi = convergence_rate(sel.k_j_m1[j], sel.m1);
    double factor = std::pow(1.0 - 1.0 / pi, 1.0 / (2.0 * pi - 1.0));
    if (!std::isfinite(factor)) {
      sel.warnings.push_back("marginal " + std::to_string(j + 1) +
                             ": non-finite bootstrap correction factor replaced by 1");
      factor = 1.0;
    }
    sel.pi_j.push_back(pi);
    sel.correction.push_back(factor);
    const double k1 = static_cast<double>(sel.k_j_m1[j]);
    total += k1 * k1 / static_cast<double>(sel.k_j_m2[j]) * factor;
  }
  sel.k_raw = total / static_cast<double>(d);
  const double rounded = std::round(sel.k_raw);
  std::size_t k = rounded < 2.0 ? 2 : static_cast<std::size_t>(std::min(rounded, static_cast<double>(n - 1)));
  k = std::clamp<std::size_t>(k, 2, n - 1);
  if (static_cast<double>(k) != rounded) {
    std::ostringstream os;
    os << "bootstrap k=" << sel.k_raw << " clamped to " << k;
    sel.warnings.push_back(os.str());
  }
  sel.k_hat = k;
  return sel;
}

}  // namespace dmq
