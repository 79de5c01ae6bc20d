#include "dmq/evt.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "dmq/error.hpp"

namespace dmq {

namespace {

void check_k(std::size_t n, std::size_t k) {
  if (k < 1 || k + 1 > n) {
    throw UsageError("intermediate sequence k=" + std::to_string(k) +
                     " out of range [1, n-1] for n=" + std::to_string(n));
  }
}

double threshold(std::span<const double> sorted, std::size_t k) {
  const double t = sorted[sorted.size() - k - 1];
  if (!(t > 0.0)) {
    std::ostringstream os;
    os << "positivity violated: tail threshold X_{n-k:n} = " << t << " (k=" << k
       << ") is not positive; recenter data";
    throw PositivityError(os.str());
  }
  return t;
}

}  // namespace

MarginalOrderStats order_stats(const Sample& sample) {
  MarginalOrderStats out;
  out.n = static_cast<std::size_t>(sample.rows());
  out.sorted.resize(static_cast<std::size_t>(sample.cols()));
  for (Eigen::Index j = 0; j < sample.cols(); ++j) {
    auto& col = out.sorted[static_cast<std::size_t>(j)];
    col.resize(out.n);
    for (Eigen::Index i = 0; i < sample.rows(); ++i) col[static_cast<std::size_t>(i)] = sample(i, j);
    std::stable_sort(col.begin(), col.end());
  }
  return out;
}

double log_moment(std::span<const double> sorted, std::size_t k, int r) {
  if (r != 1 && r != 2) throw UsageError("log_moment order must be 1 or 2");
  const std::size_t n = sorted.size();
  check_k(n, k);
  const double log_t = std::log(threshold(sorted, k));
  double sum = 0.0;
  for (std::size_t i = 0; i < k; ++i) {
    const double s = std::log(sorted[n - 1 - i]) - log_t;
    sum += r == 1 ? s : s * s;
  }
  return sum / static_cast<double>(k);
}

double gamma_from_moments(double m1, double m2) {
  if (!(m2 > 0.0)) throw DegenerateMomentsError("degenerate moments: M2 = 0");
  const double ratio = m1 * m1 / m2;
  if (std::abs(1.0 - ratio) <= 1e-12) {
    throw DegenerateMomentsError("degenerate moments: M1^2 equals M2");
  }
  return m1 + 1.0 - 0.5 / (1.0 - ratio);
}

double gamma_moment(std::span<const double> sorted, std::size_t k) {
  return gamma_from_moments(log_moment(sorted, k, 1), log_moment(sorted, k, 2));
}

double joint_gamma(std::span<const double> gammas) {
  if (gammas.empty()) throw UsageError("joint_gamma needs at least one marginal estimate");
  return std::accumulate(gammas.begin(), gammas.end(), 0.0) / static_cast<double>(gammas.size());
}

NormSequences norm_sequences(std::span<const double> sorted, std::size_t k, double gamma_j) {
  const double m1 = log_moment(sorted, k, 1);
  if (!(m1 > 0.0)) throw DegenerateMomentsError("degenerate scale: M1 = 0");
  const double b = threshold(sorted, k);
  return {b * m1 * std::max(1.0, 1.0 - gamma_j), b};
}

TailFit fit_tails(const MarginalOrderStats& stats, std::size_t k) {
  check_k(stats.n, k);
  TailFit fit;
  fit.k = k;
  fit.n = stats.n;
  const std::size_t d = stats.dim();
  fit.gamma_marginal.resize(d);
  fit.a.resize(d);
  fit.b.resize(d);
  fit.m1.resize(d);
  for (std::size_t j = 0; j < d; ++j) {
    const std::span<const double> col(stats.sorted[j]);
    try {
      const double m1 = log_moment(col, k, 1);
      const double m2 = log_moment(col, k, 2);
      fit.m1[j] = m1;
      fit.gamma_marginal[j] = gamma_from_moments(m1, m2);
      const auto seq = norm_sequences(col, k, fit.gamma_marginal[j]);
      fit.a[j] = seq.a;
      fit.b[j] = seq.b;
    } catch (const PositivityError& e) {
      throw PositivityError("marginal " + std::to_string(j + 1) + ": " + e.what());
    } catch (const DegenerateMomentsError& e) {
      throw DegenerateMomentsError("marginal " + std::to_string(j + 1) + ": " + e.what());
    }
  }
  fit.gamma = joint_gamma(fit.gamma_marginal);
  return fit;
}

TailFit fit_tails(const Sample& rotated, std::size_t k) { return fit_tails(order_stats(rotated), k); }

std::optional<std::string> gamma_disparity_warning(const TailFit& fit) {
  if (fit.gamma_marginal.empty()) return std::nullopt;
  const auto [lo, hi] = std::minmax_element(fit.gamma_marginal.begin(), fit.gamma_marginal.end());
  if (*hi - *lo > 0.5 * fit.gamma) {
    std::ostringstream os;
    os << "marginal tail indexes disagree (min " << *lo << ", max " << *hi << ", mean "
       << fit.gamma << "); equal tail indexes are assumed";
    return os.str();
  }
  return std::nullopt;
}

void require_heavy_tails(const TailFit& fit) {
  for (std::size_t j = 0; j < fit.dim(); ++j) {
    if (!(fit.gamma_marginal[j] > 0.0)) {
      std::ostringstream os;
      os << "heavy-tail assumption violated: marginal " << j + 1 << " has gamma = "
         << fit.gamma_marginal[j] << " <= 0 at k=" << fit.k;
      throw HeavyTailError(os.str());
    }
  }
}

}  // namespace dmq
