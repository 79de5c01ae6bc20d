#pragma once

// Independent reference implementations used by the tests. They avoid the library's own
// code paths (no index structures, no Boost, no Householder QR).

#include <cmath>
#include <numbers>
#include <vector>

#include "dmq/evt.hpp"
#include "dmq/geometry.hpp"

namespace dmq::test {

// Rows with at least one coordinate strictly above a_j x_j + b_j.
inline std::size_t naive_union_count(const Sample& s, const TailFit& fit, const std::vector<double>& x) {
  std::size_t count = 0;
  for (Eigen::Index i = 0; i < s.rows(); ++i) {
    bool any = false;
    for (Eigen::Index j = 0; j < s.cols(); ++j) {
      const auto jj = static_cast<std::size_t>(j);
      if (s(i, j) > fit.a[jj] * x[jj] + fit.b[jj]) any = true;
    }
    if (any) ++count;
  }
  return count;
}

// Student t distribution functions with elementary closed forms.
inline double t1_cdf_closed(double t) { return 0.5 + std::atan(t) / std::numbers::pi; }

inline double t2_cdf_closed(double t) { return 0.5 + t / (2.0 * std::sqrt(2.0 + t * t)); }

inline double t4_cdf_closed(double t) {
  const double s = t / std::sqrt(4.0 + t * t);
  return 0.5 + 0.75 * s * (1.0 - s * s / 3.0);
}

// Classical Gram-Schmidt on the columns of m; columns whose leading coefficient comes out
// negative are flipped so the triangular factor has a positive diagonal.
inline Matrix gram_schmidt(const Matrix& m) {
  Matrix q = m;
  for (Eigen::Index c = 0; c < m.cols(); ++c) {
    Vector v = m.col(c);
    for (Eigen::Index p = 0; p < c; ++p) v -= q.col(p).dot(m.col(c)) * q.col(p);
    q.col(c) = v / v.norm();
  }
  return q;
}

// M = [v, sgn(v_2) e_2, ..., sgn(v_d) e_d].
inline Matrix completed_basis(const Vector& v) {
  const Eigen::Index d = v.size();
  Matrix m = Matrix::Zero(d, d);
  m.col(0) = v;
  for (Eigen::Index j = 1; j < d; ++j) m(j, j) = v[j] >= 0 ? 1.0 : -1.0;
  return m;
}

inline Matrix rotation_by_gram_schmidt(const Vector& u) {
  const Eigen::Index d = u.size();
  const Vector e = Vector::Constant(d, 1.0 / std::sqrt(static_cast<double>(d)));
  return gram_schmidt(completed_basis(e)) * gram_schmidt(completed_basis(u)).transpose();
}

// Direction of w_j = (1 + gamma_j (z_j - b_j) / a_j)_+^(1/gamma_j) for a rotated point z.
inline Vector theta_of_point(const TailFit& fit, const Vector& z) {
  Vector w(z.size());
  for (Eigen::Index j = 0; j < z.size(); ++j) {
    const auto jj = static_cast<std::size_t>(j);
    const double g = fit.gamma_marginal[jj];
    w[j] = std::pow(std::max(0.0, 1.0 + g * (z[j] - fit.b[jj]) / fit.a[jj]), 1.0 / g);
  }
  return w / w.norm();
}

}  // namespace dmq::test
