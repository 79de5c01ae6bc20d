#pragma once

#include <Eigen/Dense>

namespace dmq {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// Sample layout used throughout: one observation per row, one coordinate per column.
using Sample = Eigen::MatrixXd;

/// Smallest admissible absolute value of a direction component.
inline constexpr double kMinDirectionComponent = 1e-8;

/// Unit vector with non-null components, dimension >= 2.
///
/// The constructor normalises its argument, so any non-zero vector whose normalised
/// components all exceed kMinDirectionComponent in absolute value is accepted.
class Direction {
 public:
  explicit Direction(const Vector& v);

  /// e = (1, ..., 1)' / sqrt(d)
  static Direction e(Eigen::Index d);
  /// -e
  static Direction neg_e(Eigen::Index d);

  const Vector& components() const { return u_; }
  Eigen::Index dim() const { return u_.size(); }
  double operator[](Eigen::Index i) const { return u_[i]; }

 private:
  Vector u_;
};

/// Orthogonal d x d matrix R_u with R_u u = e.
class RotationMatrix {
 public:
  const Matrix& matrix() const { return r_; }
  const Direction& direction() const { return u_; }
  Eigen::Index dim() const { return r_.rows(); }

 private:
  RotationMatrix(Matrix r, Direction u) : r_(std::move(r)), u_(std::move(u)) {}
  friend RotationMatrix rotation_for(const Direction& u);

  Matrix r_;
  Direction u_;
};

struct QrFactors {
  Matrix q;  // orthogonal
  Matrix t;  // upper triangular, strictly positive diagonal
};

/// QR factorisation M = Q T normalised so that diag(T) > 0. Throws FactorizationError when M
/// is rank deficient (reciprocal condition number <= 1e-12).
QrFactors qr_positive_diag(const Matrix& m);

/// R_u = Q_e Q_u' where M_u = [u, sgn(u_2) e_2, ..., sgn(u_d) e_d] and M_e = [e, e_2, ..., e_d].
RotationMatrix rotation_for(const Direction& u);

/// R x for a single point.
Vector rotate(const RotationMatrix& r, const Vector& x);
/// R x_i for every row x_i of the sample.
Sample rotate(const RotationMatrix& r, const Sample& points);
/// R' y, the inverse of rotate().
Vector unrotate(const RotationMatrix& r, const Vector& y);
Sample unrotate(const RotationMatrix& r, const Sample& points);

/// x <=_u y  iff  R_u x <= R_u y componentwise.
bool orthant_leq(const Vector& x, const Vector& y, const RotationMatrix& r);
bool orthant_leq(const Vector& x, const Vector& y, const Direction& u);

/// z lies in the closed oriented orthant with the given vertex: R_u (z - vertex) >= 0.
bool in_oriented_orthant(const Vector& vertex, const Vector& z, const RotationMatrix& r);
bool in_oriented_orthant(const Vector& vertex, const Vector& z, const Direction& u);

}  // namespace dmq
