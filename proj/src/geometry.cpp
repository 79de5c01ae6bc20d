#include "dmq/geometry.hpp"

#include <cmath>
#include <sstream>
#include <string>

#include "dmq/error.hpp"

namespace dmq {

namespace {

std::string describe(const Matrix& m) {
  std::ostringstream os;
  os.precision(6);
  os << '[';
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    if (i) os << "; ";
    for (Eigen::Index j = 0; j < m.cols(); ++j) os << (j ? ", " : "") << m(i, j);
  }
  os << ']';
  return os.str();
}

void check_dim(Eigen::Index expected, Eigen::Index got, const char* what) {
  if (expected != got) {
    throw DataError(std::string(what) + ": dimension mismatch (expected " +
                    std::to_string(expected) + ", got " + std::to_string(got) + ")");
  }
}

Matrix basis_matrix(const Vector& first_column, const Vector& signs) {
  const Eigen::Index d = first_column.size();
  Matrix m = Matrix::Zero(d, d);
  m.col(0) = first_column;
  for (Eigen::Index i = 1; i < d; ++i) m(i, i) = signs[i];
  return m;
}

}  // namespace

Direction::Direction(const Vector& v) {
  if (v.size() < 2) throw InvalidDirectionError("direction must have dimension >= 2");
  if (!v.allFinite()) throw InvalidDirectionError("direction has non-finite components");
  const double norm = v.norm();
  if (!(norm > 0.0)) throw InvalidDirectionError("direction must be non-zero");
  u_ = v / norm;
  for (Eigen::Index i = 0; i < u_.size(); ++i) {
    if (std::abs(u_[i]) < kMinDirectionComponent) {
      std::ostringstream os;
      os << "invalid direction: component " << i + 1 << " is " << u_[i]
         << " after normalisation; every component must satisfy |u_i| >= "
         << kMinDirectionComponent;
      throw InvalidDirectionError(os.str());
    }
  }
}

Direction Direction::e(Eigen::Index d) { return Direction(Vector::Ones(d)); }

Direction Direction::neg_e(Eigen::Index d) { return Direction(-Vector::Ones(d)); }

QrFactors qr_positive_diag(const Matrix& m) {
  if (m.rows() != m.cols() || m.rows() == 0) {
    throw FactorizationError("QR factorisation needs a non-empty square matrix, got " +
                             std::to_string(m.rows()) + "x" + std::to_string(m.cols()));
  }
  const Vector sv = Eigen::JacobiSVD<Matrix>(m).singularValues();
  const double rcond = sv[0] > 0.0 ? sv[sv.size() - 1] / sv[0] : 0.0;
  if (!(rcond > 1e-12)) {
    throw FactorizationError("matrix is singular or nearly singular (rcond=" +
                             std::to_string(rcond) + "): " + describe(m));
  }

  const Eigen::HouseholderQR<Matrix> qr(m);
  const Eigen::Index d = m.rows();
  QrFactors out;
  out.q = qr.householderQ() * Matrix::Identity(d, d);
  out.t = qr.matrixQR().triangularView<Eigen::Upper>();
  for (Eigen::Index i = 0; i < d; ++i) {
    if (out.t(i, i) < 0.0) {
      out.t.row(i) *= -1.0;
      out.q.col(i) *= -1.0;
    }
  }
  return out;
}

RotationMatrix rotation_for(const Direction& u) {
  const Eigen::Index d = u.dim();
  Vector signs(d);
  for (Eigen::Index i = 0; i < d; ++i) signs[i] = u[i] > 0.0 ? 1.0 : -1.0;
  const Vector e = Vector::Constant(d, 1.0 / std::sqrt(static_cast<double>(d)));

  const Matrix q_e = qr_positive_diag(basis_matrix(e, Vector::Ones(d))).q;
  const Matrix q_u = qr_positive_diag(basis_matrix(u.components(), signs)).q;
  // Q_u == Q_e means R = Q_e Q_e' = I; return it exactly rather than up to rounding.
  if (q_u == q_e) return RotationMatrix(Matrix::Identity(d, d), u);
  return RotationMatrix(q_e * q_u.transpose(), u);
}

Vector rotate(const RotationMatrix& r, const Vector& x) {
  check_dim(r.dim(), x.size(), "rotate");
  return r.matrix() * x;
}

Sample rotate(const RotationMatrix& r, const Sample& points) {
  check_dim(r.dim(), points.cols(), "rotate");
  return points * r.matrix().transpose();
}

Vector unrotate(const RotationMatrix& r, const Vector& y) {
  check_dim(r.dim(), y.size(), "unrotate");
  return r.matrix().transpose() * y;
}

Sample unrotate(const RotationMatrix& r, const Sample& points) {
  check_dim(r.dim(), points.cols(), "unrotate");
  return points * r.matrix();
}

bool orthant_leq(const Vector& x, const Vector& y, const RotationMatrix& r) {
  check_dim(r.dim(), x.size(), "orthant_leq");
  check_dim(r.dim(), y.size(), "orthant_leq");
  return ((r.matrix() * (y - x)).array() >= 0.0).all();
}

bool orthant_leq(const Vector& x, const Vector& y, const Direction& u) {
  return orthant_leq(x, y, rotation_for(u));
}

bool in_oriented_orthant(const Vector& vertex, const Vector& z, const RotationMatrix& r) {
  return orthant_leq(vertex, z, r);
}

bool in_oriented_orthant(const Vector& vertex, const Vector& z, const Direction& u) {
  return orthant_leq(vertex, z, rotation_for(u));
}

}  // namespace dmq
