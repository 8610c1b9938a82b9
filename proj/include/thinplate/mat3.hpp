#pragma once

#include <Eigen/Dense>

#include <array>
#include <random>

namespace thinplate {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;

/// Row-major vectorization of a 3x3 matrix: vec[3*i + j] = F(i, j).
using Vec9 = Eigen::Matrix<double, 9, 1>;
using Mat9 = Eigen::Matrix<double, 9, 9>;

inline Vec9 vec(const Mat3& F) {
  Vec9 v;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) v[3 * i + j] = F(i, j);
  return v;
}

inline Mat3 unvec(const Vec9& v) {
  Mat3 F;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) F(i, j) = v[3 * i + j];
  return F;
}

inline Mat3 sym(const Mat3& F) { return 0.5 * (F + F.transpose()); }
inline Mat3 skew(const Mat3& F) { return 0.5 * (F - F.transpose()); }

/// det(Id + D) - 1 without cancellation for small D.
inline double det_identity_plus_minus_one(const Mat3& D) {
  const double tr = D.trace();
  const double tr2 = (D * D).trace();
  return tr + 0.5 * (tr * tr - tr2) + D.determinant();
}

/// Singular values in decreasing order, with the smallest one negated when
/// det F < 0 (signed singular values).
Vec3 signed_singular_values(const Mat3& F);

/// dist(F, SO(3)) in the Frobenius norm.
double dist_to_SO3(const Mat3& F);

/// Nearest rotation (polar factor). Throws std::domain_error if F is
/// rank-deficient.
Mat3 nearest_rotation(const Mat3& F);

/// Axial vector w of an antisymmetric matrix: W v = w x v.
inline Vec3 axial(const Mat3& W) { return {W(2, 1), W(0, 2), W(1, 0)}; }

inline Mat3 hat(const Vec3& w) {
  Mat3 W;
  W << 0.0, -w[2], w[1], w[2], 0.0, -w[0], -w[1], w[0], 0.0;
  return W;
}

/// Random rotation from the QR factorization of a standard Gaussian matrix,
/// with column signs fixed by diag(R) > 0 and det corrected to +1.
Mat3 random_rotation(std::mt19937_64& rng);

}  // namespace thinplate
