#include "thinplate/mat3.hpp"

#include <stdexcept>

namespace thinplate {

Vec3 signed_singular_values(const Mat3& F) {
  Eigen::JacobiSVD<Mat3> svd(F);
  Vec3 s = svd.singularValues();
  if (F.determinant() < 0.0) s[2] = -s[2];
  return s;
}

double dist_to_SO3(const Mat3& F) {
  const Vec3 s = signed_singular_values(F);
  return (s - Vec3::Ones()).norm();
}

Mat3 nearest_rotation(const Mat3& F) {
  Eigen::JacobiSVD<Mat3> svd(F, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const Vec3 s = svd.singularValues();
  if (!(s[2] > 1e-14 * std::max(s[0], 1e-300)))
    throw std::domain_error("rotation undefined: singular matrix has no polar factor");
  const Mat3 U = svd.matrixU();
  const Mat3 V = svd.matrixV();
  Mat3 D = Mat3::Identity();
  D(2, 2) = (U * V.transpose()).determinant() < 0.0 ? -1.0 : 1.0;
  return U * D * V.transpose();
}

Mat3 random_rotation(std::mt19937_64& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Mat3 A;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) A(i, j) = normal(rng);
  Eigen::HouseholderQR<Mat3> qr(A);
  Mat3 Q = qr.householderQ();
  const Mat3 R = qr.matrixQR().triangularView<Eigen::Upper>();
  for (int j = 0; j < 3; ++j)
    if (R(j, j) < 0.0) Q.col(j) = -Q.col(j);
  if (Q.determinant() < 0.0) Q.col(0) = -Q.col(0);
  return Q;
}

}  // namespace thinplate
