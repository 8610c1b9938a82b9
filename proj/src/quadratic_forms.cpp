#include "thinplate/quadratic_forms.hpp"

#include <array>
#include <stdexcept>
#include <string>

namespace thinplate {

Tensor4 Tensor4::isotropic(double mu, double lambda) {
  Mat9 m = Mat9::Zero();
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) {
      // 2 mu |sym F|^2 = mu (F_ij F_ij + F_ij F_ji)
      m(3 * i + j, 3 * i + j) += mu;
      m(3 * i + j, 3 * j + i) += mu;
    }
  for (int i = 0; i < 3; ++i)
    for (int k = 0; k < 3; ++k) m(4 * i, 4 * k) += lambda;
  return Tensor4(m);
}

QuadForm2 QuadForm2::isotropic(double mu, double lambda2) {
  Eigen::Matrix3d m;
  m << 2 * mu + lambda2, lambda2, 0.0, lambda2, 2 * mu + lambda2, 0.0, 0.0, 0.0, 2 * mu;
  return QuadForm2(m);
}

Tensor4 hessian_at_identity(const EnergyDensity& W) { return Tensor4(W.hessian(Mat3::Identity())); }

namespace {

const std::array<const char*, 3> kRelaxedNames{"F13=F31", "F23=F32", "F33"};

std::array<Mat3, 3> relaxed_basis() {
  std::array<Mat3, 3> S;
  for (auto& s : S) s.setZero();
  S[0](0, 2) = S[0](2, 0) = 1.0;
  S[1](1, 2) = S[1](2, 1) = 1.0;
  S[2](2, 2) = 1.0;
  return S;
}

Mat3 embed(const Eigen::Matrix2d& G) {
  Mat3 F = Mat3::Zero();
  F.topLeftCorner<2, 2>() = 0.5 * (G + G.transpose());
  return F;
}

}  // namespace

Mat3 optimal_completion(const Tensor4& L, const Eigen::Matrix2d& G) {
  const auto S = relaxed_basis();
  Eigen::Matrix3d A;
  Eigen::Vector3d b;
  const Mat3 F0 = embed(G);
  for (int k = 0; k < 3; ++k) {
    b[k] = L(S[k], F0);
    for (int l = 0; l < 3; ++l) A(k, l) = L(S[k], S[l]);
  }
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> eig(A);
  const double top = std::max(std::abs(eig.eigenvalues()[2]), 1e-300);
  if (!(eig.eigenvalues()[0] > 1e-12 * top)) {
    const Eigen::Vector3d null = eig.eigenvectors().col(0);
    int worst = 0;
    null.cwiseAbs().maxCoeff(&worst);
    throw std::runtime_error(std::string("relaxation degenerate along ") + kRelaxedNames[worst]);
  }
  const Eigen::Vector3d c = -eig.eigenvectors() *
                            (eig.eigenvalues().cwiseInverse().asDiagonal() * (eig.eigenvectors().transpose() * b));
  Mat3 F = F0;
  for (int k = 0; k < 3; ++k) F += c[k] * S[k];
  return F;
}

QuadForm2 compute_Q2(const Tensor4& L) {
  std::array<Mat3, 3> completions;
  for (int a = 0; a < 3; ++a) {
    QuadForm2::Coords e = QuadForm2::Coords::Zero();
    e[a] = 1.0;
    completions[a] = optimal_completion(L, QuadForm2::from_coords(e));
  }
  Eigen::Matrix3d m;
  for (int a = 0; a < 3; ++a)
    for (int b = 0; b < 3; ++b) m(a, b) = L(completions[a], completions[b]);
  return QuadForm2(m);
}

}  // namespace thinplate
