#pragma once

#include "thinplate/density.hpp"

#include <Eigen/Dense>

namespace thinplate {

/// Symmetric bilinear form on 3x3 matrices, as a 9x9 matrix on row-major
/// vectorizations. Used for L = D^2W(Id) and Q3(F) = L F : F.
class Tensor4 {
 public:
  Tensor4() : m_(Mat9::Zero()) {}
  explicit Tensor4(const Mat9& m) : m_(0.5 * (m + m.transpose())) {}

  /// 2 mu |sym F|^2 + lambda (tr F)^2.
  static Tensor4 isotropic(double mu, double lambda);

  const Mat9& matrix() const { return m_; }
  Mat3 apply(const Mat3& F) const { return unvec(m_ * vec(F)); }
  double operator()(const Mat3& F, const Mat3& G) const { return vec(F).dot(m_ * vec(G)); }
  double quadratic(const Mat3& F) const { return (*this)(F, F); }

 private:
  Mat9 m_;
};

/// Symmetric bilinear form L2 on 2x2 matrices, stored on the orthonormal
/// coordinates (G11, G22, sqrt(2) sym G12). Only sym G is seen.
class QuadForm2 {
 public:
  using Coords = Eigen::Vector3d;

  QuadForm2() : m_(Eigen::Matrix3d::Zero()) {}
  explicit QuadForm2(const Eigen::Matrix3d& m) : m_(0.5 * (m + m.transpose())) {}

  /// 2 mu |sym G|^2 + lambda2 (tr G)^2
  static QuadForm2 isotropic(double mu, double lambda2);

  static Coords coords(const Eigen::Matrix2d& G) {
    return {G(0, 0), G(1, 1), std::sqrt(0.5) * (G(0, 1) + G(1, 0))};
  }
  static Eigen::Matrix2d from_coords(const Coords& c) {
    Eigen::Matrix2d G;
    const double off = std::sqrt(0.5) * c[2];
    G << c[0], off, off, c[1];
    return G;
  }

  const Eigen::Matrix3d& matrix() const { return m_; }
  /// L2 G as a symmetric 2x2 matrix.
  Eigen::Matrix2d apply(const Eigen::Matrix2d& G) const { return from_coords(m_ * coords(G)); }
  double operator()(const Eigen::Matrix2d& G) const {
    const Coords c = coords(G);
    return c.dot(m_ * c);
  }

 private:
  Eigen::Matrix3d m_;
};

/// L = D^2 W(Id), from the density's Hessian.
Tensor4 hessian_at_identity(const EnergyDensity& W);

/// min over F with F'' = G of Q3(F). The minimization runs over the three
/// symmetric out-of-plane entries (F13 = F31, F23 = F32, F33); throws
/// std::runtime_error("relaxation degenerate ...") when the stationarity
/// system is singular.
QuadForm2 compute_Q2(const Tensor4& L);

/// The symmetric completion F of G that attains Q2(G).
Mat3 optimal_completion(const Tensor4& L, const Eigen::Matrix2d& G);

}  // namespace thinplate
