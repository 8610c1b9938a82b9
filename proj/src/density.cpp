#include "thinplate/density.hpp"

#include <cmath>
#include <stdexcept>

namespace thinplate {

std::string to_string(DensityKind kind) {
  switch (kind) {
    case DensityKind::LogDet: return "logdet";
    case DensityKind::InvDet: return "invdet";
    case DensityKind::SaintVenantLike: return "svk";
    case DensityKind::Custom: return "custom";
  }
  return "custom";
}

DensityKind density_kind_from_string(const std::string& name) {
  if (name == "logdet") return DensityKind::LogDet;
  if (name == "invdet") return DensityKind::InvDet;
  if (name == "svk" || name == "saint-venant") return DensityKind::SaintVenantLike;
  throw std::invalid_argument("unknown density '" + name + "' (expected logdet, invdet or svk)");
}

Mat3 EnergyDensity::fd_stress(const Mat3& F) const {
  const double step = 1e-5 * (1.0 + F.norm());
  Mat3 P;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) {
      Mat3 Fp = F, Fm = F;
      Fp(i, j) += step;
      Fm(i, j) -= step;
      P(i, j) = (energy(Fp) - energy(Fm)) / (2.0 * step);
    }
  return P;
}

Mat9 EnergyDensity::fd_hessian(const Mat3& F) const {
  const double step = 1e-4;
  Mat9 H;
  for (int c = 0; c < 9; ++c) {
    Mat3 Fp = F, Fm = F;
    Fp(c / 3, c % 3) += step;
    Fm(c / 3, c % 3) -= step;
    H.col(c) = (vec(stress(Fp)) - vec(stress(Fm))) / (2.0 * step);
  }
  return 0.5 * (H + H.transpose());
}

Mat3 EnergyDensity::stress(const Mat3& F) const { return fd_stress(F); }
Mat9 EnergyDensity::hessian(const Mat3& F) const { return fd_hessian(F); }

namespace {

// Spectral data of the right stretch U = (F^T F)^{1/2}, computed from
// C - Id = D + D^T + D^T D with D = F - Id so that U - Id keeps full relative
// accuracy near the well.
struct Stretch {
  Mat3 Q;        // eigenvectors of C
  Vec3 excess;   // eigenvalues of U minus one
};

Stretch stretch_of(const Mat3& F) {
  const Mat3 D = F - Mat3::Identity();
  const Mat3 CmI = D + D.transpose() + D.transpose() * D;
  Eigen::SelfAdjointEigenSolver<Mat3> eig(CmI);
  Stretch st;
  st.Q = eig.eigenvectors();
  for (int i = 0; i < 3; ++i) {
    const double mu = std::max(eig.eigenvalues()[i], -1.0);
    st.excess[i] = mu / (std::sqrt(1.0 + mu) + 1.0);
  }
  return st;
}

// |U - Id|^2 + volumetric(log det F). The stretch part has stress 2(F - R)
// and Hessian 2(dF - dR) with dR = R hat(w),
// w = (tr U Id - U)^{-1} axial(R^T dF - dF^T R).
class UStretchDensity : public EnergyDensity {
 public:
  UStretchDensity(DensitySpec spec) : spec_(spec) {}

  DensityKind kind() const override { return spec_.kind; }
  double exponent() const override { return spec_.p; }
  double smoothness_radius() const override { return spec_.delta; }

  double energy(const Mat3& F) const override {
    const double jm1 = det_identity_plus_minus_one(F - Mat3::Identity());
    if (!(jm1 > -1.0)) return infinity;
    const Stretch st = stretch_of(F);
    return st.excess.squaredNorm() + psi(std::log1p(jm1));
  }

  Mat3 stress(const Mat3& F) const override {
    if (!spec_.analytic_derivatives) return fd_stress(F);
    const double jm1 = det_identity_plus_minus_one(F - Mat3::Identity());
    const Stretch st = stretch_of(F);
    Vec3 r;
    for (int i = 0; i < 3; ++i) r[i] = st.excess[i] / (1.0 + st.excess[i]);
    const Mat3 FmR = F * st.Q * r.asDiagonal() * st.Q.transpose();
    const Mat3 FinvT = F.inverse().transpose();
    return 2.0 * FmR + dpsi(std::log1p(jm1)) * FinvT;
  }

  Mat9 hessian(const Mat3& F) const override {
    if (!spec_.analytic_derivatives) return fd_hessian(F);
    const double jm1 = det_identity_plus_minus_one(F - Mat3::Identity());
    const double ell = std::log1p(jm1);
    const Stretch st = stretch_of(F);
    Vec3 uinv, tr_minus;
    const double trU = 3.0 + st.excess.sum();
    for (int i = 0; i < 3; ++i) {
      uinv[i] = 1.0 / (1.0 + st.excess[i]);
      tr_minus[i] = 1.0 / (trU - (1.0 + st.excess[i]));
    }
    const Mat3 R = F * st.Q * uinv.asDiagonal() * st.Q.transpose();
    const Mat3 Kinv = st.Q * tr_minus.asDiagonal() * st.Q.transpose();
    const Mat3 A = F.inverse().transpose();
    const Vec9 a = vec(A);
    const double d1 = dpsi(ell), d2 = ddpsi(ell);

    Mat9 H;
    for (int c = 0; c < 9; ++c) {
      Mat3 dF = Mat3::Zero();
      dF(c / 3, c % 3) = 1.0;
      const Vec3 w = Kinv * axial(R.transpose() * dF - dF.transpose() * R);
      const Mat3 dR = R * hat(w);
      const Mat3 dvol = -A * dF.transpose() * A;
      H.col(c) = vec(2.0 * (dF - dR) + d1 * dvol) + d2 * a[c] * a;
    }
    return 0.5 * (H + H.transpose());
  }

 protected:
  virtual double psi(double ell) const = 0;
  virtual double dpsi(double ell) const = 0;
  virtual double ddpsi(double ell) const = 0;

  DensitySpec spec_;
};

// |(F^T F)^{1/2} - Id|^2 + |log det F|^p
class LogDetDensity final : public UStretchDensity {
 public:
  using UStretchDensity::UStretchDensity;
  std::string name() const override { return "logdet"; }

 private:
  double psi(double ell) const override { return std::pow(std::abs(ell), spec_.p); }
  double dpsi(double ell) const override {
    if (ell == 0.0) return 0.0;
    return spec_.p * std::pow(std::abs(ell), spec_.p - 1.0) * (ell > 0.0 ? 1.0 : -1.0);
  }
  double ddpsi(double ell) const override {
    if (spec_.p == 2.0) return 2.0;
    if (ell == 0.0) return 0.0;
    return spec_.p * (spec_.p - 1.0) * std::pow(std::abs(ell), spec_.p - 2.0);
  }
};

// |(F^T F)^{1/2} - Id|^2 + |1/det F - 1|^p, written in ell = log det F with
// s = expm1(-ell).
class InvDetDensity final : public UStretchDensity {
 public:
  using UStretchDensity::UStretchDensity;
  std::string name() const override { return "invdet"; }

 private:
  double psi(double ell) const override { return std::pow(std::abs(std::expm1(-ell)), spec_.p); }
  double dpsi(double ell) const override {
    const double s = std::expm1(-ell);
    if (s == 0.0) return 0.0;
    return -spec_.p * std::pow(std::abs(s), spec_.p - 1.0) * (s > 0.0 ? 1.0 : -1.0) * std::exp(-ell);
  }
  double ddpsi(double ell) const override {
    const double s = std::expm1(-ell);
    const double e = std::exp(-ell);
    const double first = (spec_.p == 2.0) ? 2.0 : (s == 0.0 ? 0.0 : spec_.p * (spec_.p - 1.0) * std::pow(std::abs(s), spec_.p - 2.0));
    const double second = (s == 0.0) ? 0.0 : spec_.p * std::pow(std::abs(s), spec_.p - 1.0) * (s > 0.0 ? 1.0 : -1.0);
    return first * e * e + second * e;
  }
};

// |F^T F - Id|^2 / 4 + |log det F|^p
class SaintVenantLikeDensity final : public EnergyDensity {
 public:
  explicit SaintVenantLikeDensity(DensitySpec spec) : spec_(spec) {}
  std::string name() const override { return "svk"; }
  DensityKind kind() const override { return DensityKind::SaintVenantLike; }
  double exponent() const override { return spec_.p; }
  double smoothness_radius() const override { return spec_.delta; }

  double energy(const Mat3& F) const override {
    const Mat3 D = F - Mat3::Identity();
    const double jm1 = det_identity_plus_minus_one(D);
    if (!(jm1 > -1.0)) return infinity;
    const Mat3 E = D + D.transpose() + D.transpose() * D;
    return 0.25 * E.squaredNorm() + std::pow(std::abs(std::log1p(jm1)), spec_.p);
  }

  Mat3 stress(const Mat3& F) const override {
    if (!spec_.analytic_derivatives) return fd_stress(F);
    const Mat3 D = F - Mat3::Identity();
    const Mat3 E = D + D.transpose() + D.transpose() * D;
    const double ell = std::log1p(det_identity_plus_minus_one(D));
    return F * E + dlog(ell) * F.inverse().transpose();
  }

  Mat9 hessian(const Mat3& F) const override {
    if (!spec_.analytic_derivatives) return fd_hessian(F);
    const Mat3 D = F - Mat3::Identity();
    const Mat3 E = D + D.transpose() + D.transpose() * D;
    const double ell = std::log1p(det_identity_plus_minus_one(D));
    const Mat3 A = F.inverse().transpose();
    const Vec9 a = vec(A);
    const double d2 = spec_.p == 2.0 ? 2.0
                      : (ell == 0.0 ? 0.0 : spec_.p * (spec_.p - 1.0) * std::pow(std::abs(ell), spec_.p - 2.0));
    Mat9 H;
    for (int c = 0; c < 9; ++c) {
      Mat3 dF = Mat3::Zero();
      dF(c / 3, c % 3) = 1.0;
      const Mat3 dP = dF * E + F * (dF.transpose() * F + F.transpose() * dF) - dlog(ell) * A * dF.transpose() * A;
      H.col(c) = vec(dP) + d2 * a[c] * a;
    }
    return 0.5 * (H + H.transpose());
  }

 private:
  double dlog(double ell) const {
    if (ell == 0.0) return 0.0;
    return spec_.p * std::pow(std::abs(ell), spec_.p - 1.0) * (ell > 0.0 ? 1.0 : -1.0);
  }

  DensitySpec spec_;
};

}  // namespace

DensityPtr make_density(const DensitySpec& spec) {
  if (!(spec.p >= 2.0))
    throw std::invalid_argument("density exponent p must be >= 2 (C^2 regularity at Id)");
  if (!(spec.delta > 0.0)) throw std::invalid_argument("density smoothness radius delta must be > 0");
  switch (spec.kind) {
    case DensityKind::LogDet: return std::make_shared<LogDetDensity>(spec);
    case DensityKind::InvDet: return std::make_shared<InvDetDensity>(spec);
    case DensityKind::SaintVenantLike: return std::make_shared<SaintVenantLikeDensity>(spec);
    case DensityKind::Custom: break;
  }
  throw std::invalid_argument("custom densities are constructed directly, not from a DensitySpec");
}

double eval_W(const EnergyDensity& W, const Mat3& F) {
  if (!(F.determinant() > 0.0)) return infinity;
  return W.energy(F);
}

Mat3 eval_DW(const EnergyDensity& W, const Mat3& F) {
  if (!(F.determinant() > 0.0)) throw std::domain_error("DW undefined: det F <= 0");
  return W.stress(F);
}

Mat9 eval_D2W(const EnergyDensity& W, const Mat3& F) {
  if (!(F.determinant() > 0.0)) throw std::domain_error("D2W undefined: det F <= 0");
  return W.hessian(F);
}

}  // namespace thinplate
