#pragma once

#include "thinplate/mat3.hpp"

#include <limits>
#include <memory>
#include <string>

namespace thinplate {

inline constexpr double infinity = std::numeric_limits<double>::infinity();

enum class DensityKind { LogDet, InvDet, SaintVenantLike, Custom };

std::string to_string(DensityKind kind);
DensityKind density_kind_from_string(const std::string& name);

/// Parameters of a built-in stored-energy density.
struct DensitySpec {
  DensityKind kind = DensityKind::LogDet;
  double p = 2.0;
  double delta = 0.5;
  bool analytic_derivatives = true;
};

/// Stored-energy density W on 3x3 matrices.
///
/// W(F) = +inf for det F <= 0 is a value, not an error. stress() and
/// hessian() are only defined on det F > 0; the base implementations are
/// central finite differences (step 1e-5 (1 + |F|) on W for the stress,
/// step 1e-4 on the stress for the Hessian), so a user density only has to
/// provide energy().
class EnergyDensity {
 public:
  virtual ~EnergyDensity() = default;

  virtual std::string name() const = 0;
  virtual DensityKind kind() const { return DensityKind::Custom; }
  virtual double exponent() const { return 0.0; }
  /// Radius of the neighbourhood of SO(3) on which W is C^2.
  virtual double smoothness_radius() const { return 0.5; }

  virtual double energy(const Mat3& F) const = 0;
  /// First Piola stress DW(F).
  virtual Mat3 stress(const Mat3& F) const;
  /// D^2 W(F) acting on row-major vectorized matrices.
  virtual Mat9 hessian(const Mat3& F) const;

  Mat3 fd_stress(const Mat3& F) const;
  Mat9 fd_hessian(const Mat3& F) const;
};

using DensityPtr = std::shared_ptr<const EnergyDensity>;

/// Builds LogDet, InvDet or SaintVenantLike from a spec. Throws
/// std::invalid_argument for p < 2, delta <= 0, or kind Custom.
DensityPtr make_density(const DensitySpec& spec);

/// W(F); +inf iff det F <= 0.
double eval_W(const EnergyDensity& W, const Mat3& F);
/// DW(F); throws std::domain_error if det F <= 0.
Mat3 eval_DW(const EnergyDensity& W, const Mat3& F);
/// D^2W(F); throws std::domain_error if det F <= 0.
Mat9 eval_D2W(const EnergyDensity& W, const Mat3& F);

}  // namespace thinplate
