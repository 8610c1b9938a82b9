#pragma once

#include "thinplate/density.hpp"
#include "thinplate/geometry.hpp"
#include "thinplate/mat3.hpp"
#include "thinplate/solve_status.hpp"

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include <array>
#include <string>
#include <vector>

namespace thinplate {

/// Rescaled slab Omega = S x (-1/2, 1/2) with a uniform node grid.
///
/// Node (i, j, k) has index i + n1 * (j + n2 * k) and sits at
/// x = (i dx1, j dx2, k / (n3 - 1) - 1/2). Each hexahedral cell carries two
/// quadrature samples at its in-plane centre and at x3 = centre -+ dx3 / (2
/// sqrt 3); sample s of cell c has index 2 c + s.
struct SlabGrid {
  MidGrid mid;
  int n3 = 4;
  double h = 0.125;
  double beta = 4.0;

  double alpha() const { return 0.5 * (beta + 2.0); }
  double dx3() const { return 1.0 / (n3 - 1); }
  double x3(int k) const { return (k - 0.5 * (n3 - 1)) / (n3 - 1); }

  int node(int i, int j, int k) const { return i + mid.n1 * (j + mid.n2 * k); }
  int num_nodes() const { return mid.n1 * mid.n2 * n3; }
  int num_cells() const { return (mid.n1 - 1) * (mid.n2 - 1) * (n3 - 1); }
  int num_samples() const { return 2 * num_cells(); }
  int num_columns() const { return mid.num_cells(); }
  /// Quadrature weight of one sample (its share of the cell volume).
  double sample_weight() const { return 0.5 * mid.dx1() * mid.dx2() * dx3(); }

  /// Rest position (x', h x3) of a node.
  Vec3 rest(int node) const;
  /// Reference coordinates (x', x3) of a node.
  Vec3 reference(int node) const;
  bool clamped(int node) const;

  void validate() const;
};

/// Nodal deformation y on a slab grid, held as the displacement y - (x', h x3)
/// from the rest state so that near-rest states keep full precision.
class DeformationField3 {
 public:
  DeformationField3() = default;
  explicit DeformationField3(const SlabGrid& grid) : disp_(Eigen::VectorXd::Zero(3 * grid.num_nodes())) {}
  DeformationField3(const SlabGrid& grid, const Eigen::VectorXd& displacement);

  static DeformationField3 rest(const SlabGrid& grid) { return DeformationField3(grid); }
  /// From absolute nodal positions y(x).
  static DeformationField3 from_positions(const SlabGrid& grid, const std::vector<Vec3>& y);

  Vec3 y(const SlabGrid& grid, int node) const { return grid.rest(node) + displacement(node); }
  Vec3 displacement(int node) const { return disp_.segment<3>(3 * node); }
  void set_displacement(int node, const Vec3& d) { disp_.segment<3>(3 * node) = d; }

  const Eigen::VectorXd& displacements() const { return disp_; }
  Eigen::VectorXd& displacements() { return disp_; }
  int num_nodes() const { return static_cast<int>(disp_.size() / 3); }

 private:
  Eigen::VectorXd disp_;
};

struct Discretization3dOptions {
  /// Penalty on the per-cell hourglass modes xi1 xi2 and xi1 xi2 xi3, which
  /// the sampled gradients do not see.
  bool hourglass = true;
  double hourglass_coeff = 0.05;
  int threads = 1;
};

struct EnergyTerms3d {
  double elastic = 0.0;    // sum of W(grad_h y) weights
  double load = 0.0;       // - int h^alpha g y3
  double hourglass = 0.0;
  double total() const { return elastic + load + hourglass; }
};

/// Discrete J^h on a slab: elastic term, normal load h^alpha g(x') e3 from a
/// nodal field g on S, and hourglass control.
class SlabProblem {
 public:
  SlabProblem(SlabGrid grid, DensityPtr density, Eigen::VectorXd load, Discretization3dOptions opts = {});

  const SlabGrid& grid() const { return grid_; }
  const EnergyDensity& density() const { return *density_; }
  const Eigen::VectorXd& load() const { return load_; }
  const Discretization3dOptions& options() const { return opts_; }
  void set_threads(int threads) { opts_.threads = threads; }

  /// Scaled gradients Id + grad_h d at every sample.
  std::vector<Mat3> scaled_gradient(const DeformationField3& y) const;
  /// Interpolated positions y(x_s) at every sample.
  std::vector<Vec3> sample_positions(const DeformationField3& y) const;
  /// g at the in-plane centre of the sample's column.
  double sample_load(int sample) const { return sample_load_[sample / 2 % grid_.num_columns()]; }

  /// Terms of the discrete energy; elastic = +inf if some sample has
  /// det grad_h y <= 0.
  EnergyTerms3d energy_terms(const DeformationField3& y) const;
  double energy(const DeformationField3& y) const { return energy_terms(y).total(); }

  /// Exact gradient of energy() w.r.t. nodal displacements, zero on clamped
  /// nodes. Throws std::domain_error("infeasible state") if the energy is
  /// infinite.
  Eigen::VectorXd gradient(const DeformationField3& y) const;
  /// Gradient of the load term alone (independent of y).
  Eigen::VectorXd load_vector() const;

  /// Per-sample PSD-projected Hessian assembled on the free degrees of
  /// freedom (see free_dofs()).
  Eigen::SparseMatrix<double> hessian_free(const DeformationField3& y, double eig_floor = 1e-8) const;
  /// Map from displacement component index to free index, -1 if clamped.
  const std::vector<int>& free_index() const { return free_index_; }
  int num_free() const { return num_free_; }

 private:
  void cell_nodes(int cell, std::array<int, 8>& nodes) const;

  SlabGrid grid_;
  DensityPtr density_;
  Eigen::VectorXd load_;
  Discretization3dOptions opts_;
  std::vector<double> sample_load_;
  // Shape gradients (in the scaled metric) and values of the 8 nodes of a cell
  // at the two samples.
  std::array<std::array<Vec3, 8>, 2> B_;
  std::array<std::array<double, 8>, 2> N_;
  std::array<std::array<double, 8>, 2> hourglass_modes_;
  double hourglass_scale_ = 0.0;
  std::vector<int> free_index_;
  int num_free_ = 0;
};

// Free-function forms of the main operations.
std::vector<Mat3> scaled_gradient(const DeformationField3& y, const SlabGrid& grid);
double energy_Jh(const DeformationField3& y, const SlabGrid& grid, const EnergyDensity& W, const Eigen::VectorXd& g,
                 const Discretization3dOptions& opts = {});
Eigen::VectorXd gradient_Jh(const DeformationField3& y, const SlabGrid& grid, const EnergyDensity& W,
                            const Eigen::VectorXd& g, const Discretization3dOptions& opts = {});

struct Solver3dOptions {
  /// Stop when |grad| <= max(abs_tol, rel_tol * |load vector|).
  double abs_tol = 1e-14;
  double rel_tol = 1e-9;
  int max_iterations = 100;
  double armijo_c = 1e-4;
  double backtrack = 0.5;
  double min_step = 1e-12;
  double eig_floor = 1e-8;
};

struct Solve3dResult {
  DeformationField3 y;  // best iterate
  SolveStatus status = SolveStatus::Converged;
  int iterations = 0;
  double grad_norm = 0.0;
  double tolerance = 0.0;
  std::vector<double> grad_history;
  std::string message;
  bool ok() const { return status == SolveStatus::Converged; }
};

/// Damped projected-Newton descent on the discrete energy from the rest state.
/// Steps that produce infinite energy are rejected by the line search.
Solve3dResult solve_stationary_3d(const SlabProblem& problem, const Solver3dOptions& opts = {});

/// Bounded C^1 test field phi(z) = c(z') f(z) e_k with a cutoff c that
/// vanishes on Gamma and equals one at distance >= 0.2 min(L1, L2) from it,
/// and f(z) = a + b1 sin(pi z1 / L1) + b2 sin(pi z2 / L2) + b3 tanh(z3).
struct TestField {
  int component = 0;
  double a = 1.0, b1 = 0.0, b2 = 0.0, b3 = 0.0;
  MidGrid geometry;

  Vec3 value(const Vec3& z) const;
  /// d phi_i / d z_j
  Mat3 gradient(const Vec3& z) const;
  /// Upper bounds on sup |phi| and sup |grad phi|.
  double sup_bound() const;
  double grad_sup_bound() const;
};

/// The default family: e_k for k = 1..3 with five coefficient sets each.
std::vector<TestField> default_test_fields(const MidGrid& geometry);

/// max over phi of |int DW(F) F^T : grad phi(y) - int h^alpha g phi3(y)|
/// / (|phi|_inf + |grad phi|_inf), with F = grad_h y at the samples.
double ball_residual(const SlabProblem& problem, const DeformationField3& y, const std::vector<TestField>& fields);

/// Per-column polar factor of the x3-averaged scaled gradient, repeated on
/// every sample of the column. Throws std::domain_error("rotation undefined")
/// for a singular average.
std::vector<Mat3> rotation_field(const DeformationField3& y, const SlabGrid& grid);

/// G = (R^T grad_h y - Id) / h^(alpha - 1) per sample.
std::vector<Mat3> strain_field(const DeformationField3& y, const std::vector<Mat3>& R, const SlabGrid& grid);

struct StrainStressFields {
  std::vector<Mat3> R, G, E;
  std::vector<unsigned char> chi;  // 1 on B_h
  double gamma = 0.0;
  double bad_set_measure = 0.0;    // |Omega \ B_h|
  double stress_constant = 0.0;    // max |E| / (W(Id + eps G) / eps + |G|)
  double max_asymmetry = 0.0;      // max |E - E^T| / (1 + |E|)
  double strain_l2 = 0.0;          // |G|_{L^2(Omega)}
  double stress_l1 = 0.0;          // |E|_{L^1(Omega)}
};

/// Default gamma = (alpha - 2) / 2.
inline double default_gamma(const SlabGrid& grid) { return 0.5 * (grid.alpha() - 2.0); }

/// E = DW(Id + eps G)(Id + eps G)^T / eps with eps = h^(alpha-1), and the mask
/// of B_h = {h^(alpha-1-gamma) |G| <= 1}.
StrainStressFields stress_field(const std::vector<Mat3>& G, const EnergyDensity& W, const SlabGrid& grid, double gamma);

/// R, G, E and mask from a deformation in one call.
StrainStressFields strain_stress_diagnostics(const DeformationField3& y, const EnergyDensity& W, const SlabGrid& grid,
                                             double gamma);

/// Averaged displacements on the mid-surface nodes.
struct AveragedDisplacements {
  Eigen::VectorXd u1, u2, v, xi1, xi2;
};
AveragedDisplacements averaged_displacements(const DeformationField3& y, const SlabGrid& grid);

}  // namespace thinplate
