#pragma once

#include "thinplate/geometry.hpp"
#include "thinplate/quadratic_forms.hpp"
#include "thinplate/solve_status.hpp"

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include <string>
#include <vector>

namespace thinplate {

/// Nodal in-plane displacement u = (u1, u2) and deflection v on a mid-surface
/// grid.
struct PlateState2 {
  Eigen::VectorXd u1, u2, v;

  static PlateState2 zero(const MidGrid& grid);
  /// Interleaved (u1, u2, v) per node.
  Eigen::VectorXd pack() const;
  static PlateState2 unpack(const Eigen::VectorXd& q);
  int num_nodes() const { return static_cast<int>(v.size()); }
};

/// Nodal finite-difference operators for the second derivatives of v. Ghost
/// nodes reflect v across clamped edges (v = 0 and zero normal slope there);
/// free edges use second-order one-sided stencils.
struct HessianStencil {
  Eigen::SparseMatrix<double> Dxx, Dyy, Dxy;
  explicit HessianStencil(const MidGrid& grid);
  Eigen::Matrix2d at(const Eigen::VectorXd& v, int node) const;
};

struct EnergyTerms2d {
  double membrane = 0.0;  // 1/2 int Q2(sym grad u + 1/2 grad v (x) grad v)
  double bending = 0.0;   // 1/24 int Q2(grad^2 v)
  double load = 0.0;      // - int g v
  double total() const { return membrane + bending + load; }
};

/// Discrete von Karman functional. The membrane strain uses bilinear elements
/// with 2 x 2 Gauss points; bending uses the nodal Hessian stencil with
/// trapezoidal weights. Dofs are interleaved (u1, u2, v) per node and vanish
/// on clamped nodes.
class VonKarmanProblem {
 public:
  VonKarmanProblem(MidGrid grid, QuadForm2 Q2, Eigen::VectorXd load);

  const MidGrid& grid() const { return grid_; }
  const QuadForm2& Q2() const { return Q2_; }
  const Eigen::VectorXd& load() const { return load_; }

  EnergyTerms2d energy_terms(const PlateState2& s) const;
  double energy(const PlateState2& s) const { return energy_terms(s).total(); }
  /// Exact gradient w.r.t. the interleaved dofs, zero on clamped nodes.
  Eigen::VectorXd gradient(const PlateState2& s) const;
  /// Hessian on the free dofs (upper triangle). With gauss_newton the term
  /// carrying the membrane stress times the second variation of the strain is
  /// dropped, which makes the matrix positive definite.
  Eigen::SparseMatrix<double> hessian_free(const PlateState2& s, bool gauss_newton = false) const;

  /// Bending stiffness on all nodes: 1/2 v^T K v = 1/24 sum w Q2(H v).
  const Eigen::SparseMatrix<double>& bending_matrix() const { return Kb_; }
  /// Nodal load vector w_i g_i.
  const Eigen::VectorXd& load_vector() const { return f_; }
  const HessianStencil& stencil() const { return stencil_; }
  const std::vector<int>& free_index() const { return free_index_; }
  int num_free() const { return num_free_; }

  /// Membrane strain sym grad u + 1/2 grad v (x) grad v at each Gauss point
  /// (index 4 cell + q) and the point weights.
  std::vector<Eigen::Matrix2d> membrane_strain(const PlateState2& s) const;
  double gauss_weight() const { return 0.25 * grid_.dx1() * grid_.dx2(); }

 private:
  void cell_nodes(int cell, int nodes[4]) const;

  MidGrid grid_;
  QuadForm2 Q2_;
  Eigen::VectorXd load_;
  Eigen::VectorXd f_;
  HessianStencil stencil_;
  Eigen::SparseMatrix<double> Kb_;
  // Bilinear shape gradients of the 4 cell nodes at the 4 Gauss points.
  Eigen::Vector2d dN_[4][4];
  std::vector<int> free_index_;
  int num_free_ = 0;
};

double energy_vk(const PlateState2& s, const MidGrid& grid, const QuadForm2& Q2, const Eigen::VectorXd& g);

struct Solver2dOptions {
  /// Stop when |grad| <= max(abs_tol, rel_tol * |load vector|).
  double abs_tol = 1e-13;
  double rel_tol = 1e-10;
  int max_iterations = 100;
  double armijo_c = 1e-4;
  double backtrack = 0.5;
  double min_step = 1e-12;
};

struct SolveVkResult {
  PlateState2 state;
  SolveStatus status = SolveStatus::Converged;
  int iterations = 0;
  double grad_norm = 0.0;
  double tolerance = 0.0;
  std::vector<double> grad_history;
  std::string message;
  bool ok() const { return status == SolveStatus::Converged; }
};

/// Newton descent from the zero state with Armijo backtracking; falls back on
/// Gauss-Newton steps when the exact Hessian is not positive definite.
SolveVkResult solve_vk(const MidGrid& grid, const QuadForm2& Q2, const Eigen::VectorXd& g,
                       const Solver2dOptions& opts = {});

struct SolveLinearResult {
  Eigen::VectorXd v;
  double rel_residual = 0.0;
};

/// Minimizer of 1/24 int Q2(grad^2 v) - int g v with v = 0 and zero slope on
/// Gamma, by a sparse Cholesky solve. Throws std::runtime_error("singular
/// system") if the factorization fails.
SolveLinearResult solve_linear(const MidGrid& grid, const QuadForm2& Q2, const Eigen::VectorXd& g,
                               double max_rel_residual = 1e-10);

/// Zeroth and first stress moments and their equilibrium residuals.
struct StressMoments {
  std::vector<Eigen::Matrix2d> Ebar;      // nodal L2(sym grad u + 1/2 grad v (x) grad v)
  std::vector<Eigen::Matrix2d> Ehat;      // nodal -1/12 L2 grad^2 v
  std::vector<Eigen::Matrix2d> Ebar_gp;   // Ebar at the membrane Gauss points
  /// max over nodal psi of |int Ebar : grad psi| with psi = 0 on Gamma.
  double membrane_residual = 0.0;
  /// max over nodal phi of |int Ebar : (grad v (x) grad phi) - int Ehat : grad^2 phi - int g phi|.
  double bending_residual = 0.0;
};

StressMoments stress_moments(const PlateState2& s, const MidGrid& grid, const QuadForm2& Q2, const Eigen::VectorXd& g);

/// L2 norms on S by the trapezoidal rule.
double l2_norm(const MidGrid& grid, const Eigen::VectorXd& f);
/// |grad f|_{L2} with nodal centred differences (one-sided on the boundary).
double grad_l2_norm(const MidGrid& grid, const Eigen::VectorXd& f);

}  // namespace thinplate
