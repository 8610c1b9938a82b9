#include "thinplate/slab.hpp"

#include "thinplate/parallel.hpp"

#include <Eigen/SparseCholesky>

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace thinplate {

namespace {

constexpr double kInvSqrt3 = 0.57735026918962576451;

int bit(int a, int b) { return (a >> b) & 1; }
double sgn(int a, int b) { return bit(a, b) ? 1.0 : -1.0; }

}  // namespace

Vec3 SlabGrid::reference(int node) const {
  const int i = node % mid.n1;
  const int j = (node / mid.n1) % mid.n2;
  const int k = node / (mid.n1 * mid.n2);
  return {mid.x1(i), mid.x2(j), x3(k)};
}

Vec3 SlabGrid::rest(int node) const {
  Vec3 x = reference(node);
  x[2] *= h;
  return x;
}

bool SlabGrid::clamped(int node) const {
  const int i = node % mid.n1;
  const int j = (node / mid.n1) % mid.n2;
  return mid.clamped(i, j);
}

void SlabGrid::validate() const {
  mid.validate(4);
  if (n3 < 2) throw std::invalid_argument("geometry: n3 must be at least 2");
  if (!(h > 0.0 && h < 1.0)) throw std::invalid_argument("sweep: thickness h must lie in (0, 1)");
  if (!(beta >= 4.0)) throw std::invalid_argument("sweep: beta must be >= 4");
}

DeformationField3::DeformationField3(const SlabGrid& grid, const Eigen::VectorXd& displacement)
    : disp_(displacement) {
  if (displacement.size() != 3 * grid.num_nodes())
    throw std::invalid_argument("deformation field size does not match the grid");
}

DeformationField3 DeformationField3::from_positions(const SlabGrid& grid, const std::vector<Vec3>& y) {
  if (static_cast<int>(y.size()) != grid.num_nodes())
    throw std::invalid_argument("deformation field size does not match the grid");
  DeformationField3 f(grid);
  for (int n = 0; n < grid.num_nodes(); ++n) f.set_displacement(n, y[n] - grid.rest(n));
  return f;
}

SlabProblem::SlabProblem(SlabGrid grid, DensityPtr density, Eigen::VectorXd load, Discretization3dOptions opts)
    : grid_(grid), density_(std::move(density)), load_(std::move(load)), opts_(opts) {
  grid_.validate();
  if (!density_) throw std::invalid_argument("slab problem needs a density");
  if (load_.size() != grid_.mid.num_nodes()) throw std::invalid_argument("load must be a nodal field on S");

  const MidGrid& m = grid_.mid;
  sample_load_.resize(m.num_cells());
  for (int j = 0; j + 1 < m.n2; ++j)
    for (int i = 0; i + 1 < m.n1; ++i)
      sample_load_[i + (m.n1 - 1) * j] =
          0.25 * (load_[m.node(i, j)] + load_[m.node(i + 1, j)] + load_[m.node(i, j + 1)] + load_[m.node(i + 1, j + 1)]);

  const double d1 = m.dx1(), d2 = m.dx2(), d3 = grid_.dx3();
  for (int q = 0; q < 2; ++q) {
    const double zeta = q == 0 ? -kInvSqrt3 : kInvSqrt3;
    for (int a = 0; a < 8; ++a) {
      const double vert = 1.0 + sgn(a, 2) * zeta;
      N_[q][a] = 0.125 * vert;
      B_[q][a] = Vec3(0.25 * sgn(a, 0) * vert / d1, 0.25 * sgn(a, 1) * vert / d2, 0.25 * sgn(a, 2) / (d3 * grid_.h));
    }
  }
  for (int a = 0; a < 8; ++a) {
    hourglass_modes_[0][a] = sgn(a, 0) * sgn(a, 1);
    hourglass_modes_[1][a] = sgn(a, 0) * sgn(a, 1) * sgn(a, 2);
  }
  if (opts_.hourglass)
    hourglass_scale_ = opts_.hourglass_coeff * grid_.h * grid_.h * d1 * d2 * d3 * (4.0 / 3.0) *
                       (1.0 / (d1 * d1) + 1.0 / (d2 * d2));

  free_index_.assign(3 * grid_.num_nodes(), -1);
  num_free_ = 0;
  for (int n = 0; n < grid_.num_nodes(); ++n)
    if (!grid_.clamped(n))
      for (int c = 0; c < 3; ++c) free_index_[3 * n + c] = num_free_++;
}

void SlabProblem::cell_nodes(int cell, std::array<int, 8>& nodes) const {
  const int c1 = grid_.mid.n1 - 1, c2 = grid_.mid.n2 - 1;
  const int i = cell % c1, j = (cell / c1) % c2, k = cell / (c1 * c2);
  for (int a = 0; a < 8; ++a) nodes[a] = grid_.node(i + bit(a, 0), j + bit(a, 1), k + bit(a, 2));
}

std::vector<Mat3> SlabProblem::scaled_gradient(const DeformationField3& y) const {
  std::vector<Mat3> F(grid_.num_samples());
  const Eigen::VectorXd& d = y.displacements();
  parallel_for(grid_.num_cells(), opts_.threads, [&](int cell) {
    std::array<int, 8> nodes;
    cell_nodes(cell, nodes);
    for (int q = 0; q < 2; ++q) {
      Mat3 Fq = Mat3::Identity();
      for (int a = 0; a < 8; ++a) Fq.noalias() += d.segment<3>(3 * nodes[a]) * B_[q][a].transpose();
      F[2 * cell + q] = Fq;
    }
  });
  return F;
}

std::vector<Vec3> SlabProblem::sample_positions(const DeformationField3& y) const {
  std::vector<Vec3> z(grid_.num_samples());
  const Eigen::VectorXd& d = y.displacements();
  const double off = 0.5 * grid_.dx3() * kInvSqrt3;
  parallel_for(grid_.num_cells(), opts_.threads, [&](int cell) {
    std::array<int, 8> nodes;
    cell_nodes(cell, nodes);
    const Vec3 x0 = grid_.reference(nodes[0]);
    const Vec3 centre(x0[0] + 0.5 * grid_.mid.dx1(), x0[1] + 0.5 * grid_.mid.dx2(), x0[2] + 0.5 * grid_.dx3());
    for (int q = 0; q < 2; ++q) {
      Vec3 p(centre[0], centre[1], grid_.h * (centre[2] + (q == 0 ? -off : off)));
      for (int a = 0; a < 8; ++a) p += N_[q][a] * d.segment<3>(3 * nodes[a]);
      z[2 * cell + q] = p;
    }
  });
  return z;
}

EnergyTerms3d SlabProblem::energy_terms(const DeformationField3& y) const {
  const int nc = grid_.num_cells();
  std::vector<std::array<double, 3>> per_cell(nc);
  const Eigen::VectorXd& d = y.displacements();
  const double w = grid_.sample_weight();
  const double load_scale = std::pow(grid_.h, grid_.alpha());
  parallel_for(nc, opts_.threads, [&](int cell) {
    std::array<int, 8> nodes;
    cell_nodes(cell, nodes);
    double el = 0.0, ld = 0.0;
    for (int q = 0; q < 2; ++q) {
      Mat3 F = Mat3::Identity();
      double d3 = 0.0;
      for (int a = 0; a < 8; ++a) {
        F.noalias() += d.segment<3>(3 * nodes[a]) * B_[q][a].transpose();
        d3 += N_[q][a] * d[3 * nodes[a] + 2];
      }
      el += w * eval_W(*density_, F);
      // The rest-position part of y3 integrates to zero by symmetry.
      ld -= w * load_scale * sample_load(2 * cell + q) * d3;
    }
    double hg = 0.0;
    if (hourglass_scale_ > 0.0)
      for (int m = 0; m < 2; ++m) {
        Vec3 qm = Vec3::Zero();
        for (int a = 0; a < 8; ++a) qm += (hourglass_modes_[m][a] / 8.0) * d.segment<3>(3 * nodes[a]);
        hg += 0.5 * hourglass_scale_ * qm.squaredNorm();
      }
    per_cell[cell] = {el, ld, hg};
  });
  EnergyTerms3d t;
  for (const auto& c : per_cell) {
    t.elastic += c[0];
    t.load += c[1];
    t.hourglass += c[2];
  }
  return t;
}

Eigen::VectorXd SlabProblem::load_vector() const {
  Eigen::VectorXd f = Eigen::VectorXd::Zero(3 * grid_.num_nodes());
  const double w = grid_.sample_weight() * std::pow(grid_.h, grid_.alpha());
  for (int cell = 0; cell < grid_.num_cells(); ++cell) {
    std::array<int, 8> nodes;
    cell_nodes(cell, nodes);
    for (int q = 0; q < 2; ++q)
      for (int a = 0; a < 8; ++a) f[3 * nodes[a] + 2] -= w * sample_load(2 * cell + q) * N_[q][a];
  }
  for (int n = 0; n < 3 * grid_.num_nodes(); ++n)
    if (free_index_[n] < 0) f[n] = 0.0;
  return f;
}

Eigen::VectorXd SlabProblem::gradient(const DeformationField3& y) const {
  const int nc = grid_.num_cells();
  std::vector<Eigen::Matrix<double, 24, 1>> local(nc);
  std::vector<unsigned char> bad(nc, 0);
  const Eigen::VectorXd& d = y.displacements();
  const double w = grid_.sample_weight();
  const double load_scale = std::pow(grid_.h, grid_.alpha());
  parallel_for(nc, opts_.threads, [&](int cell) {
    std::array<int, 8> nodes;
    cell_nodes(cell, nodes);
    Eigen::Matrix<double, 24, 1> g = Eigen::Matrix<double, 24, 1>::Zero();
    for (int q = 0; q < 2; ++q) {
      Mat3 F = Mat3::Identity();
      for (int a = 0; a < 8; ++a) F.noalias() += d.segment<3>(3 * nodes[a]) * B_[q][a].transpose();
      if (!(F.determinant() > 0.0)) {
        bad[cell] = 1;
        return;
      }
      const Mat3 P = density_->stress(F);
      const double gq = sample_load(2 * cell + q);
      for (int a = 0; a < 8; ++a) {
        g.segment<3>(3 * a) += w * (P * B_[q][a]);
        g[3 * a + 2] -= w * load_scale * gq * N_[q][a];
      }
    }
    if (hourglass_scale_ > 0.0)
      for (int m = 0; m < 2; ++m) {
        Vec3 qm = Vec3::Zero();
        for (int a = 0; a < 8; ++a) qm += (hourglass_modes_[m][a] / 8.0) * d.segment<3>(3 * nodes[a]);
        for (int a = 0; a < 8; ++a) g.segment<3>(3 * a) += hourglass_scale_ * (hourglass_modes_[m][a] / 8.0) * qm;
      }
    local[cell] = g;
  });
  for (unsigned char b : bad)
    if (b) throw std::domain_error("infeasible state: det grad_h y <= 0 at some sample");

  Eigen::VectorXd grad = Eigen::VectorXd::Zero(3 * grid_.num_nodes());
  for (int cell = 0; cell < nc; ++cell) {
    std::array<int, 8> nodes;
    cell_nodes(cell, nodes);
    for (int a = 0; a < 8; ++a) grad.segment<3>(3 * nodes[a]) += local[cell].segment<3>(3 * a);
  }
  for (int n = 0; n < 3 * grid_.num_nodes(); ++n)
    if (free_index_[n] < 0) grad[n] = 0.0;
  return grad;
}

Eigen::SparseMatrix<double> SlabProblem::hessian_free(const DeformationField3& y, double eig_floor) const {
  using Local = Eigen::Matrix<double, 24, 24>;
  const int nc = grid_.num_cells();
  std::vector<Local> local(nc);
  const Eigen::VectorXd& d = y.displacements();
  const double w = grid_.sample_weight();
  parallel_for(nc, opts_.threads, [&](int cell) {
    std::array<int, 8> nodes;
    cell_nodes(cell, nodes);
    Local K = Local::Zero();
    for (int q = 0; q < 2; ++q) {
      Mat3 F = Mat3::Identity();
      for (int a = 0; a < 8; ++a) F.noalias() += d.segment<3>(3 * nodes[a]) * B_[q][a].transpose();
      Mat9 H = density_->hessian(F);
      Eigen::SelfAdjointEigenSolver<Mat9> eig(H);
      const double floor = eig_floor * std::max(std::abs(H.trace()) / 9.0, 1e-300);
      const Vec9 lam = eig.eigenvalues().cwiseMax(floor);
      H = eig.eigenvectors() * lam.asDiagonal() * eig.eigenvectors().transpose();
      // dF_ij / dd_{a,i} = B_a,j
      Eigen::Matrix<double, 9, 24> D = Eigen::Matrix<double, 9, 24>::Zero();
      for (int a = 0; a < 8; ++a)
        for (int i = 0; i < 3; ++i)
          for (int j = 0; j < 3; ++j) D(3 * i + j, 3 * a + i) = B_[q][a][j];
      K.noalias() += w * D.transpose() * H * D;
    }
    if (hourglass_scale_ > 0.0)
      for (int m = 0; m < 2; ++m)
        for (int a = 0; a < 8; ++a)
          for (int b = 0; b < 8; ++b) {
            const double c = hourglass_scale_ * hourglass_modes_[m][a] * hourglass_modes_[m][b] / 64.0;
            for (int i = 0; i < 3; ++i) K(3 * a + i, 3 * b + i) += c;
          }
    local[cell] = K;
  });

  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(static_cast<std::size_t>(nc) * 300);
  for (int cell = 0; cell < nc; ++cell) {
    std::array<int, 8> nodes;
    cell_nodes(cell, nodes);
    for (int a = 0; a < 24; ++a) {
      const int r = free_index_[3 * nodes[a / 3] + a % 3];
      if (r < 0) continue;
      for (int b = 0; b < 24; ++b) {
        const int c = free_index_[3 * nodes[b / 3] + b % 3];
        if (c < 0 || c < r) continue;
        trip.emplace_back(r, c, local[cell](a, b));
      }
    }
  }
  Eigen::SparseMatrix<double> K(num_free_, num_free_);
  K.setFromTriplets(trip.begin(), trip.end());
  return K;  // upper triangle
}

std::vector<Mat3> scaled_gradient(const DeformationField3& y, const SlabGrid& grid) {
  const SlabProblem p(grid, make_density({}), Eigen::VectorXd::Zero(grid.mid.num_nodes()));
  return p.scaled_gradient(y);
}

double energy_Jh(const DeformationField3& y, const SlabGrid& grid, const EnergyDensity& W, const Eigen::VectorXd& g,
                 const Discretization3dOptions& opts) {
  const SlabProblem p(grid, std::shared_ptr<const EnergyDensity>(&W, [](const EnergyDensity*) {}), g, opts);
  return p.energy(y);
}

Eigen::VectorXd gradient_Jh(const DeformationField3& y, const SlabGrid& grid, const EnergyDensity& W,
                            const Eigen::VectorXd& g, const Discretization3dOptions& opts) {
  const SlabProblem p(grid, std::shared_ptr<const EnergyDensity>(&W, [](const EnergyDensity*) {}), g, opts);
  return p.gradient(y);
}

namespace {

double free_norm(const Eigen::VectorXd& g) { return g.norm(); }

// Newton direction on the free dofs from the PSD-projected Hessian, with a
// diagonal shift if the factorization is not positive.
bool newton_direction(const Eigen::SparseMatrix<double>& K, const Eigen::VectorXd& rhs, Eigen::VectorXd& dir) {
  double shift = 0.0;
  double diag_max = 0.0;
  for (int k = 0; k < K.outerSize(); ++k) diag_max = std::max(diag_max, std::abs(K.coeff(k, k)));
  if (diag_max == 0.0) diag_max = 1.0;
  Eigen::SparseMatrix<double> I(K.rows(), K.cols());
  I.setIdentity();
  for (int attempt = 0; attempt < 12; ++attempt) {
    Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>, Eigen::Upper> ldlt;
    ldlt.compute(shift > 0.0 ? Eigen::SparseMatrix<double>(K + shift * I) : K);
    if (ldlt.info() == Eigen::Success && ldlt.vectorD().minCoeff() > 0.0) {
      dir = ldlt.solve(rhs);
      if (ldlt.info() == Eigen::Success && dir.allFinite()) return true;
    }
    shift = shift == 0.0 ? 1e-10 * diag_max : 10.0 * shift;
  }
  return false;
}

}  // namespace

Solve3dResult solve_stationary_3d(const SlabProblem& problem, const Solver3dOptions& opts) {
  const SlabGrid& grid = problem.grid();
  const std::vector<int>& free = problem.free_index();
  Solve3dResult res;
  res.y = DeformationField3::rest(grid);
  res.tolerance = std::max(opts.abs_tol, opts.rel_tol * problem.load_vector().norm());

  double energy = problem.energy(res.y);
  if (!std::isfinite(energy)) {
    res.status = SolveStatus::Infeasible;
    res.message = "infeasible state";
    return res;
  }
  Eigen::VectorXd grad = problem.gradient(res.y);
  res.grad_norm = free_norm(grad);
  res.grad_history.push_back(res.grad_norm);

  auto to_free = [&](const Eigen::VectorXd& full) {
    Eigen::VectorXd f(problem.num_free());
    for (std::size_t n = 0; n < free.size(); ++n)
      if (free[n] >= 0) f[free[n]] = full[n];
    return f;
  };

  while (res.grad_norm > res.tolerance) {
    if (res.iterations >= opts.max_iterations) {
      res.status = SolveStatus::MaxIterations;
      res.message = "max iterations exceeded";
      return res;
    }
    const Eigen::SparseMatrix<double> K = problem.hessian_free(res.y, opts.eig_floor);
    const Eigen::VectorXd gf = to_free(grad);
    Eigen::VectorXd dir;
    if (!newton_direction(K, -gf, dir) || gf.dot(dir) >= 0.0) dir = -gf;
    const double slope = gf.dot(dir);

    const EnergyTerms3d terms = problem.energy_terms(res.y);
    const double noise = 1e-13 * (std::abs(terms.elastic) + std::abs(terms.load) + std::abs(terms.hourglass));
    double t = 1.0;
    bool accepted = false;
    DeformationField3 trial = res.y;
    double trial_energy = 0.0;
    Eigen::VectorXd trial_grad;
    while (t >= opts.min_step) {
      trial = res.y;
      for (std::size_t n = 0; n < free.size(); ++n)
        if (free[n] >= 0) trial.displacements()[n] += t * dir[free[n]];
      trial_energy = problem.energy(trial);
      if (std::isfinite(trial_energy)) {
        if (trial_energy <= energy + opts.armijo_c * t * slope) {
          accepted = true;
        } else if (std::abs(opts.armijo_c * t * slope) < noise && trial_energy <= energy + noise) {
          // Energy differences are at round-off level: fall back on the gradient norm.
          trial_grad = problem.gradient(trial);
          accepted = free_norm(trial_grad) < res.grad_norm;
        }
      }
      if (accepted) break;
      t *= opts.backtrack;
    }
    if (!accepted) {
      res.status = SolveStatus::LineSearchStalled;
      res.message = "line search stalled";
      return res;
    }
    res.y = std::move(trial);
    energy = trial_energy;
    grad = trial_grad.size() ? trial_grad : problem.gradient(res.y);
    res.grad_norm = free_norm(grad);
    res.grad_history.push_back(res.grad_norm);
    ++res.iterations;
  }
  res.status = SolveStatus::Converged;
  res.message = "converged";
  return res;
}

namespace {

// Quintic smootherstep on [0, 1] and its derivative.
double smooth(double t) {
  if (t <= 0.0) return 0.0;
  if (t >= 1.0) return 1.0;
  return t * t * t * (t * (6.0 * t - 15.0) + 10.0);
}
double dsmooth(double t) {
  if (t <= 0.0 || t >= 1.0) return 0.0;
  return 30.0 * t * t * (t - 1.0) * (t - 1.0);
}

struct Cutoff {
  double value;
  double d1, d2;
};

Cutoff cutoff(const MidGrid& m, double z1, double z2) {
  const double d0 = 0.2 * std::min(m.L1, m.L2);
  Cutoff c{1.0, 0.0, 0.0};
  auto edge = [&](bool on, double dist, double ddist1, double ddist2) {
    if (!on) return;
    const double s = smooth(dist / d0), ds = dsmooth(dist / d0) / d0;
    c.d1 = c.d1 * s + c.value * ds * ddist1;
    c.d2 = c.d2 * s + c.value * ds * ddist2;
    c.value *= s;
  };
  edge(m.left_clamped(), z1, 1.0, 0.0);
  edge(m.right_clamped(), m.L1 - z1, -1.0, 0.0);
  edge(m.bottom_clamped(), z2, 0.0, 1.0);
  edge(m.top_clamped(), m.L2 - z2, 0.0, -1.0);
  return c;
}

}  // namespace

Vec3 TestField::value(const Vec3& z) const {
  const double f = a + b1 * std::sin(M_PI * z[0] / geometry.L1) + b2 * std::sin(M_PI * z[1] / geometry.L2) +
                   b3 * std::tanh(z[2]);
  Vec3 v = Vec3::Zero();
  v[component] = cutoff(geometry, z[0], z[1]).value * f;
  return v;
}

Mat3 TestField::gradient(const Vec3& z) const {
  const Cutoff c = cutoff(geometry, z[0], z[1]);
  const double f = a + b1 * std::sin(M_PI * z[0] / geometry.L1) + b2 * std::sin(M_PI * z[1] / geometry.L2) +
                   b3 * std::tanh(z[2]);
  const double th = std::tanh(z[2]);
  const Vec3 df(b1 * M_PI / geometry.L1 * std::cos(M_PI * z[0] / geometry.L1),
                b2 * M_PI / geometry.L2 * std::cos(M_PI * z[1] / geometry.L2), b3 * (1.0 - th * th));
  Mat3 G = Mat3::Zero();
  G.row(component) = (c.value * df + f * Vec3(c.d1, c.d2, 0.0)).transpose();
  return G;
}

double TestField::sup_bound() const { return std::abs(a) + std::abs(b1) + std::abs(b2) + std::abs(b3); }

double TestField::grad_sup_bound() const {
  const double d0 = 0.2 * std::min(geometry.L1, geometry.L2);
  const int dirs = (geometry.left_clamped() || geometry.right_clamped()) + (geometry.bottom_clamped() || geometry.top_clamped());
  const double gc = 15.0 / (8.0 * d0) * std::sqrt(static_cast<double>(dirs));
  const double gf = std::hypot(b1 * M_PI / geometry.L1, b2 * M_PI / geometry.L2, b3);
  return sup_bound() * gc + gf;
}

std::vector<TestField> default_test_fields(const MidGrid& geometry) {
  const std::array<std::array<double, 4>, 5> coeffs{{{1, 0, 0, 0}, {0, 1, 0, 0}, {0, 0, 1, 0}, {0, 0, 0, 1}, {0.5, 0.3, -0.2, 0.4}}};
  std::vector<TestField> out;
  for (int k = 0; k < 3; ++k)
    for (const auto& c : coeffs) out.push_back({k, c[0], c[1], c[2], c[3], geometry});
  return out;
}

double ball_residual(const SlabProblem& problem, const DeformationField3& y, const std::vector<TestField>& fields) {
  const SlabGrid& grid = problem.grid();
  const std::vector<Mat3> F = problem.scaled_gradient(y);
  const std::vector<Vec3> z = problem.sample_positions(y);
  std::vector<Mat3> S(F.size());
  for (std::size_t s = 0; s < F.size(); ++s) S[s] = eval_DW(problem.density(), F[s]) * F[s].transpose();
  const double w = grid.sample_weight();
  const double load_scale = std::pow(grid.h, grid.alpha());
  double worst = 0.0;
  for (const TestField& phi : fields) {
    double sum = 0.0;
    for (std::size_t s = 0; s < F.size(); ++s) {
      sum += w * (S[s].cwiseProduct(phi.gradient(z[s])).sum());
      sum -= w * load_scale * problem.sample_load(static_cast<int>(s)) * phi.value(z[s])[2];
    }
    worst = std::max(worst, std::abs(sum) / (phi.sup_bound() + phi.grad_sup_bound()));
  }
  return worst;
}

std::vector<Mat3> rotation_field(const DeformationField3& y, const SlabGrid& grid) {
  const std::vector<Mat3> F = scaled_gradient(y, grid);
  const int ncol = grid.num_columns();
  std::vector<Mat3> avg(ncol, Mat3::Zero());
  for (std::size_t s = 0; s < F.size(); ++s) avg[(s / 2) % ncol] += F[s];
  std::vector<Mat3> Rcol(ncol);
  for (int c = 0; c < ncol; ++c) Rcol[c] = nearest_rotation(avg[c] / (2.0 * (grid.n3 - 1)));
  std::vector<Mat3> R(F.size());
  for (std::size_t s = 0; s < F.size(); ++s) R[s] = Rcol[(s / 2) % ncol];
  return R;
}

std::vector<Mat3> strain_field(const DeformationField3& y, const std::vector<Mat3>& R, const SlabGrid& grid) {
  const std::vector<Mat3> F = scaled_gradient(y, grid);
  if (R.size() != F.size()) throw std::invalid_argument("rotation field size does not match the grid");
  const double eps = std::pow(grid.h, grid.alpha() - 1.0);
  std::vector<Mat3> G(F.size());
  for (std::size_t s = 0; s < F.size(); ++s) G[s] = (R[s].transpose() * F[s] - Mat3::Identity()) / eps;
  return G;
}

StrainStressFields stress_field(const std::vector<Mat3>& G, const EnergyDensity& W, const SlabGrid& grid, double gamma) {
  StrainStressFields out;
  out.G = G;
  out.gamma = gamma;
  const double eps = std::pow(grid.h, grid.alpha() - 1.0);
  const double mask_scale = std::pow(grid.h, grid.alpha() - 1.0 - gamma);
  const double w = grid.sample_weight();
  out.E.resize(G.size());
  out.chi.resize(G.size());
  double l2 = 0.0;
  for (std::size_t s = 0; s < G.size(); ++s) {
    const Mat3 F = Mat3::Identity() + eps * G[s];
    const Mat3 E = eval_DW(W, F) * F.transpose() / eps;
    out.E[s] = E;
    const double gn = G[s].norm(), en = E.norm();
    out.chi[s] = mask_scale * gn <= 1.0 ? 1 : 0;
    if (!out.chi[s]) out.bad_set_measure += w;
    const double denom = eval_W(W, F) / eps + gn;
    if (denom > 0.0) out.stress_constant = std::max(out.stress_constant, en / denom);
    out.max_asymmetry = std::max(out.max_asymmetry, (E - E.transpose()).norm() / (1.0 + en));
    l2 += w * gn * gn;
    out.stress_l1 += w * en;
  }
  out.strain_l2 = std::sqrt(l2);
  return out;
}

StrainStressFields strain_stress_diagnostics(const DeformationField3& y, const EnergyDensity& W, const SlabGrid& grid,
                                             double gamma) {
  std::vector<Mat3> R = rotation_field(y, grid);
  StrainStressFields out = stress_field(strain_field(y, R, grid), W, grid, gamma);
  out.R = std::move(R);
  return out;
}

AveragedDisplacements averaged_displacements(const DeformationField3& y, const SlabGrid& grid) {
  const MidGrid& m = grid.mid;
  const int nm = m.num_nodes();
  AveragedDisplacements out;
  out.u1 = out.u2 = out.v = out.xi1 = out.xi2 = Eigen::VectorXd::Zero(nm);
  const double su = std::pow(grid.h, -0.5 * grid.beta);
  const double sv = std::pow(grid.h, -0.5 * (grid.beta - 2.0));
  const double sx = std::pow(grid.h, -(grid.alpha() - 1.0));
  for (int k = 0; k < grid.n3; ++k) {
    const double wk = grid.dx3() * (k == 0 || k == grid.n3 - 1 ? 0.5 : 1.0);
    const double x3 = grid.x3(k);
    for (int j = 0; j < m.n2; ++j)
      for (int i = 0; i < m.n1; ++i) {
        const int n2d = m.node(i, j);
        // y3 - h x3 integrates like y3 because the trapezoid rule is exact on x3.
        const Vec3 d = y.displacement(grid.node(i, j, k));
        out.u1[n2d] += su * wk * d[0];
        out.u2[n2d] += su * wk * d[1];
        out.v[n2d] += sv * wk * d[2];
        out.xi1[n2d] += sx * wk * x3 * d[0];
        out.xi2[n2d] += sx * wk * x3 * d[1];
      }
  }
  return out;
}

}  // namespace thinplate
