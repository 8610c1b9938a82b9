#include "thinplate/plate2d.hpp"

#include <Eigen/SparseCholesky>

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace thinplate {

namespace {

constexpr double kInvSqrt3 = 0.57735026918962576451;
constexpr double kSqrtHalf = 0.70710678118654752440;

using Triplets = std::vector<Eigen::Triplet<double>>;

// Rows of the 1D first and second difference operators on n nodes.
struct Ops1d {
  std::vector<std::vector<std::pair<int, double>>> d1, d2;
};

Ops1d ops1d(int n, double d, bool clamp_lo, bool clamp_hi) {
  Ops1d o;
  o.d1.resize(n);
  o.d2.resize(n);
  const double i2 = 1.0 / (2.0 * d), isq = 1.0 / (d * d);
  for (int i = 1; i + 1 < n; ++i) {
    o.d1[i] = {{i - 1, -i2}, {i + 1, i2}};
    o.d2[i] = {{i - 1, isq}, {i, -2.0 * isq}, {i + 1, isq}};
  }
  // Clamped end: ghost v_{-1} = v_1.
  if (clamp_lo) {
    o.d2[0] = {{0, -2.0 * isq}, {1, 2.0 * isq}};
  } else {
    o.d1[0] = {{0, -3.0 * i2}, {1, 4.0 * i2}, {2, -i2}};
    o.d2[0] = {{0, 2.0 * isq}, {1, -5.0 * isq}, {2, 4.0 * isq}, {3, -isq}};
  }
  const int e = n - 1;
  if (clamp_hi) {
    o.d2[e] = {{e, -2.0 * isq}, {e - 1, 2.0 * isq}};
  } else {
    o.d1[e] = {{e, 3.0 * i2}, {e - 1, -4.0 * i2}, {e - 2, i2}};
    o.d2[e] = {{e, 2.0 * isq}, {e - 1, -5.0 * isq}, {e - 2, 4.0 * isq}, {e - 3, -isq}};
  }
  return o;
}

// Plain nodal first differences, one-sided on every boundary.
Ops1d gradient_ops1d(int n, double d) { return ops1d(n, d, false, false); }

Eigen::SparseMatrix<double> from_triplets(int n, const Triplets& t) {
  Eigen::SparseMatrix<double> m(n, n);
  m.setFromTriplets(t.begin(), t.end());
  return m;
}

Eigen::Matrix2d sym2(const Eigen::Matrix2d& A) { return 0.5 * (A + A.transpose()); }

bool factor_solve(const Eigen::SparseMatrix<double>& K, const Eigen::VectorXd& rhs, Eigen::VectorXd& x) {
  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>, Eigen::Upper> ldlt(K);
  if (ldlt.info() != Eigen::Success || !(ldlt.vectorD().minCoeff() > 0.0)) return false;
  x = ldlt.solve(rhs);
  return ldlt.info() == Eigen::Success && x.allFinite();
}

}  // namespace

PlateState2 PlateState2::zero(const MidGrid& grid) {
  const int n = grid.num_nodes();
  return {Eigen::VectorXd::Zero(n), Eigen::VectorXd::Zero(n), Eigen::VectorXd::Zero(n)};
}

Eigen::VectorXd PlateState2::pack() const {
  Eigen::VectorXd q(3 * num_nodes());
  for (int n = 0; n < num_nodes(); ++n) q.segment<3>(3 * n) << u1[n], u2[n], v[n];
  return q;
}

PlateState2 PlateState2::unpack(const Eigen::VectorXd& q) {
  const int n = static_cast<int>(q.size() / 3);
  PlateState2 s{Eigen::VectorXd(n), Eigen::VectorXd(n), Eigen::VectorXd(n)};
  for (int k = 0; k < n; ++k) {
    s.u1[k] = q[3 * k];
    s.u2[k] = q[3 * k + 1];
    s.v[k] = q[3 * k + 2];
  }
  return s;
}

HessianStencil::HessianStencil(const MidGrid& g) {
  const Ops1d ox = ops1d(g.n1, g.dx1(), g.left_clamped(), g.right_clamped());
  const Ops1d oy = ops1d(g.n2, g.dx2(), g.bottom_clamped(), g.top_clamped());
  Triplets txx, tyy, txy;
  for (int j = 0; j < g.n2; ++j)
    for (int i = 0; i < g.n1; ++i) {
      const int r = g.node(i, j);
      for (auto [c, w] : ox.d2[i]) txx.emplace_back(r, g.node(c, j), w);
      for (auto [c, w] : oy.d2[j]) tyy.emplace_back(r, g.node(i, c), w);
      for (auto [cy, wy] : oy.d1[j])
        for (auto [cx, wx] : ox.d1[i]) txy.emplace_back(r, g.node(cx, cy), wx * wy);
    }
  Dxx = from_triplets(g.num_nodes(), txx);
  Dyy = from_triplets(g.num_nodes(), tyy);
  Dxy = from_triplets(g.num_nodes(), txy);
}

Eigen::Matrix2d HessianStencil::at(const Eigen::VectorXd& v, int node) const {
  const double xx = Dxx.row(node).dot(v.transpose());
  const double yy = Dyy.row(node).dot(v.transpose());
  const double xy = Dxy.row(node).dot(v.transpose());
  Eigen::Matrix2d H;
  H << xx, xy, xy, yy;
  return H;
}

VonKarmanProblem::VonKarmanProblem(MidGrid grid, QuadForm2 Q2, Eigen::VectorXd load)
    : grid_(grid), Q2_(Q2), load_(std::move(load)), stencil_(grid_) {
  grid_.validate(4);
  const int nn = grid_.num_nodes();
  if (load_.size() != nn) throw std::invalid_argument("load must be a nodal field on S");

  f_.resize(nn);
  Eigen::VectorXd w(nn);
  for (int j = 0; j < grid_.n2; ++j)
    for (int i = 0; i < grid_.n1; ++i) {
      w[grid_.node(i, j)] = grid_.weight(i, j);
      f_[grid_.node(i, j)] = grid_.weight(i, j) * load_[grid_.node(i, j)];
    }

  const Eigen::SparseMatrix<double> C[3] = {stencil_.Dxx, stencil_.Dyy, std::sqrt(2.0) * stencil_.Dxy};
  const Eigen::Matrix3d& M = Q2_.matrix();
  Eigen::SparseMatrix<double> K(nn, nn);
  for (int a = 0; a < 3; ++a)
    for (int b = 0; b < 3; ++b)
      if (M(a, b) != 0.0) K += Eigen::SparseMatrix<double>((M(a, b) / 12.0) * C[a].transpose() * w.asDiagonal() * C[b]);
  Kb_ = Eigen::SparseMatrix<double>(0.5 * (K + Eigen::SparseMatrix<double>(K.transpose())));

  const double d1 = grid_.dx1(), d2 = grid_.dx2();
  for (int q = 0; q < 4; ++q) {
    const double xi = (q & 1) ? kInvSqrt3 : -kInvSqrt3;
    const double eta = (q & 2) ? kInvSqrt3 : -kInvSqrt3;
    for (int a = 0; a < 4; ++a) {
      const double sx = (a & 1) ? 1.0 : -1.0, sy = (a & 2) ? 1.0 : -1.0;
      dN_[q][a] = Eigen::Vector2d(sx * (1.0 + sy * eta) / (2.0 * d1), sy * (1.0 + sx * xi) / (2.0 * d2));
    }
  }

  free_index_.assign(3 * nn, -1);
  for (int j = 0; j < grid_.n2; ++j)
    for (int i = 0; i < grid_.n1; ++i)
      if (!grid_.clamped(i, j))
        for (int c = 0; c < 3; ++c) free_index_[3 * grid_.node(i, j) + c] = num_free_++;
}

void VonKarmanProblem::cell_nodes(int cell, int nodes[4]) const {
  const int i = cell % (grid_.n1 - 1), j = cell / (grid_.n1 - 1);
  for (int a = 0; a < 4; ++a) nodes[a] = grid_.node(i + (a & 1), j + (a >> 1));
}

std::vector<Eigen::Matrix2d> VonKarmanProblem::membrane_strain(const PlateState2& s) const {
  std::vector<Eigen::Matrix2d> eps(4 * grid_.num_cells());
  for (int cell = 0; cell < grid_.num_cells(); ++cell) {
    int nodes[4];
    cell_nodes(cell, nodes);
    for (int q = 0; q < 4; ++q) {
      Eigen::Matrix2d Du = Eigen::Matrix2d::Zero();
      Eigen::Vector2d Dv = Eigen::Vector2d::Zero();
      for (int a = 0; a < 4; ++a) {
        Du.row(0) += s.u1[nodes[a]] * dN_[q][a].transpose();
        Du.row(1) += s.u2[nodes[a]] * dN_[q][a].transpose();
        Dv += s.v[nodes[a]] * dN_[q][a];
      }
      eps[4 * cell + q] = sym2(Du) + 0.5 * Dv * Dv.transpose();
    }
  }
  return eps;
}

EnergyTerms2d VonKarmanProblem::energy_terms(const PlateState2& s) const {
  EnergyTerms2d t;
  const double w = gauss_weight();
  for (const Eigen::Matrix2d& e : membrane_strain(s)) t.membrane += 0.5 * w * Q2_(e);
  t.bending = 0.5 * s.v.dot(Kb_ * s.v);
  t.load = -f_.dot(s.v);
  return t;
}

Eigen::VectorXd VonKarmanProblem::gradient(const PlateState2& s) const {
  const int nn = grid_.num_nodes();
  Eigen::VectorXd g = Eigen::VectorXd::Zero(3 * nn);
  const Eigen::Matrix3d& M = Q2_.matrix();
  const double w = gauss_weight();
  for (int cell = 0; cell < grid_.num_cells(); ++cell) {
    int nodes[4];
    cell_nodes(cell, nodes);
    for (int q = 0; q < 4; ++q) {
      Eigen::Matrix2d Du = Eigen::Matrix2d::Zero();
      Eigen::Vector2d Dv = Eigen::Vector2d::Zero();
      for (int a = 0; a < 4; ++a) {
        Du.row(0) += s.u1[nodes[a]] * dN_[q][a].transpose();
        Du.row(1) += s.u2[nodes[a]] * dN_[q][a].transpose();
        Dv += s.v[nodes[a]] * dN_[q][a];
      }
      const Eigen::Matrix2d S = QuadForm2::from_coords(M * QuadForm2::coords(sym2(Du) + 0.5 * Dv * Dv.transpose()));
      for (int a = 0; a < 4; ++a) {
        const Eigen::Vector2d t = w * (S * dN_[q][a]);
        g[3 * nodes[a]] += t[0];
        g[3 * nodes[a] + 1] += t[1];
        g[3 * nodes[a] + 2] += Dv.dot(t);
      }
    }
  }
  const Eigen::VectorXd gb = Kb_ * s.v - f_;
  for (int n = 0; n < nn; ++n) g[3 * n + 2] += gb[n];
  for (int k = 0; k < 3 * nn; ++k)
    if (free_index_[k] < 0) g[k] = 0.0;
  return g;
}

Eigen::SparseMatrix<double> VonKarmanProblem::hessian_free(const PlateState2& s, bool gauss_newton) const {
  const Eigen::Matrix3d& M = Q2_.matrix();
  const double w = gauss_weight();
  Triplets trip;
  trip.reserve(static_cast<std::size_t>(grid_.num_cells()) * 80 + 25 * grid_.num_nodes());
  using Local = Eigen::Matrix<double, 12, 12>;
  for (int cell = 0; cell < grid_.num_cells(); ++cell) {
    int nodes[4];
    cell_nodes(cell, nodes);
    Local K = Local::Zero();
    for (int q = 0; q < 4; ++q) {
      Eigen::Matrix2d Du = Eigen::Matrix2d::Zero();
      Eigen::Vector2d Dv = Eigen::Vector2d::Zero();
      for (int a = 0; a < 4; ++a) {
        Du.row(0) += s.u1[nodes[a]] * dN_[q][a].transpose();
        Du.row(1) += s.u2[nodes[a]] * dN_[q][a].transpose();
        Dv += s.v[nodes[a]] * dN_[q][a];
      }
      // d coords(eps) / d local dofs
      Eigen::Matrix<double, 3, 12> B = Eigen::Matrix<double, 3, 12>::Zero();
      for (int a = 0; a < 4; ++a) {
        const Eigen::Vector2d& d = dN_[q][a];
        B(0, 3 * a) = d[0];
        B(0, 3 * a + 2) = Dv[0] * d[0];
        B(1, 3 * a + 1) = d[1];
        B(1, 3 * a + 2) = Dv[1] * d[1];
        B(2, 3 * a) = kSqrtHalf * d[1];
        B(2, 3 * a + 1) = kSqrtHalf * d[0];
        B(2, 3 * a + 2) = kSqrtHalf * (Dv[1] * d[0] + Dv[0] * d[1]);
      }
      K.noalias() += w * B.transpose() * M * B;
      if (!gauss_newton) {
        const Eigen::Matrix2d S = QuadForm2::from_coords(M * QuadForm2::coords(sym2(Du) + 0.5 * Dv * Dv.transpose()));
        for (int a = 0; a < 4; ++a)
          for (int b = 0; b < 4; ++b) K(3 * a + 2, 3 * b + 2) += w * dN_[q][a].dot(S * dN_[q][b]);
      }
    }
    for (int a = 0; a < 12; ++a) {
      const int r = free_index_[3 * nodes[a / 3] + a % 3];
      if (r < 0) continue;
      for (int b = 0; b < 12; ++b) {
        const int c = free_index_[3 * nodes[b / 3] + b % 3];
        if (c >= r) trip.emplace_back(r, c, K(a, b));
      }
    }
  }
  for (int k = 0; k < Kb_.outerSize(); ++k)
    for (Eigen::SparseMatrix<double>::InnerIterator it(Kb_, k); it; ++it) {
      const int r = free_index_[3 * static_cast<int>(it.row()) + 2];
      const int c = free_index_[3 * static_cast<int>(it.col()) + 2];
      if (r >= 0 && c >= r) trip.emplace_back(r, c, it.value());
    }
  Eigen::SparseMatrix<double> H(num_free_, num_free_);
  H.setFromTriplets(trip.begin(), trip.end());
  return H;
}

double energy_vk(const PlateState2& s, const MidGrid& grid, const QuadForm2& Q2, const Eigen::VectorXd& g) {
  return VonKarmanProblem(grid, Q2, g).energy(s);
}

SolveVkResult solve_vk(const MidGrid& grid, const QuadForm2& Q2, const Eigen::VectorXd& g, const Solver2dOptions& opts) {
  const VonKarmanProblem p(grid, Q2, g);
  const std::vector<int>& free = p.free_index();
  SolveVkResult res;
  res.state = PlateState2::zero(grid);
  res.tolerance = std::max(opts.abs_tol, opts.rel_tol * p.load_vector().norm());

  Eigen::VectorXd q = res.state.pack();
  double energy = p.energy(res.state);
  Eigen::VectorXd grad = p.gradient(res.state);
  res.grad_norm = grad.norm();
  res.grad_history.push_back(res.grad_norm);

  while (res.grad_norm > res.tolerance) {
    if (res.iterations >= opts.max_iterations) {
      res.status = SolveStatus::MaxIterations;
      res.message = "max iterations exceeded";
      return res;
    }
    Eigen::VectorXd gf(p.num_free());
    for (std::size_t k = 0; k < free.size(); ++k)
      if (free[k] >= 0) gf[free[k]] = grad[k];
    Eigen::VectorXd dir;
    if (!factor_solve(p.hessian_free(res.state, false), -gf, dir) || gf.dot(dir) >= 0.0)
      if (!factor_solve(p.hessian_free(res.state, true), -gf, dir)) dir = -gf;
    const double slope = gf.dot(dir);

    const EnergyTerms2d terms = p.energy_terms(res.state);
    const double noise = 1e-13 * (std::abs(terms.membrane) + std::abs(terms.bending) + std::abs(terms.load));
    double t = 1.0;
    bool accepted = false;
    PlateState2 trial;
    double trial_energy = 0.0;
    Eigen::VectorXd trial_grad;
    while (t >= opts.min_step) {
      Eigen::VectorXd qt = q;
      for (std::size_t k = 0; k < free.size(); ++k)
        if (free[k] >= 0) qt[k] += t * dir[free[k]];
      trial = PlateState2::unpack(qt);
      trial_energy = p.energy(trial);
      if (trial_energy <= energy + opts.armijo_c * t * slope) {
        accepted = true;
      } else if (std::abs(opts.armijo_c * t * slope) < noise && trial_energy <= energy + noise) {
        // Energy differences are at round-off level: fall back on the gradient norm.
        trial_grad = p.gradient(trial);
        accepted = trial_grad.norm() < res.grad_norm;
      }
      if (accepted) {
        q = qt;
        break;
      }
      trial_grad.resize(0);
      t *= opts.backtrack;
    }
    if (!accepted) {
      res.status = SolveStatus::LineSearchStalled;
      res.message = "line search stalled";
      return res;
    }
    res.state = trial;
    energy = trial_energy;
    grad = trial_grad.size() ? trial_grad : p.gradient(res.state);
    res.grad_norm = grad.norm();
    res.grad_history.push_back(res.grad_norm);
    ++res.iterations;
  }
  res.status = SolveStatus::Converged;
  res.message = "converged";
  return res;
}

SolveLinearResult solve_linear(const MidGrid& grid, const QuadForm2& Q2, const Eigen::VectorXd& g,
                               double max_rel_residual) {
  const VonKarmanProblem p(grid, Q2, g);
  const int nn = grid.num_nodes();
  std::vector<int> idx(nn, -1);
  int nf = 0;
  for (int n = 0; n < nn; ++n)
    if (p.free_index()[3 * n + 2] >= 0) idx[n] = nf++;
  Triplets trip;
  const Eigen::SparseMatrix<double>& Kb = p.bending_matrix();
  for (int k = 0; k < Kb.outerSize(); ++k)
    for (Eigen::SparseMatrix<double>::InnerIterator it(Kb, k); it; ++it) {
      const int r = idx[it.row()], c = idx[it.col()];
      if (r >= 0 && c >= 0) trip.emplace_back(r, c, it.value());
    }
  Eigen::SparseMatrix<double> K(nf, nf);
  K.setFromTriplets(trip.begin(), trip.end());
  Eigen::VectorXd f(nf);
  for (int n = 0; n < nn; ++n)
    if (idx[n] >= 0) f[idx[n]] = p.load_vector()[n];

  SolveLinearResult res;
  res.v = Eigen::VectorXd::Zero(nn);
  if (f.norm() == 0.0) return res;
  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> ldlt(K);
  if (ldlt.info() != Eigen::Success || !(ldlt.vectorD().minCoeff() > 0.0))
    throw std::runtime_error("solve_linear: singular system");
  const Eigen::VectorXd x = ldlt.solve(f);
  res.rel_residual = (K * x - f).norm() / f.norm();
  if (!(res.rel_residual <= max_rel_residual))
    throw std::runtime_error("solve_linear: relative residual " + std::to_string(res.rel_residual) + " above tolerance");
  for (int n = 0; n < nn; ++n)
    if (idx[n] >= 0) res.v[n] = x[idx[n]];
  return res;
}

StressMoments stress_moments(const PlateState2& s, const MidGrid& grid, const QuadForm2& Q2, const Eigen::VectorXd& g) {
  const VonKarmanProblem p(grid, Q2, g);
  const int nn = grid.num_nodes();
  StressMoments m;

  const Ops1d gx = gradient_ops1d(grid.n1, grid.dx1());
  const Ops1d gy = gradient_ops1d(grid.n2, grid.dx2());
  auto dx = [&](const Eigen::VectorXd& f, int i, int j) {
    double r = 0.0;
    for (auto [c, w] : gx.d1[i]) r += w * f[grid.node(c, j)];
    return r;
  };
  auto dy = [&](const Eigen::VectorXd& f, int i, int j) {
    double r = 0.0;
    for (auto [c, w] : gy.d1[j]) r += w * f[grid.node(i, c)];
    return r;
  };
  m.Ebar.resize(nn);
  m.Ehat.resize(nn);
  for (int j = 0; j < grid.n2; ++j)
    for (int i = 0; i < grid.n1; ++i) {
      const int n = grid.node(i, j);
      Eigen::Matrix2d Du;
      Du << dx(s.u1, i, j), dy(s.u1, i, j), dx(s.u2, i, j), dy(s.u2, i, j);
      const Eigen::Vector2d Dv(dx(s.v, i, j), dy(s.v, i, j));
      m.Ebar[n] = Q2.apply(sym2(Du) + 0.5 * Dv * Dv.transpose());
      m.Ehat[n] = -Q2.apply(p.stencil().at(s.v, n)) / 12.0;
    }

  // Residuals against the nodal basis, with the quadrature of the discrete functional.
  const std::vector<Eigen::Matrix2d> eps = p.membrane_strain(s);
  m.Ebar_gp.resize(eps.size());
  for (std::size_t k = 0; k < eps.size(); ++k) m.Ebar_gp[k] = Q2.apply(eps[k]);

  Eigen::VectorXd ru = Eigen::VectorXd::Zero(2 * nn), rv = Eigen::VectorXd::Zero(nn);
  const double w = p.gauss_weight();
  const double d1 = grid.dx1(), d2 = grid.dx2();
  for (int cell = 0; cell < grid.num_cells(); ++cell) {
    const int ci = cell % (grid.n1 - 1), cj = cell / (grid.n1 - 1);
    for (int q = 0; q < 4; ++q) {
      const double xi = (q & 1) ? kInvSqrt3 : -kInvSqrt3;
      const double eta = (q & 2) ? kInvSqrt3 : -kInvSqrt3;
      Eigen::Vector2d dN[4];
      int nodes[4];
      Eigen::Vector2d Dv = Eigen::Vector2d::Zero();
      for (int a = 0; a < 4; ++a) {
        const double sx = (a & 1) ? 1.0 : -1.0, sy = (a & 2) ? 1.0 : -1.0;
        dN[a] = Eigen::Vector2d(sx * (1.0 + sy * eta) / (2.0 * d1), sy * (1.0 + sx * xi) / (2.0 * d2));
        nodes[a] = grid.node(ci + (a & 1), cj + (a >> 1));
        Dv += s.v[nodes[a]] * dN[a];
      }
      const Eigen::Matrix2d& E = m.Ebar_gp[4 * cell + q];
      for (int a = 0; a < 4; ++a) {
        const Eigen::Vector2d t = w * (E * dN[a]);
        ru.segment<2>(2 * nodes[a]) += t;
        rv[nodes[a]] += Dv.dot(t);
      }
    }
  }
  Eigen::VectorXd e11(nn), e22(nn), e12(nn);
  for (int j = 0; j < grid.n2; ++j)
    for (int i = 0; i < grid.n1; ++i) {
      const int n = grid.node(i, j);
      e11[n] = grid.weight(i, j) * m.Ehat[n](0, 0);
      e22[n] = grid.weight(i, j) * m.Ehat[n](1, 1);
      e12[n] = grid.weight(i, j) * m.Ehat[n](0, 1);
    }
  const HessianStencil& st = p.stencil();
  rv -= st.Dxx.transpose() * e11 + st.Dyy.transpose() * e22 + 2.0 * (st.Dxy.transpose() * e12);
  rv -= p.load_vector();
  for (int j = 0; j < grid.n2; ++j)
    for (int i = 0; i < grid.n1; ++i) {
      if (grid.clamped(i, j)) continue;
      const int n = grid.node(i, j);
      m.membrane_residual = std::max({m.membrane_residual, std::abs(ru[2 * n]), std::abs(ru[2 * n + 1])});
      m.bending_residual = std::max(m.bending_residual, std::abs(rv[n]));
    }
  return m;
}

double l2_norm(const MidGrid& grid, const Eigen::VectorXd& f) {
  double s = 0.0;
  for (int j = 0; j < grid.n2; ++j)
    for (int i = 0; i < grid.n1; ++i) s += grid.weight(i, j) * f[grid.node(i, j)] * f[grid.node(i, j)];
  return std::sqrt(s);
}

double grad_l2_norm(const MidGrid& grid, const Eigen::VectorXd& f) {
  const Ops1d gx = gradient_ops1d(grid.n1, grid.dx1());
  const Ops1d gy = gradient_ops1d(grid.n2, grid.dx2());
  double s = 0.0;
  for (int j = 0; j < grid.n2; ++j)
    for (int i = 0; i < grid.n1; ++i) {
      double a = 0.0, b = 0.0;
      for (auto [c, w] : gx.d1[i]) a += w * f[grid.node(c, j)];
      for (auto [c, w] : gy.d1[j]) b += w * f[grid.node(i, c)];
      s += grid.weight(i, j) * (a * a + b * b);
    }
  return std::sqrt(s);
}

}  // namespace thinplate
