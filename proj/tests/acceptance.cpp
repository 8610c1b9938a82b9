// Acceptance suite: one PASS/FAIL line per criterion, exit code 1 if any fails.

#include "oracles.hpp"
#include "thinplate/density_checks.hpp"
#include "thinplate/harness.hpp"
#include "thinplate/plate2d.hpp"
#include "thinplate/quadratic_forms.hpp"
#include "thinplate/slab.hpp"

#include <chrono>
#include <cmath>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>

using namespace thinplate;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

int failures = 0;

void criterion(int id, const std::string& title, double time_limit_s, const std::function<Outcome()>& body) {
  const auto t0 = std::chrono::steady_clock::now();
  Outcome o;
  try {
    o = body();
  } catch (const std::exception& e) {
    o = {false, std::string("exception: ") + e.what()};
  }
  const double dt = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  const bool in_time = dt < time_limit_s;
  const bool pass = o.pass && in_time;
  if (!pass) ++failures;
  std::ostringstream os;
  os << (pass ? "PASS" : "FAIL") << " criterion " << id << " (" << title << "): " << o.detail << "; " << dt << " s";
  if (!in_time) os << " exceeds " << time_limit_s << " s";
  std::cout << os.str() << std::endl;
}

std::string fmt(double x) { return format_double(x); }

std::string list(const std::vector<double>& x) {
  std::string s = "[";
  for (std::size_t k = 0; k < x.size(); ++k) s += (k ? ", " : "") + fmt(x[k]);
  return s + "]";
}

bool strictly_decreasing(const std::vector<double>& x) {
  for (std::size_t k = 1; k < x.size(); ++k)
    if (!(x[k] < x[k - 1])) return false;
  return true;
}

QuadForm2 logdet_Q2() { return compute_Q2(hessian_at_identity(*make_density({DensityKind::LogDet, 2.0}))); }

MidGrid unit_grid(int n) { return MidGrid{1.0, 1.0, n, n, Clamp::Full}; }

ExperimentConfig sweep_config(double beta) {
  ExperimentConfig c;
  c.density = {DensityKind::LogDet, 2.0};
  c.geometry = unit_grid(33);
  c.n3 = 4;
  c.profile = LoadProfile::Uniform;
  c.beta = beta;
  c.h = {0.25, 0.125, 0.0625};
  c.wall_time = false;
  return c;
}

Outcome q2_oracle() {
  const double mu = 1.0, lambda = 2.0;
  auto q3 = [&](const Eigen::Matrix3d& F) {
    const double t = F.trace();
    return 2.0 * mu * (0.5 * (F + F.transpose())).squaredNorm() + lambda * t * t;
  };
  const QuadForm2 Q2 = compute_Q2(Tensor4::isotropic(mu, lambda));
  const double lambda2 = 2.0 * mu * lambda / (2.0 * mu + lambda);
  double brute = 0.0, closed = 0.0;
  for (int a = 0; a < 3; ++a) {
    QuadForm2::Coords e = QuadForm2::Coords::Zero();
    e[a] = 1.0;
    const Eigen::Matrix2d G = QuadForm2::from_coords(e);
    brute = std::max(brute, std::abs(Q2(G) - oracle::brute_force_relaxation(q3, G)));
    const Eigen::Matrix2d S = 0.5 * (G + G.transpose());
    closed = std::max(closed, std::abs(Q2(G) - (2.0 * mu * S.squaredNorm() + lambda2 * G.trace() * G.trace())));
  }
  return {brute <= 1e-9 && closed <= 1e-9, "max deviation from brute force " + fmt(brute) + ", from closed form " + fmt(closed)};
}

Outcome density_suite() {
  bool pass = true;
  std::string detail;
  for (DensityKind k : {DensityKind::LogDet, DensityKind::InvDet}) {
    const DensityPtr W = make_density({k, 2.0});
    for (const CheckRecord& r : run_density_suite(*W, 2024)) {
      pass = pass && r.pass;
      detail += (detail.empty() ? "" : ", ") + W->name() + " " + r.check + " " + fmt(r.statistic) + (r.pass ? "" : " (fail)");
    }
  }
  return {pass, detail};
}

Outcome gradient_checks() {
  SlabGrid g;
  g.mid = unit_grid(16);
  g.n3 = 4;
  g.h = 0.125;
  g.beta = 4.0;
  Eigen::VectorXd load(g.mid.num_nodes());
  for (int n = 0; n < load.size(); ++n) load[n] = 1.0 + 0.5 * std::sin(3.0 * n);
  const SlabProblem p3(g, make_density({DensityKind::LogDet, 2.0}), load);
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(-0.05, 0.05);
  DeformationField3 y(g);
  for (int n = 0; n < g.num_nodes(); ++n)
    if (!g.clamped(n)) y.set_displacement(n, Vec3(u(rng), u(rng), u(rng)) * g.h);
  const Eigen::VectorXd fd3 = oracle::fd_gradient(
      [&](const Eigen::VectorXd& d) { return p3.energy(DeformationField3(g, d)); }, y.displacements(), 1e-6);
  Eigen::VectorXd fd3_free = fd3;
  for (int k = 0; k < fd3.size(); ++k)
    if (g.clamped(k / 3)) fd3_free[k] = 0.0;
  const double e3 = (p3.gradient(y) - fd3_free).norm() / fd3_free.norm();

  const MidGrid m = unit_grid(33);
  Eigen::VectorXd g2(m.num_nodes());
  for (int n = 0; n < g2.size(); ++n) g2[n] = 3.0 + std::cos(2.0 * n);
  const VonKarmanProblem p2(m, logdet_Q2(), g2);
  PlateState2 s = PlateState2::zero(m);
  for (int j = 0; j < m.n2; ++j)
    for (int i = 0; i < m.n1; ++i)
      if (!m.clamped(i, j)) {
        const int n = m.node(i, j);
        s.u1[n] = u(rng);
        s.u2[n] = u(rng);
        s.v[n] = 2.0 * u(rng);
      }
  const Eigen::VectorXd fd2 = oracle::fd_gradient(
      [&](const Eigen::VectorXd& q) { return p2.energy(PlateState2::unpack(q)); }, s.pack(), 1e-6);
  Eigen::VectorXd fd2_free = fd2;
  for (int k = 0; k < fd2.size(); ++k)
    if (p2.free_index()[k] < 0) fd2_free[k] = 0.0;
  const double e2 = (p2.gradient(s) - fd2_free).norm() / fd2_free.norm();
  return {e3 <= 1e-6 && e2 <= 1e-6, "3D relative error " + fmt(e3) + " on 16x16x4, 2D relative error " + fmt(e2) + " on 33x33"};
}

Outcome trivial_equilibrium() {
  const MidGrid m = unit_grid(17);
  const QuadForm2 Q2 = logdet_Q2();
  const Eigen::VectorXd zero = Eigen::VectorXd::Zero(m.num_nodes());
  const SolveVkResult vk = solve_vk(m, Q2, zero);
  const SolveLinearResult lin = solve_linear(m, Q2, zero);
  SlabGrid g;
  g.mid = m;
  g.n3 = 4;
  g.h = 0.125;
  const SlabProblem p(g, make_density({DensityKind::LogDet, 2.0}), zero);
  const Solve3dResult s3 = solve_stationary_3d(p);

  ExperimentConfig c = sweep_config(4.0);
  c.geometry = m;
  c.amplitude = 0.0;
  const ConvergenceReport rep = run_convergence(c);
  double errors = 0.0;
  int iterations = vk.iterations + s3.iterations + rep.reference.iterations;
  for (const auto& row : rep.rows) {
    errors += row.err_u_l2 + row.err_v_l2 + row.err_grad_v_l2 + row.ball_residual + row.bad_set_measure + row.u_l2 + row.v_l2;
    iterations += row.iterations;
  }
  const double states = vk.state.pack().norm() + lin.v.norm() + s3.y.displacements().norm();
  const bool pass = vk.ok() && s3.ok() && iterations == 0 && states == 0.0 && errors == 0.0;
  return {pass, "iterations " + std::to_string(iterations) + ", state norms " + fmt(states) + ", reported errors " + fmt(errors)};
}

Outcome manufactured_plate() {
  const QuadForm2 Q2 = logdet_Q2();
  std::vector<double> hs, errs;
  for (int n : {17, 33, 65}) {
    const MidGrid g = unit_grid(n);
    Eigen::VectorXd load(g.num_nodes()), exact(g.num_nodes());
    for (int j = 0; j < n; ++j)
      for (int i = 0; i < n; ++i) {
        load[g.node(i, j)] = oracle::manufactured_load(Q2.matrix(), g.x1(i), g.x2(j));
        exact[g.node(i, j)] = oracle::Bubble::d(g.x1(i), g.x2(j), 0, 0);
      }
    hs.push_back(g.dx1());
    errs.push_back(l2_norm(g, solve_linear(g, Q2, load).v - exact));
  }
  const double slope = oracle::loglog_slope(hs, errs);
  return {slope >= 1.8, "L2 errors " + list(errs) + ", rate " + fmt(slope)};
}

Outcome vk_linear_consistency() {
  const MidGrid m = unit_grid(33);
  const QuadForm2 Q2 = logdet_Q2();
  ExperimentConfig c;
  c.geometry = m;
  c.profile = LoadProfile::Bump;
  const Eigen::VectorXd g0 = resolve_amplitude(c, Q2) * load_profile_values(c.profile, m);
  const Eigen::VectorXd vlin = solve_linear(m, Q2, g0).v;
  std::vector<double> ratio, dev;
  bool ok = true;
  for (double eps : {1.0, 0.1, 0.01}) {
    const SolveVkResult r = solve_vk(m, Q2, eps * g0);
    ok = ok && r.ok();
    ratio.push_back(std::hypot(l2_norm(m, r.state.u1), l2_norm(m, r.state.u2)) / l2_norm(m, r.state.v));
    dev.push_back(l2_norm(m, r.state.v / eps - vlin) / l2_norm(m, vlin));
  }
  return {ok && strictly_decreasing(ratio) && strictly_decreasing(dev),
          "|u|/|v| " + list(ratio) + ", |v/eps - v_lin|/|v_lin| " + list(dev)};
}

std::vector<double> column(const ConvergenceReport& r, double ConvergenceRow::*field) {
  std::vector<double> out;
  for (const auto& row : r.rows) out.push_back(row.*field);
  return out;
}

Outcome vk_sweep(const ConvergenceReport& r) {
  const auto scaled = column(r, &ConvergenceRow::w_energy_scaled);
  const auto err = column(r, &ConvergenceRow::err_v_l2);
  const auto ball = column(r, &ConvergenceRow::ball_residual);
  const auto bad = column(r, &ConvergenceRow::bad_set_measure);
  const auto asym = column(r, &ConvergenceRow::max_asymmetry);
  bool converged = r.reference.status == "converged", a = true, c = true, d = true, e = true;
  for (std::size_t k = 0; k < r.rows.size(); ++k) {
    converged = converged && r.rows[k].ok();
    a = a && scaled[k] <= 10.0 * scaled.front();
    c = c && ball[k] <= 1e-3;
    d = d && asym[k] <= 1e-10;
    if (k) e = e && bad[k] <= bad[k - 1];
  }
  const bool b = strictly_decreasing(err);
  auto flag = [](bool x) { return x ? "ok" : "violated"; };
  std::ostringstream os;
  os << "W/h^4 " << list(scaled) << " (a " << flag(a) << "), |v^h - v| " << list(err) << " (b " << flag(b)
     << "), ball residual " << list(ball) << " (c " << flag(c) << "), asymmetry " << list(asym) << " (d " << flag(d)
     << "), bad set " << list(bad) << " (e " << flag(e) << ")";
  return {converged && a && b && c && d && e, os.str()};
}

Outcome linear_sweep(const ConvergenceReport& r) {
  const auto u = column(r, &ConvergenceRow::u_l2);
  const auto err = column(r, &ConvergenceRow::err_v_l2);
  bool converged = true;
  for (const auto& row : r.rows) converged = converged && row.ok();
  return {converged && strictly_decreasing(u) && strictly_decreasing(err),
          "|u^h| " + list(u) + ", |v^h - v_lin| " + list(err)};
}

Outcome moment_residuals(const ConvergenceReport& r) {
  const ReferenceSolution& ref = r.reference;
  const bool pass = ref.status == "converged" && ref.membrane_residual <= 10.0 * ref.tolerance;
  return {pass, "membrane residual " + fmt(ref.membrane_residual) + " vs 10 x tolerance " + fmt(10.0 * ref.tolerance) +
                    ", bending residual " + fmt(ref.bending_residual)};
}

}  // namespace

int main() {
  criterion(1, "Q2 oracle equivalence", 1.0, q2_oracle);
  criterion(2, "density property suite", 10.0, density_suite);
  criterion(3, "discrete gradient checks", 30.0, gradient_checks);
  criterion(4, "trivial equilibrium", 60.0, trivial_equilibrium);
  criterion(5, "manufactured linear plate", 60.0, manufactured_plate);
  criterion(6, "von Karman to linear consistency", 60.0, vk_linear_consistency);

  ConvergenceReport vk1, vk4;
  criterion(7, "beta = 4 convergence", 900.0, [&] {
    vk1 = run_convergence(sweep_config(4.0), {1, nullptr});
    return vk_sweep(vk1);
  });
  criterion(8, "beta = 6 convergence", 900.0, [] { return linear_sweep(run_convergence(sweep_config(6.0), {1, nullptr})); });
  criterion(9, "moment equation residuals", 1.0, [&] { return moment_residuals(vk1); });
  criterion(10, "determinism across thread counts", 900.0, [&] {
    vk4 = run_convergence(sweep_config(4.0), {4, nullptr});
    const bool same = to_json(vk1).dump() == to_json(vk4).dump() && report_csv(vk1) == report_csv(vk4);
    return Outcome{same && !vk1.rows.empty(), same ? "threads 1 and 4 give identical reports" : "reports differ"};
  });

  std::cout << (failures ? std::to_string(failures) + " criteria failed" : std::string("all criteria passed")) << std::endl;
  return failures ? 1 : 0;
}
