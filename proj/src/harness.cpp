#include "thinplate/harness.hpp"

#include "thinplate/field_io.hpp"

#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <algorithm>
#include <ostream>
#include <sstream>

namespace thinplate {

const std::vector<std::string>& report_columns() {
  static const std::vector<std::string> cols = {"h",          "w_energy",      "w_energy_scaled", "err_u_l2",
                                                "err_v_l2",   "err_grad_v_l2", "ball_residual",   "bad_set_measure",
                                                "iterations", "wall_time_s",   "status"};
  return cols;
}

RateEstimate estimate_rate(const std::vector<double>& h, const std::vector<double>& error) {
  if (h.size() != error.size()) throw std::invalid_argument("estimate_rate: h and error lists differ in length");
  std::vector<double> lx, ly;
  for (std::size_t k = 0; k < h.size(); ++k)
    if (h[k] > 0.0 && error[k] > 0.0 && std::isfinite(error[k])) {
      lx.push_back(std::log(h[k]));
      ly.push_back(std::log(error[k]));
    }
  const int n = static_cast<int>(lx.size());
  if (n < 3) throw std::invalid_argument("insufficient data");
  double mx = 0, my = 0;
  for (int k = 0; k < n; ++k) {
    mx += lx[k] / n;
    my += ly[k] / n;
  }
  double sxx = 0, sxy = 0, syy = 0;
  for (int k = 0; k < n; ++k) {
    sxx += (lx[k] - mx) * (lx[k] - mx);
    sxy += (lx[k] - mx) * (ly[k] - my);
    syy += (ly[k] - my) * (ly[k] - my);
  }
  if (sxx == 0.0) throw std::invalid_argument("insufficient data");
  RateEstimate r;
  r.slope = sxy / sxx;
  r.r2 = syy > 0.0 ? sxy * sxy / (sxx * syy) : 1.0;
  r.points = n;
  return r;
}

double resolve_amplitude(const ExperimentConfig& c, const QuadForm2& Q2) {
  if (c.amplitude) return *c.amplitude;
  const MidGrid& g = c.geometry;
  const double n = l2_norm(g, solve_linear(g, Q2, load_profile_values(c.profile, g)).v);
  if (!(n > 0.0)) throw ConfigError("load.amplitude: auto needs a profile with nonzero linear response");
  return c.target_fraction * std::min(g.L1, g.L2) / n;
}

namespace {

MidGrid refined(const MidGrid& g, int r) {
  MidGrid f = g;
  f.n1 = (g.n1 - 1) * r + 1;
  f.n2 = (g.n2 - 1) * r + 1;
  return f;
}

Eigen::VectorXd inject(const Eigen::VectorXd& fine, const MidGrid& fg, const MidGrid& cg, int r) {
  Eigen::VectorXd c(cg.num_nodes());
  for (int j = 0; j < cg.n2; ++j)
    for (int i = 0; i < cg.n1; ++i) c[cg.node(i, j)] = fine[fg.node(r * i, r * j)];
  return c;
}

bool strictly_decreasing(const std::vector<double>& x) {
  for (std::size_t k = 1; k < x.size(); ++k)
    if (!(x[k] < x[k - 1])) return false;
  return true;
}

bool nonincreasing(const std::vector<double>& x) {
  for (std::size_t k = 1; k < x.size(); ++k)
    if (!(x[k] <= x[k - 1])) return false;
  return true;
}

}  // namespace

ConvergenceReport run_convergence(const ExperimentConfig& cfg, const RunOptions& opts) {
  cfg.validate();
  ConvergenceReport rep;
  rep.config = cfg;
  const DensityPtr W = make_density(cfg.density);
  const QuadForm2 Q2 = compute_Q2(hessian_at_identity(*W));
  const MidGrid& mid = cfg.geometry;
  const int r = cfg.reference_refinement;

  ReferenceSolution& ref = rep.reference;
  ref.grid = refined(mid, r);
  ref.amplitude = resolve_amplitude(cfg, Q2);
  const Eigen::VectorXd g_ref = ref.amplitude * load_profile_values(cfg.profile, ref.grid);
  if (cfg.beta == 4.0) {
    ref.model = "von-karman";
    Solver2dOptions o;
    o.abs_tol = cfg.abs_tol_2d;
    o.rel_tol = cfg.rel_tol_2d;
    o.max_iterations = cfg.max_iterations;
    o.armijo_c = cfg.armijo_c;
    o.backtrack = cfg.backtrack;
    o.min_step = cfg.min_step;
    const SolveVkResult s = solve_vk(ref.grid, Q2, g_ref, o);
    ref.state = s.state;
    ref.iterations = s.iterations;
    ref.status = to_string(s.status);
    ref.grad_norm = s.grad_norm;
    ref.tolerance = s.tolerance;
  } else {
    ref.model = "linear";
    ref.state = PlateState2::zero(ref.grid);
    ref.state.v = solve_linear(ref.grid, Q2, g_ref).v;
    ref.status = "converged";
  }
  const StressMoments mom = stress_moments(ref.state, ref.grid, Q2, g_ref);
  ref.membrane_residual = mom.membrane_residual;
  ref.bending_residual = mom.bending_residual;
  ref.u_l2 = std::hypot(l2_norm(ref.grid, ref.state.u1), l2_norm(ref.grid, ref.state.u2));
  ref.v_l2 = l2_norm(ref.grid, ref.state.v);
  if (opts.log)
    *opts.log << "reference " << ref.model << " on " << ref.grid.n1 << "x" << ref.grid.n2 << ": " << ref.status
              << ", amplitude " << format_double(ref.amplitude) << "\n";

  const Eigen::VectorXd u1 = inject(ref.state.u1, ref.grid, mid, r);
  const Eigen::VectorXd u2 = inject(ref.state.u2, ref.grid, mid, r);
  const Eigen::VectorXd v = inject(ref.state.v, ref.grid, mid, r);
  const Eigen::VectorXd g_mid = ref.amplitude * load_profile_values(cfg.profile, mid);
  const auto fields = default_test_fields(mid);

  for (double h : cfg.h) {
    ConvergenceRow row;
    row.h = h;
    const auto t0 = std::chrono::steady_clock::now();
    try {
      SlabGrid grid;
      grid.mid = mid;
      grid.n3 = cfg.n3;
      grid.h = h;
      grid.beta = cfg.beta;
      Discretization3dOptions dopt;
      dopt.hourglass = cfg.hourglass;
      dopt.hourglass_coeff = cfg.hourglass_coeff;
      dopt.threads = opts.threads;
      const SlabProblem problem(grid, W, g_mid, dopt);
      Solver3dOptions sopt;
      sopt.abs_tol = cfg.abs_tol;
      sopt.rel_tol = cfg.rel_tol;
      sopt.max_iterations = cfg.max_iterations;
      sopt.armijo_c = cfg.armijo_c;
      sopt.backtrack = cfg.backtrack;
      sopt.min_step = cfg.min_step;
      sopt.eig_floor = cfg.eig_floor;
      const Solve3dResult sol = solve_stationary_3d(problem, sopt);
      row.status = to_string(sol.status);
      row.message = sol.message;
      row.iterations = sol.iterations;
      row.grad_norm = sol.grad_norm;
      row.tolerance = sol.tolerance;

      const EnergyTerms3d e = problem.energy_terms(sol.y);
      row.w_energy = e.elastic;
      row.w_energy_scaled = e.elastic / std::pow(h, cfg.beta);
      row.total_energy = e.total();
      row.hourglass_energy = e.hourglass;

      const AveragedDisplacements av = averaged_displacements(sol.y, grid);
      row.err_u_l2 = std::hypot(l2_norm(mid, av.u1 - u1), l2_norm(mid, av.u2 - u2));
      row.err_v_l2 = l2_norm(mid, av.v - v);
      row.err_grad_v_l2 = grad_l2_norm(mid, av.v - v);
      row.u_l2 = std::hypot(l2_norm(mid, av.u1), l2_norm(mid, av.u2));
      row.v_l2 = l2_norm(mid, av.v);

      row.ball_residual = ball_residual(problem, sol.y, fields);
      const StrainStressFields d = strain_stress_diagnostics(sol.y, *W, grid, cfg.gamma_value());
      row.bad_set_measure = d.bad_set_measure;
      row.strain_l2 = d.strain_l2;
      row.stress_l1 = d.stress_l1;
      row.stress_constant = d.stress_constant;
      row.max_asymmetry = d.max_asymmetry;
      if (cfg.write_fields) {
        rep.grids.push_back(grid);
        rep.fields.push_back(sol.y);
      }
    } catch (const std::exception& ex) {
      row.status = "error";
      row.message = ex.what();
    }
    if (cfg.wall_time) row.wall_time_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (opts.log)
      *opts.log << "h = " << format_double(h) << ": " << row.status << ", " << row.iterations << " iterations, err_v "
                << format_double(row.err_v_l2) << ", ball residual " << format_double(row.ball_residual) << "\n";
    rep.rows.push_back(row);
  }

  std::vector<double> hs, eu, ev, egv, bad, scaled;
  bool all_ok = true;
  double max_ball = 0.0, max_asym = 0.0;
  for (const auto& row : rep.rows) {
    hs.push_back(row.h);
    eu.push_back(row.err_u_l2);
    ev.push_back(row.err_v_l2);
    egv.push_back(row.err_grad_v_l2);
    bad.push_back(row.bad_set_measure);
    scaled.push_back(row.w_energy_scaled);
    all_ok = all_ok && row.ok();
    max_ball = std::max(max_ball, row.ball_residual);
    max_asym = std::max(max_asym, row.max_asymmetry);
  }
  for (const auto& [name, col] : {std::pair{"err_u_l2", eu}, std::pair{"err_v_l2", ev}, std::pair{"err_grad_v_l2", egv},
                                  std::pair{"bad_set_measure", bad}}) {
    std::optional<RateEstimate> est;
    try {
      est = estimate_rate(hs, col);
    } catch (const std::invalid_argument&) {
    }
    rep.rates.emplace_back(name, est);
  }
  for (const auto& [name, col] : {std::pair{"err_u_l2", eu}, std::pair{"err_v_l2", ev}})
    if (col.size() > 1 && !strictly_decreasing(col) && *std::max_element(col.begin(), col.end()) > 0.0)
      rep.notes.push_back(std::string("possible branch mismatch: ") + name + " is not strictly decreasing in h");
  if (!all_ok) rep.notes.push_back("some thicknesses did not converge; see the status column");

  bool energy_bounded = !scaled.empty();
  for (double s : scaled) energy_bounded = energy_bounded && s <= 10.0 * scaled.front();
  rep.checks = {{"all_converged", all_ok},
                {"energy_scaling_bounded", energy_bounded},
                {"err_v_strictly_decreasing", strictly_decreasing(ev)},
                {"bad_set_nonincreasing", nonincreasing(bad)},
                {"max_ball_residual", max_ball},
                {"max_stress_asymmetry", max_asym}};
  return rep;
}

namespace {

nlohmann::json row_json(const ConvergenceRow& r) {
  return {{"h", r.h},
          {"w_energy", r.w_energy},
          {"w_energy_scaled", r.w_energy_scaled},
          {"err_u_l2", r.err_u_l2},
          {"err_v_l2", r.err_v_l2},
          {"err_grad_v_l2", r.err_grad_v_l2},
          {"ball_residual", r.ball_residual},
          {"bad_set_measure", r.bad_set_measure},
          {"iterations", r.iterations},
          {"wall_time_s", r.wall_time_s},
          {"status", r.status},
          {"u_l2", r.u_l2},
          {"v_l2", r.v_l2},
          {"total_energy", r.total_energy},
          {"hourglass_energy", r.hourglass_energy},
          {"grad_norm", r.grad_norm},
          {"tolerance", r.tolerance},
          {"strain_l2", r.strain_l2},
          {"stress_l1", r.stress_l1},
          {"stress_constant", r.stress_constant},
          {"max_asymmetry", r.max_asymmetry},
          {"message", r.message}};
}

std::string csv_value(double x) { return std::isnan(x) ? "nan" : format_double(x); }

void write_file(const std::string& path, const std::string& text) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot write " + path);
  os << text;
  if (!os) throw std::runtime_error("cannot write " + path);
}

}  // namespace

nlohmann::json to_json(const ConvergenceReport& r) {
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& row : r.rows) rows.push_back(row_json(row));
  nlohmann::json rates = nlohmann::json::object();
  for (const auto& [name, est] : r.rates)
    rates[name] = est ? nlohmann::json{{"slope", est->slope}, {"r2", est->r2}, {"points", est->points}}
                      : nlohmann::json("insufficient data");
  const ReferenceSolution& ref = r.reference;
  return {{"config", to_json(r.config)},
          {"columns", report_columns()},
          {"reference",
           {{"model", ref.model},
            {"grid", to_json(ref.grid)},
            {"amplitude", ref.amplitude},
            {"iterations", ref.iterations},
            {"status", ref.status},
            {"grad_norm", ref.grad_norm},
            {"tolerance", ref.tolerance},
            {"membrane_residual", ref.membrane_residual},
            {"bending_residual", ref.bending_residual},
            {"u_l2", ref.u_l2},
            {"v_l2", ref.v_l2}}},
          {"rows", rows},
          {"rates", rates},
          {"checks", r.checks},
          {"notes", r.notes}};
}

std::string report_csv(const ConvergenceReport& r) {
  std::ostringstream os;
  const auto& cols = report_columns();
  for (std::size_t k = 0; k < cols.size(); ++k) os << (k ? "," : "") << cols[k];
  os << "\n";
  for (const auto& row : r.rows)
    os << csv_value(row.h) << ',' << csv_value(row.w_energy) << ',' << csv_value(row.w_energy_scaled) << ','
       << csv_value(row.err_u_l2) << ',' << csv_value(row.err_v_l2) << ',' << csv_value(row.err_grad_v_l2) << ','
       << csv_value(row.ball_residual) << ',' << csv_value(row.bad_set_measure) << ',' << row.iterations << ','
       << csv_value(row.wall_time_s) << ',' << row.status << "\n";
  return os.str();
}

std::string report_plot_script(const ConvergenceReport& r, const std::string& csv_name) {
  std::ostringstream os;
  os << "# gnuplot -p " << r.config.prefix << ".gp\n"
     << "set datafile separator ','\n"
     << "set logscale xy\n"
     << "set xlabel 'h'\n"
     << "set ylabel 'L2 error'\n"
     << "set key top left\n"
     << "set title 'beta = " << format_double(r.config.beta) << ", " << r.reference.model << " reference'\n"
     << "plot '" << csv_name << "' every ::1 using 1:4 with linespoints title 'u^h - u', \\\n"
     << "     '' every ::1 using 1:5 with linespoints title 'v^h - v', \\\n"
     << "     '' every ::1 using 1:6 with linespoints title 'grad (v^h - v)'\n";
  return os.str();
}

std::vector<std::string> emit_report(const ConvergenceReport& r, const std::string& dir, const std::string& prefix,
                                     const std::string& format, bool plot_script) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw std::runtime_error("cannot write " + dir + ": " + ec.message());
  std::vector<std::string> out;
  const std::string base = (std::filesystem::path(dir) / prefix).string();
  if (format == "csv" || format == "both") {
    write_file(base + ".csv", report_csv(r));
    out.push_back(base + ".csv");
    if (plot_script) {
      write_file(base + ".gp", report_plot_script(r, prefix + ".csv"));
      out.push_back(base + ".gp");
    }
  }
  if (format == "json" || format == "both") {
    write_file(base + ".json", to_json(r).dump(2) + "\n");
    out.push_back(base + ".json");
  }
  for (std::size_t k = 0; k < r.fields.size(); ++k) {
    const std::string fb = base + "_h" + std::to_string(k);
    out.push_back(write_deformation(r.fields[k], r.grids[k], fb));
  }
  if (!r.fields.empty()) {
    out.push_back(write_plate_state(r.reference.state, r.reference.grid, base + "_reference"));
  }
  return out;
}

}  // namespace thinplate
