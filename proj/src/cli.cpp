#include "thinplate/cli.hpp"

#include "thinplate/config.hpp"
#include "thinplate/density_checks.hpp"
#include "thinplate/field_io.hpp"
#include "thinplate/harness.hpp"
#include "thinplate/quadratic_forms.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <thread>

namespace thinplate {

namespace {

struct CommonArgs {
  std::string config;
  std::vector<std::string> set;
  std::string out;
  int threads = 0;
  std::optional<std::uint64_t> seed;
  std::string format;
  std::string density;
  std::optional<double> p;
  std::optional<double> h;
  bool verbose = false;
};

class SolverFailure : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

void add_common(CLI::App* app, CommonArgs& a) {
  app->add_option("--config", a.config, "INI configuration file");
  app->add_option("--set", a.set, "override section.key=value (repeatable)")->take_all();
  app->add_option("--out", a.out, "output directory (output.dir)");
  app->add_option("--threads", a.threads, "worker threads, 0 = available parallelism")->check(CLI::NonNegativeNumber);
  app->add_option("--seed", a.seed, "random seed (sweep.seed)");
  app->add_option("--format", a.format, "report format (output.format)")->check(CLI::IsMember({"csv", "json", "both"}));
  app->add_option("--density", a.density, "density kind (density.kind)");
  app->add_option("--p", a.p, "density exponent (density.p)");
  app->add_flag("-v,--verbose", a.verbose, "print progress");
}

ExperimentConfig resolve(const CommonArgs& a, bool require_sweep) {
  std::vector<std::string> ov;
  if (!a.density.empty()) ov.push_back("density.kind=" + a.density);
  if (a.p) ov.push_back("density.p=" + format_double(*a.p));
  if (a.seed) ov.push_back("sweep.seed=" + std::to_string(*a.seed));
  if (!a.out.empty()) ov.push_back("output.dir=" + a.out);
  if (!a.format.empty()) ov.push_back("output.format=" + a.format);
  ov.insert(ov.end(), a.set.begin(), a.set.end());
  return load_config(a.config, ov, require_sweep);
}

int thread_count(const CommonArgs& a) {
  if (a.threads > 0) return a.threads;
  return std::max(1u, std::thread::hardware_concurrency());
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream os(path);
  if (!os || !(os << text)) throw std::runtime_error("cannot write " + path);
}

std::string prepare_output(const ExperimentConfig& c) {
  std::error_code ec;
  std::filesystem::create_directories(c.output_dir, ec);
  if (ec) throw std::runtime_error("cannot write " + c.output_dir + ": " + ec.message());
  write_text((std::filesystem::path(c.output_dir) / "resolved_config.ini").string(), to_ini(c));
  return c.output_dir;
}

std::string out_path(const ExperimentConfig& c, const std::string& name) {
  return (std::filesystem::path(c.output_dir) / (c.prefix + name)).string();
}

QuadForm2 q2_of(const ExperimentConfig& c) { return compute_Q2(hessian_at_identity(*make_density(c.density))); }

int cmd_check_density(const CommonArgs& a, std::ostream& out) {
  const ExperimentConfig c = resolve(a, false);
  const DensityPtr W = make_density(c.density);
  const auto records = run_density_suite(*W, c.seed);
  bool pass = true;
  nlohmann::json j = nlohmann::json::array();
  for (const auto& r : records) {
    out << (r.pass ? "PASS " : "FAIL ") << std::left << std::setw(20) << r.check << " statistic " << format_double(r.statistic)
        << " threshold " << format_double(r.threshold) << "\n";
    pass = pass && r.pass;
    j.push_back(to_json(r));
  }
  if (!a.out.empty()) {
    prepare_output(c);
    write_text(out_path(c, "_density_checks.json"), j.dump(2) + "\n");
  }
  out << W->name() << ": " << (pass ? "all checks pass" : "some checks fail") << "\n";
  return pass ? ExitOk : ExitCheckFailed;
}

int cmd_q2(const CommonArgs& a, std::ostream& out) {
  const ExperimentConfig c = resolve(a, false);
  const Eigen::Matrix3d m = q2_of(c).matrix();
  out << "L2 in coordinates (G11, G22, sqrt(2) sym G12):\n";
  for (int r = 0; r < 3; ++r) {
    for (int k = 0; k < 3; ++k) out << (k ? " " : "") << std::setw(24) << format_double(m(r, k));
    out << "\n";
  }
  return ExitOk;
}

int cmd_solve2d(const CommonArgs& a, std::ostream& out) {
  const ExperimentConfig c = resolve(a, false);
  const QuadForm2 Q2 = q2_of(c);
  const double amp = resolve_amplitude(c, Q2);
  const Eigen::VectorXd g = amp * load_profile_values(c.profile, c.geometry);
  PlateState2 s = PlateState2::zero(c.geometry);
  if (c.beta == 4.0) {
    Solver2dOptions o;
    o.abs_tol = c.abs_tol_2d;
    o.rel_tol = c.rel_tol_2d;
    o.max_iterations = c.max_iterations;
    o.armijo_c = c.armijo_c;
    o.backtrack = c.backtrack;
    o.min_step = c.min_step;
    const SolveVkResult r = solve_vk(c.geometry, Q2, g, o);
    out << "von Karman solve: " << to_string(r.status) << " after " << r.iterations << " iterations, |grad| "
        << format_double(r.grad_norm) << "\n";
    if (!r.ok()) throw SolverFailure("solve2d: " + to_string(r.status) + (r.message.empty() ? "" : ": " + r.message));
    s = r.state;
  } else {
    s.v = solve_linear(c.geometry, Q2, g).v;
    out << "linear plate solve: converged\n";
  }
  const StressMoments m = stress_moments(s, c.geometry, Q2, g);
  out << "amplitude " << format_double(amp) << ", |u| " << format_double(std::hypot(l2_norm(c.geometry, s.u1), l2_norm(c.geometry, s.u2)))
      << ", |v| " << format_double(l2_norm(c.geometry, s.v)) << "\n"
      << "membrane residual " << format_double(m.membrane_residual) << ", bending residual "
      << format_double(m.bending_residual) << "\n";
  prepare_output(c);
  write_plate_state(s, c.geometry, out_path(c, "_plate2d"));
  write_moments(m, c.geometry, out_path(c, "_moments"));
  return ExitOk;
}

int cmd_solve3d(const CommonArgs& a, std::ostream& out) {
  const ExperimentConfig c = resolve(a, false);
  const double h = a.h ? *a.h : c.h.front();
  ExperimentConfig single = c;
  single.h = {h};
  single.write_fields = true;
  const ConvergenceReport rep = run_convergence(single, {thread_count(a), a.verbose ? &out : nullptr});
  const ConvergenceRow& row = rep.rows.front();
  out << "h = " << format_double(h) << ": " << row.status << " after " << row.iterations << " iterations\n"
      << "W energy " << format_double(row.w_energy) << ", scaled " << format_double(row.w_energy_scaled) << "\n"
      << "|u^h| " << format_double(row.u_l2) << ", |v^h| " << format_double(row.v_l2) << ", |v^h - v| "
      << format_double(row.err_v_l2) << "\n"
      << "ball residual " << format_double(row.ball_residual) << ", bad set measure "
      << format_double(row.bad_set_measure) << "\n";
  prepare_output(c);
  if (!rep.fields.empty()) write_deformation(rep.fields.front(), rep.grids.front(), out_path(c, "_deformation"));
  if (!row.ok()) throw SolverFailure("solve3d: " + row.status + (row.message.empty() ? "" : ": " + row.message));
  return ExitOk;
}

int cmd_converge(const CommonArgs& a, std::ostream& out) {
  const ExperimentConfig c = resolve(a, true);
  const ConvergenceReport rep = run_convergence(c, {thread_count(a), a.verbose ? &out : nullptr});
  prepare_output(c);
  const auto files = emit_report(rep, c.output_dir, c.prefix, c.format, c.plot_script);
  out << report_csv(rep);
  for (const auto& [name, est] : rep.rates)
    out << "rate " << name << ": "
        << (est ? format_double(est->slope) + " (r2 " + format_double(est->r2) + ")" : std::string("insufficient data"))
        << "\n";
  for (const auto& n : rep.notes) out << "note: " << n << "\n";
  for (const auto& f : files) out << "wrote " << f << "\n";
  if (!rep.checks.at("all_converged").get<bool>()) return ExitSolverFailed;
  const bool pass =
      rep.checks.at("err_v_strictly_decreasing").get<bool>() && rep.checks.at("energy_scaling_bounded").get<bool>();
  return pass ? ExitOk : ExitCheckFailed;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"thinplate: 3D thin-plate equilibria and their 2D limits"};
  app.require_subcommand(1);
  CommonArgs a;
  auto* check = app.add_subcommand("check-density", "run the density property suite");
  auto* q2 = app.add_subcommand("q2", "print the reduced quadratic form");
  auto* s2 = app.add_subcommand("solve2d", "solve the limiting plate problem");
  auto* s3 = app.add_subcommand("solve3d", "solve the 3D slab problem for one h");
  auto* conv = app.add_subcommand("converge", "run a thickness sweep and report convergence");
  for (auto* sub : {check, q2, s2, s3, conv}) add_common(sub, a);
  s3->add_option("--thickness", a.h, "thickness (default: first sweep.h)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return ExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    return ExitConfigError;
  }

  try {
    if (check->parsed()) return cmd_check_density(a, out);
    if (q2->parsed()) return cmd_q2(a, out);
    if (s2->parsed()) return cmd_solve2d(a, out);
    if (s3->parsed()) return cmd_solve3d(a, out);
    return cmd_converge(a, out);
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << "\n";
    return ExitConfigError;
  } catch (const std::invalid_argument& e) {
    err << "config error: " << e.what() << "\n";
    return ExitConfigError;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return ExitSolverFailed;
  }
}

}  // namespace thinplate
