#pragma once

#include "thinplate/config.hpp"
#include "thinplate/plate2d.hpp"
#include "thinplate/slab.hpp"

#include <nlohmann/json.hpp>

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace thinplate {

/// One thickness of the sweep. The first eleven fields are the CSV columns,
/// in order.
struct ConvergenceRow {
  double h = 0.0;
  double w_energy = 0.0;         // int W(grad_h y)
  double w_energy_scaled = 0.0;  // w_energy / h^beta
  double err_u_l2 = 0.0;         // |u^h - u|_L2(S)
  double err_v_l2 = 0.0;         // |v^h - v|_L2(S)
  double err_grad_v_l2 = 0.0;    // |grad v^h - grad v|_L2(S)
  double ball_residual = 0.0;
  double bad_set_measure = 0.0;  // |Omega \ B_h|
  int iterations = 0;
  double wall_time_s = 0.0;
  std::string status;

  double u_l2 = 0.0;  // |u^h|_L2
  double v_l2 = 0.0;  // |v^h|_L2
  double total_energy = 0.0;
  double hourglass_energy = 0.0;
  double grad_norm = 0.0;
  double tolerance = 0.0;
  double strain_l2 = 0.0;
  double stress_l1 = 0.0;
  double stress_constant = 0.0;
  double max_asymmetry = 0.0;
  std::string message;

  bool ok() const { return status == "converged"; }
};

/// CSV header, in column order.
const std::vector<std::string>& report_columns();

struct RateEstimate {
  double slope = 0.0;
  double r2 = 0.0;
  int points = 0;
};

/// Least-squares slope of log(error) against log(h) over the positive
/// entries. Throws std::invalid_argument("insufficient data") when fewer than
/// three remain.
RateEstimate estimate_rate(const std::vector<double>& h, const std::vector<double>& error);

struct ReferenceSolution {
  MidGrid grid;
  std::string model;  // "von-karman" or "linear"
  PlateState2 state;
  double amplitude = 0.0;
  int iterations = 0;
  std::string status;
  double grad_norm = 0.0;
  double tolerance = 0.0;
  double membrane_residual = 0.0;
  double bending_residual = 0.0;
  double u_l2 = 0.0;
  double v_l2 = 0.0;
};

struct ConvergenceReport {
  ExperimentConfig config;
  ReferenceSolution reference;
  std::vector<ConvergenceRow> rows;
  std::vector<std::pair<std::string, std::optional<RateEstimate>>> rates;
  std::vector<std::string> notes;
  nlohmann::json checks = nlohmann::json::object();
  // Filled only when output.write_fields is set.
  std::vector<SlabGrid> grids;
  std::vector<DeformationField3> fields;
};

struct RunOptions {
  int threads = 1;
  std::ostream* log = nullptr;
};

/// Loads the problem from the config, solves the 2D limit once on the
/// reference grid and the 3D problem for every h, and compares them.
/// Failures of single h values are recorded in their rows.
ConvergenceReport run_convergence(const ExperimentConfig& config, const RunOptions& opts = {});

/// Load amplitude from the config, resolving "auto" with a linear plate solve.
double resolve_amplitude(const ExperimentConfig& config, const QuadForm2& Q2);

nlohmann::json to_json(const ConvergenceReport& r);
std::string report_csv(const ConvergenceReport& r);
std::string report_plot_script(const ConvergenceReport& r, const std::string& csv_name);

/// Writes <dir>/<prefix>.csv and/or .json (format csv, json or both) and the
/// plot script; returns the written paths. Throws std::runtime_error("cannot
/// write ...") for an unwritable path.
std::vector<std::string> emit_report(const ConvergenceReport& r, const std::string& dir, const std::string& prefix,
                                     const std::string& format, bool plot_script);

}  // namespace thinplate
