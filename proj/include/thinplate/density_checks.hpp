#pragma once

#include "thinplate/density.hpp"

#include <nlohmann/json.hpp>

#include <cstdint>
#include <string>
#include <vector>

namespace thinplate {

/// One property check, serialized as
/// {check, density, params, statistic, threshold, pass}.
struct CheckRecord {
  std::string check;
  std::string density;
  nlohmann::json params = nlohmann::json::object();
  double statistic = 0.0;
  double threshold = 0.0;
  bool pass = false;
};

nlohmann::json to_json(const CheckRecord& r);

/// Random F = Q1 diag(s) Q2 with Q1, Q2 random rotations and log s_i drawn
/// uniformly so that det F lies in [det_min, det_max].
Mat3 random_positive_matrix(std::mt19937_64& rng, double det_min, double det_max);

struct FrameIndifferenceReport {
  double max_abs_violation = 0.0;  // max |W(RF) - W(F)| / (1 + W(F))
};
FrameIndifferenceReport check_frame_indifference(const EnergyDensity& W, int n_samples, std::uint64_t seed);

struct CoercivityReport {
  double min_ratio = infinity;  // min W(F) / dist^2(F, SO(3)) over dist >= 1e-8
  int counted = 0;
  int excluded = 0;
};
/// Samples with dist(F, SO(3)) <= max_dist.
CoercivityReport check_coercivity(const EnergyDensity& W, int n_samples, std::uint64_t seed, double max_dist = 1.0);
/// Ratio for one matrix; NaN when F lies on the well (dist < 1e-8).
double coercivity_ratio(const EnergyDensity& W, const Mat3& F);

struct BallGrowthReport {
  double empirical_k = 0.0;           // max |DW(F) F^T| / (W(F) + 1)
  std::vector<double> determinants;   // the compressive sequence
  std::vector<double> trend;          // ratio along it
};
/// ratio |DW(F) F^T| / (W(F) + 1)
double ball_ratio(const EnergyDensity& W, const Mat3& F);
/// Random samples with det in [0.1, 10] plus F = diag(d, 1, 1) for every d
/// in det_sequence.
BallGrowthReport check_ball_growth(const EnergyDensity& W, const std::vector<double>& det_sequence, int n_samples,
                                   std::uint64_t seed);

struct DerivativeReport {
  double max_rel_error = 0.0;  // |DW - FD| / max(|FD|, 1e-8) over samples
};
/// Analytic DW against central differences of W, det F in [0.2, 5].
DerivativeReport check_derivative(const EnergyDensity& W, int n_samples, std::uint64_t seed);

/// The full property suite with the library's pass thresholds.
std::vector<CheckRecord> run_density_suite(const EnergyDensity& W, std::uint64_t seed);

}  // namespace thinplate
