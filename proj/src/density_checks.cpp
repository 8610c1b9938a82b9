#include "thinplate/density_checks.hpp"

#include <algorithm>
#include <cmath>

namespace thinplate {

nlohmann::json to_json(const CheckRecord& r) {
  return {{"check", r.check},         {"density", r.density},     {"params", r.params},
          {"statistic", r.statistic}, {"threshold", r.threshold}, {"pass", r.pass}};
}

Mat3 random_positive_matrix(std::mt19937_64& rng, double det_min, double det_max) {
  std::uniform_real_distribution<double> stretch(-0.7, 0.7);
  std::uniform_real_distribution<double> logdet(std::log(det_min), std::log(det_max));
  const double l1 = stretch(rng), l2 = stretch(rng);
  const double l3 = logdet(rng) - l1 - l2;
  const Vec3 s(std::exp(l1), std::exp(l2), std::exp(l3));
  return random_rotation(rng) * s.asDiagonal() * random_rotation(rng);
}

FrameIndifferenceReport check_frame_indifference(const EnergyDensity& W, int n_samples, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  FrameIndifferenceReport rep;
  for (int n = 0; n < n_samples; ++n) {
    const Mat3 F = random_positive_matrix(rng, 0.2, 5.0);
    const Mat3 R = random_rotation(rng);
    const double w = eval_W(W, F);
    const double wr = eval_W(W, R * F);
    rep.max_abs_violation = std::max(rep.max_abs_violation, std::abs(wr - w) / (1.0 + w));
  }
  return rep;
}

double coercivity_ratio(const EnergyDensity& W, const Mat3& F) {
  const double d = dist_to_SO3(F);
  if (d < 1e-8) return std::nan("");
  return eval_W(W, F) / (d * d);
}

CoercivityReport check_coercivity(const EnergyDensity& W, int n_samples, std::uint64_t seed, double max_dist) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::uniform_real_distribution<double> log_stretch(-0.6, 0.6);
  CoercivityReport rep;
  for (int n = 0; n < n_samples; ++n) {
    // Mix of samples on, near and away from the well.
    const double scale = n % 10 == 0 ? 0.0 : unit(rng);
    const Vec3 s(std::exp(scale * log_stretch(rng)), std::exp(scale * log_stretch(rng)),
                 std::exp(scale * log_stretch(rng)));
    const Mat3 F = random_rotation(rng) * s.asDiagonal() * random_rotation(rng);
    if (dist_to_SO3(F) > max_dist) continue;
    const double r = coercivity_ratio(W, F);
    if (std::isnan(r)) {
      ++rep.excluded;
      continue;
    }
    ++rep.counted;
    rep.min_ratio = std::min(rep.min_ratio, r);
  }
  return rep;
}

double ball_ratio(const EnergyDensity& W, const Mat3& F) {
  return (eval_DW(W, F) * F.transpose()).norm() / (eval_W(W, F) + 1.0);
}

BallGrowthReport check_ball_growth(const EnergyDensity& W, const std::vector<double>& det_sequence, int n_samples,
                                   std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  BallGrowthReport rep;
  for (int n = 0; n < n_samples; ++n)
    rep.empirical_k = std::max(rep.empirical_k, ball_ratio(W, random_positive_matrix(rng, 0.1, 10.0)));
  for (double d : det_sequence) {
    const Mat3 F = Vec3(d, 1.0, 1.0).asDiagonal();
    const double r = ball_ratio(W, F);
    rep.determinants.push_back(d);
    rep.trend.push_back(r);
    rep.empirical_k = std::max(rep.empirical_k, r);
  }
  return rep;
}

DerivativeReport check_derivative(const EnergyDensity& W, int n_samples, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  DerivativeReport rep;
  for (int n = 0; n < n_samples; ++n) {
    const Mat3 F = random_positive_matrix(rng, 0.2, 5.0);
    const Mat3 fd = W.fd_stress(F);
    const Mat3 an = eval_DW(W, F);
    rep.max_rel_error = std::max(rep.max_rel_error, (an - fd).norm() / std::max(fd.norm(), 1e-8));
  }
  return rep;
}

std::vector<CheckRecord> run_density_suite(const EnergyDensity& W, std::uint64_t seed) {
  const nlohmann::json params = {{"p", W.exponent()}, {"delta", W.smoothness_radius()}};
  std::vector<CheckRecord> out;

  const auto fi = check_frame_indifference(W, 1000, seed);
  out.push_back({"frame_indifference", W.name(), params, fi.max_abs_violation, 1e-10, fi.max_abs_violation <= 1e-10});

  const auto co = check_coercivity(W, 1000, seed + 1);
  out.push_back({"coercivity", W.name(), params, co.min_ratio, 0.0, co.counted > 0 && co.min_ratio > 0.0});

  std::vector<double> dets;
  for (int j = 1; j <= 6; ++j) dets.push_back(std::pow(10.0, -j));
  const auto bg = check_ball_growth(W, dets, 1000, seed + 2);
  const double growth = *std::max_element(bg.trend.begin(), bg.trend.end());
  CheckRecord ball{"ball_growth", W.name(), params, growth, 2.0 * bg.trend.front(), false};
  ball.params["empirical_k"] = bg.empirical_k;
  ball.params["trend"] = bg.trend;
  ball.pass = std::isfinite(bg.empirical_k) && growth <= ball.threshold;
  out.push_back(ball);

  const auto dr = check_derivative(W, 100, seed + 3);
  out.push_back({"derivative_fd", W.name(), params, dr.max_rel_error, 1e-6, dr.max_rel_error <= 1e-6});
  return out;
}

}  // namespace thinplate
