#pragma once

#include <stdexcept>
#include <string>

namespace thinplate {

/// Part of the boundary of S = [0, L1] x [0, L2] carrying clamped data.
enum class Clamp { Full, Left, Right, Bottom, Top };

std::string to_string(Clamp c);
Clamp clamp_from_string(const std::string& s);

/// Uniform node grid on the mid-surface S. Node (i, j) sits at
/// (i * dx1, j * dx2) and has index i + n1 * j.
struct MidGrid {
  double L1 = 1.0;
  double L2 = 1.0;
  int n1 = 33;
  int n2 = 33;
  Clamp clamp = Clamp::Full;

  double dx1() const { return L1 / (n1 - 1); }
  double dx2() const { return L2 / (n2 - 1); }
  double x1(int i) const { return i * dx1(); }
  double x2(int j) const { return j * dx2(); }
  int node(int i, int j) const { return i + n1 * j; }
  int num_nodes() const { return n1 * n2; }
  int num_cells() const { return (n1 - 1) * (n2 - 1); }

  bool left_clamped() const { return clamp == Clamp::Full || clamp == Clamp::Left; }
  bool right_clamped() const { return clamp == Clamp::Full || clamp == Clamp::Right; }
  bool bottom_clamped() const { return clamp == Clamp::Full || clamp == Clamp::Bottom; }
  bool top_clamped() const { return clamp == Clamp::Full || clamp == Clamp::Top; }

  /// True for nodes on Gamma, corners of a clamped edge included.
  bool clamped(int i, int j) const {
    return (i == 0 && left_clamped()) || (i == n1 - 1 && right_clamped()) || (j == 0 && bottom_clamped()) ||
           (j == n2 - 1 && top_clamped());
  }

  /// Trapezoidal quadrature weight of node (i, j).
  double weight(int i, int j) const {
    double w = dx1() * dx2();
    if (i == 0 || i == n1 - 1) w *= 0.5;
    if (j == 0 || j == n2 - 1) w *= 0.5;
    return w;
  }

  void validate(int min_nodes = 4) const {
    if (!(L1 > 0.0 && L2 > 0.0)) throw std::invalid_argument("geometry: L1 and L2 must be positive");
    if (n1 < min_nodes || n2 < min_nodes)
      throw std::invalid_argument("geometry: n1 and n2 must be at least " + std::to_string(min_nodes));
  }

  bool operator==(const MidGrid&) const = default;
};

}  // namespace thinplate
