#pragma once

#include <string>

namespace thinplate {

enum class SolveStatus { Converged, MaxIterations, LineSearchStalled, Infeasible };

inline std::string to_string(SolveStatus s) {
  switch (s) {
    case SolveStatus::Converged: return "converged";
    case SolveStatus::MaxIterations: return "max iterations exceeded";
    case SolveStatus::LineSearchStalled: return "line search stalled";
    case SolveStatus::Infeasible: return "infeasible state";
  }
  return "unknown";
}

}  // namespace thinplate
