#include "thinplate/geometry.hpp"

namespace thinplate {

std::string to_string(Clamp c) {
  switch (c) {
    case Clamp::Full: return "full";
    case Clamp::Left: return "left";
    case Clamp::Right: return "right";
    case Clamp::Bottom: return "bottom";
    case Clamp::Top: return "top";
  }
  return "full";
}

Clamp clamp_from_string(const std::string& s) {
  if (s == "full") return Clamp::Full;
  if (s == "left") return Clamp::Left;
  if (s == "right") return Clamp::Right;
  if (s == "bottom") return Clamp::Bottom;
  if (s == "top") return Clamp::Top;
  throw std::invalid_argument("unknown clamp '" + s + "' (expected full, left, right, bottom or top)");
}

}  // namespace thinplate
