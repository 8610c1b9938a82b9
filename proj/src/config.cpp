#include "thinplate/config.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <functional>
#include <sstream>

namespace thinplate {

std::string to_string(LoadProfile p) {
  switch (p) {
    case LoadProfile::Uniform: return "uniform";
    case LoadProfile::Sine: return "sine";
    case LoadProfile::Bump: return "bump";
  }
  return "unknown";
}

LoadProfile load_profile_from_string(const std::string& s) {
  if (s == "uniform") return LoadProfile::Uniform;
  if (s == "sine") return LoadProfile::Sine;
  if (s == "bump") return LoadProfile::Bump;
  throw std::invalid_argument("unknown load profile '" + s + "' (expected uniform, sine or bump)");
}

Eigen::VectorXd load_profile_values(LoadProfile p, const MidGrid& grid) {
  Eigen::VectorXd g(grid.num_nodes());
  for (int j = 0; j < grid.n2; ++j)
    for (int i = 0; i < grid.n1; ++i) {
      const double s1 = M_PI * grid.x1(i) / grid.L1, s2 = M_PI * grid.x2(j) / grid.L2;
      double v = 1.0;
      if (p == LoadProfile::Sine) v = std::sin(s1) * std::sin(s2);
      if (p == LoadProfile::Bump) v = 1.0 + 0.5 * std::sin(s1) * std::cos(s2);
      g[grid.node(i, j)] = v;
    }
  return g;
}

std::string format_double(double x) {
  char buf[64];
  const auto r = std::to_chars(buf, buf + sizeof buf, x);
  std::string s(buf, r.ptr);
  // 1e-09 -> 1e-9
  const auto e = s.find('e');
  if (e != std::string::npos) {
    std::size_t d = e + 1;
    if (d < s.size() && (s[d] == '-' || s[d] == '+')) ++d;
    while (d + 1 < s.size() && s[d] == '0') s.erase(d, 1);
    if (s[e + 1] == '+') s.erase(e + 1, 1);
  }
  return s;
}

const std::vector<ConfigKey>& config_schema() {
  static const std::vector<ConfigKey> keys = {
      {"density", "kind", "enum", "logdet", "stored-energy density: logdet, invdet or svk"},
      {"density", "p", "real", "2", "exponent of the volumetric term, >= 2"},
      {"density", "delta", "real", "0.5", "smoothness radius around SO(3), > 0"},
      {"density", "analytic_derivatives", "bool", "true", "use closed-form stress and Hessian instead of differences"},
      {"geometry", "L1", "real", "1", "side length of S along x1"},
      {"geometry", "L2", "real", "1", "side length of S along x2"},
      {"geometry", "n1", "int", "33", "mid-surface nodes along x1, >= 4"},
      {"geometry", "n2", "int", "33", "mid-surface nodes along x2, >= 4"},
      {"geometry", "n3", "int", "4", "nodes through the thickness, >= 2"},
      {"geometry", "clamp", "enum", "full", "clamped part of the boundary: full, left, right, bottom or top"},
      {"load", "profile", "enum", "uniform", "shape of g: uniform, sine or bump"},
      {"load", "amplitude", "real|auto", "auto", "factor on the profile; auto targets ||v_lin|| = target_fraction min(L1, L2)"},
      {"load", "target_fraction", "real", "0.1", "deflection target for the automatic amplitude"},
      {"sweep", "beta", "real", "4", "energy scaling exponent, >= 4"},
      {"sweep", "h", "real list", "0.25,0.125,0.0625", "thicknesses, strictly decreasing, in (0, 1)"},
      {"sweep", "gamma", "real|auto", "auto", "good-set exponent in (0, alpha - 2); auto = (alpha - 2) / 2"},
      {"sweep", "reference_refinement", "int", "1", "2D reference grid refinement factor (grids nest)"},
      {"sweep", "seed", "int", "42", "seed for randomized checks"},
      {"solver", "abs_tol", "real", "1e-14", "3D absolute gradient tolerance"},
      {"solver", "rel_tol", "real", "1e-9", "3D gradient tolerance relative to the load vector"},
      {"solver", "max_iterations", "int", "100", "Newton iteration cap (3D and 2D)"},
      {"solver", "armijo_c", "real", "1e-4", "sufficient-decrease constant"},
      {"solver", "backtrack", "real", "0.5", "step reduction factor"},
      {"solver", "min_step", "real", "1e-12", "smallest step before the line search stalls"},
      {"solver", "eig_floor", "real", "1e-8", "Hessian eigenvalue floor relative to trace / 9"},
      {"solver", "hourglass", "bool", "true", "penalize the per-cell hourglass modes"},
      {"solver", "hourglass_coeff", "real", "0.05", "hourglass penalty coefficient"},
      {"solver", "abs_tol_2d", "real", "1e-13", "2D absolute gradient tolerance"},
      {"solver", "rel_tol_2d", "real", "1e-10", "2D gradient tolerance relative to the load vector"},
      {"output", "dir", "string", "out", "output directory"},
      {"output", "prefix", "string", "convergence", "file name prefix of the report"},
      {"output", "format", "enum", "both", "report format: csv, json or both"},
      {"output", "plot_script", "bool", "true", "write a gnuplot script next to the CSV"},
      {"output", "wall_time", "bool", "true", "record wall times (false writes 0 for byte-stable reports)"},
      {"output", "write_fields", "bool", "false", "write 3D deformations and 2D states per run"},
  };
  return keys;
}

namespace {

double parse_real(const std::string& path, const std::string& s) {
  double x = 0.0;
  const char* b = s.data();
  const char* e = s.data() + s.size();
  while (b < e && *b == ' ') ++b;
  while (e > b && e[-1] == ' ') --e;
  if (b < e && *b == '+') ++b;
  const auto r = std::from_chars(b, e, x);
  if (r.ec != std::errc() || r.ptr != e || !std::isfinite(x))
    throw ConfigError(path + ": expected a number, got '" + s + "'");
  return x;
}

long long parse_int(const std::string& path, const std::string& s) {
  long long x = 0;
  const auto r = std::from_chars(s.data(), s.data() + s.size(), x);
  if (r.ec != std::errc() || r.ptr != s.data() + s.size())
    throw ConfigError(path + ": expected an integer, got '" + s + "'");
  return x;
}

bool parse_bool(const std::string& path, const std::string& s) {
  if (s == "true" || s == "1" || s == "yes" || s == "on") return true;
  if (s == "false" || s == "0" || s == "no" || s == "off") return false;
  throw ConfigError(path + ": expected true or false, got '" + s + "'");
}

std::optional<double> parse_real_or_auto(const std::string& path, const std::string& s) {
  if (s == "auto") return std::nullopt;
  return parse_real(path, s);
}

std::vector<double> parse_list(const std::string& path, const std::string& s) {
  std::vector<double> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(parse_real(path, item));
  if (out.empty()) throw ConfigError(path + ": expected a comma-separated list of numbers");
  return out;
}

template <class F>
auto wrap(const std::string& path, F&& f) {
  try {
    return f();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(path + ": " + e.what());
  }
}

using Setter = std::function<void(ExperimentConfig&, const std::string&, const std::string&)>;

const std::map<std::string, Setter>& setters() {
  static const std::map<std::string, Setter> m = {
      {"density.kind", [](auto& c, auto& p, auto& s) { c.density.kind = wrap(p, [&] { return density_kind_from_string(s); }); }},
      {"density.p", [](auto& c, auto& p, auto& s) { c.density.p = parse_real(p, s); }},
      {"density.delta", [](auto& c, auto& p, auto& s) { c.density.delta = parse_real(p, s); }},
      {"density.analytic_derivatives", [](auto& c, auto& p, auto& s) { c.density.analytic_derivatives = parse_bool(p, s); }},
      {"geometry.L1", [](auto& c, auto& p, auto& s) { c.geometry.L1 = parse_real(p, s); }},
      {"geometry.L2", [](auto& c, auto& p, auto& s) { c.geometry.L2 = parse_real(p, s); }},
      {"geometry.n1", [](auto& c, auto& p, auto& s) { c.geometry.n1 = static_cast<int>(parse_int(p, s)); }},
      {"geometry.n2", [](auto& c, auto& p, auto& s) { c.geometry.n2 = static_cast<int>(parse_int(p, s)); }},
      {"geometry.n3", [](auto& c, auto& p, auto& s) { c.n3 = static_cast<int>(parse_int(p, s)); }},
      {"geometry.clamp", [](auto& c, auto& p, auto& s) { c.geometry.clamp = wrap(p, [&] { return clamp_from_string(s); }); }},
      {"load.profile", [](auto& c, auto& p, auto& s) { c.profile = wrap(p, [&] { return load_profile_from_string(s); }); }},
      {"load.amplitude", [](auto& c, auto& p, auto& s) { c.amplitude = parse_real_or_auto(p, s); }},
      {"load.target_fraction", [](auto& c, auto& p, auto& s) { c.target_fraction = parse_real(p, s); }},
      {"sweep.beta", [](auto& c, auto& p, auto& s) { c.beta = parse_real(p, s); }},
      {"sweep.h", [](auto& c, auto& p, auto& s) { c.h = parse_list(p, s); }},
      {"sweep.gamma", [](auto& c, auto& p, auto& s) { c.gamma = parse_real_or_auto(p, s); }},
      {"sweep.reference_refinement", [](auto& c, auto& p, auto& s) { c.reference_refinement = static_cast<int>(parse_int(p, s)); }},
      {"sweep.seed", [](auto& c, auto& p, auto& s) { c.seed = static_cast<std::uint64_t>(parse_int(p, s)); }},
      {"solver.abs_tol", [](auto& c, auto& p, auto& s) { c.abs_tol = parse_real(p, s); }},
      {"solver.rel_tol", [](auto& c, auto& p, auto& s) { c.rel_tol = parse_real(p, s); }},
      {"solver.max_iterations", [](auto& c, auto& p, auto& s) { c.max_iterations = static_cast<int>(parse_int(p, s)); }},
      {"solver.armijo_c", [](auto& c, auto& p, auto& s) { c.armijo_c = parse_real(p, s); }},
      {"solver.backtrack", [](auto& c, auto& p, auto& s) { c.backtrack = parse_real(p, s); }},
      {"solver.min_step", [](auto& c, auto& p, auto& s) { c.min_step = parse_real(p, s); }},
      {"solver.eig_floor", [](auto& c, auto& p, auto& s) { c.eig_floor = parse_real(p, s); }},
      {"solver.hourglass", [](auto& c, auto& p, auto& s) { c.hourglass = parse_bool(p, s); }},
      {"solver.hourglass_coeff", [](auto& c, auto& p, auto& s) { c.hourglass_coeff = parse_real(p, s); }},
      {"solver.abs_tol_2d", [](auto& c, auto& p, auto& s) { c.abs_tol_2d = parse_real(p, s); }},
      {"solver.rel_tol_2d", [](auto& c, auto& p, auto& s) { c.rel_tol_2d = parse_real(p, s); }},
      {"output.dir", [](auto& c, auto&, auto& s) { c.output_dir = s; }},
      {"output.prefix", [](auto& c, auto&, auto& s) { c.prefix = s; }},
      {"output.format", [](auto& c, auto& p, auto& s) {
         if (s != "csv" && s != "json" && s != "both") throw ConfigError(p + ": expected csv, json or both, got '" + s + "'");
         c.format = s;
       }},
      {"output.plot_script", [](auto& c, auto& p, auto& s) { c.plot_script = parse_bool(p, s); }},
      {"output.wall_time", [](auto& c, auto& p, auto& s) { c.wall_time = parse_bool(p, s); }},
      {"output.write_fields", [](auto& c, auto& p, auto& s) { c.write_fields = parse_bool(p, s); }},
  };
  return m;
}

bool known_section(const std::string& s) {
  for (const auto& k : config_schema())
    if (k.section == s) return true;
  return false;
}

}  // namespace

void ExperimentConfig::validate() const {
  auto fail = [](const std::string& m) { throw ConfigError(m); };
  if (!(density.p >= 2.0)) fail("density.p: must be >= 2");
  if (!(density.delta > 0.0)) fail("density.delta: must be positive");
  if (!(geometry.L1 > 0.0)) fail("geometry.L1: must be positive");
  if (!(geometry.L2 > 0.0)) fail("geometry.L2: must be positive");
  if (geometry.n1 < 4) fail("geometry.n1: must be at least 4");
  if (geometry.n2 < 4) fail("geometry.n2: must be at least 4");
  if (n3 < 2) fail("geometry.n3: must be at least 2");
  if (amplitude && !std::isfinite(*amplitude)) fail("load.amplitude: must be finite");
  if (!(target_fraction > 0.0)) fail("load.target_fraction: must be positive");
  if (!(beta >= 4.0)) fail("sweep.beta: must be >= 4");
  if (h.empty()) fail("sweep.h: needs at least one value");
  for (std::size_t k = 0; k < h.size(); ++k) {
    if (!(h[k] > 0.0 && h[k] < 1.0)) fail("sweep.h: values must lie in (0, 1)");
    if (k > 0 && !(h[k] < h[k - 1])) fail("sweep.h: values must be strictly decreasing");
  }
  const double g = gamma_value();
  if (!(g > 0.0 && g < alpha() - 2.0)) fail("sweep.gamma: must lie in (0, alpha - 2) = (0, " + format_double(alpha() - 2.0) + ")");
  if (reference_refinement < 1) fail("sweep.reference_refinement: must be at least 1");
  if (!(abs_tol >= 0.0)) fail("solver.abs_tol: must be >= 0");
  if (!(rel_tol >= 0.0)) fail("solver.rel_tol: must be >= 0");
  if (max_iterations < 0) fail("solver.max_iterations: must be >= 0");
  if (!(armijo_c > 0.0 && armijo_c < 1.0)) fail("solver.armijo_c: must lie in (0, 1)");
  if (!(backtrack > 0.0 && backtrack < 1.0)) fail("solver.backtrack: must lie in (0, 1)");
  if (!(min_step > 0.0)) fail("solver.min_step: must be positive");
  if (!(eig_floor > 0.0)) fail("solver.eig_floor: must be positive");
  if (!(hourglass_coeff >= 0.0)) fail("solver.hourglass_coeff: must be >= 0");
  if (!(abs_tol_2d >= 0.0)) fail("solver.abs_tol_2d: must be >= 0");
  if (!(rel_tol_2d >= 0.0)) fail("solver.rel_tol_2d: must be >= 0");
  if (prefix.empty()) fail("output.prefix: must not be empty");
}

ConfigValues read_config_file(const std::string& path) {
  boost::property_tree::ptree tree;
  try {
    boost::property_tree::ini_parser::read_ini(path, tree);
  } catch (const boost::property_tree::ini_parser_error& e) {
    throw ConfigError("config file " + path + ": " + e.message() + (e.line() ? " at line " + std::to_string(e.line()) : ""));
  }
  ConfigValues out;
  for (const auto& [section, body] : tree) {
    if (body.empty() && !body.data().empty()) throw ConfigError("config file " + path + ": key '" + section + "' outside any section");
    if (!known_section(section)) throw ConfigError("unknown section [" + section + "]");
    out[section + "."] = "";  // marks the section as present
    for (const auto& [key, value] : body) {
      const std::string p = section + "." + key;
      if (!setters().count(p)) throw ConfigError("unknown key " + p + " in [" + section + "]");
      out[p] = value.data();
    }
  }
  return out;
}

std::pair<std::string, std::string> parse_override(const std::string& kv) {
  const auto eq = kv.find('=');
  if (eq == std::string::npos || eq == 0) throw ConfigError("override '" + kv + "': expected section.key=value");
  const std::string key = kv.substr(0, eq);
  if (!setters().count(key)) throw ConfigError("unknown key " + key);
  return {key, kv.substr(eq + 1)};
}

ExperimentConfig resolve_config(const ConfigValues& file, const ConfigValues& overrides, bool require_sweep) {
  ExperimentConfig c;
  bool has_sweep = false;
  for (const ConfigValues* vals : {&file, &overrides})
    for (const auto& [key, value] : *vals) {
      if (key.rfind("sweep.", 0) == 0) has_sweep = true;
      if (key.back() == '.') continue;
      const auto it = setters().find(key);
      if (it == setters().end()) throw ConfigError("unknown key " + key);
      it->second(c, key, value);
    }
  if (require_sweep && !has_sweep) throw ConfigError("missing section [sweep] (it needs at least one key)");
  c.validate();
  return c;
}

ExperimentConfig load_config(const std::string& path, const std::vector<std::string>& overrides, bool require_sweep) {
  const ConfigValues file = path.empty() ? ConfigValues{} : read_config_file(path);
  ConfigValues ov;
  for (const auto& kv : overrides) ov.insert_or_assign(parse_override(kv).first, parse_override(kv).second);
  return resolve_config(file, ov, require_sweep);
}

ConfigValues to_values(const ExperimentConfig& c) {
  auto auto_or = [](const std::optional<double>& x) { return x ? format_double(*x) : std::string("auto"); };
  std::string hs;
  for (std::size_t k = 0; k < c.h.size(); ++k) hs += (k ? "," : "") + format_double(c.h[k]);
  return {
      {"density.kind", to_string(c.density.kind)},
      {"density.p", format_double(c.density.p)},
      {"density.delta", format_double(c.density.delta)},
      {"density.analytic_derivatives", c.density.analytic_derivatives ? "true" : "false"},
      {"geometry.L1", format_double(c.geometry.L1)},
      {"geometry.L2", format_double(c.geometry.L2)},
      {"geometry.n1", std::to_string(c.geometry.n1)},
      {"geometry.n2", std::to_string(c.geometry.n2)},
      {"geometry.n3", std::to_string(c.n3)},
      {"geometry.clamp", to_string(c.geometry.clamp)},
      {"load.profile", to_string(c.profile)},
      {"load.amplitude", auto_or(c.amplitude)},
      {"load.target_fraction", format_double(c.target_fraction)},
      {"sweep.beta", format_double(c.beta)},
      {"sweep.h", hs},
      {"sweep.gamma", auto_or(c.gamma)},
      {"sweep.reference_refinement", std::to_string(c.reference_refinement)},
      {"sweep.seed", std::to_string(c.seed)},
      {"solver.abs_tol", format_double(c.abs_tol)},
      {"solver.rel_tol", format_double(c.rel_tol)},
      {"solver.max_iterations", std::to_string(c.max_iterations)},
      {"solver.armijo_c", format_double(c.armijo_c)},
      {"solver.backtrack", format_double(c.backtrack)},
      {"solver.min_step", format_double(c.min_step)},
      {"solver.eig_floor", format_double(c.eig_floor)},
      {"solver.hourglass", c.hourglass ? "true" : "false"},
      {"solver.hourglass_coeff", format_double(c.hourglass_coeff)},
      {"solver.abs_tol_2d", format_double(c.abs_tol_2d)},
      {"solver.rel_tol_2d", format_double(c.rel_tol_2d)},
      {"output.dir", c.output_dir},
      {"output.prefix", c.prefix},
      {"output.format", c.format},
      {"output.plot_script", c.plot_script ? "true" : "false"},
      {"output.wall_time", c.wall_time ? "true" : "false"},
      {"output.write_fields", c.write_fields ? "true" : "false"},
  };
}

std::string to_ini(const ExperimentConfig& c) {
  const ConfigValues v = to_values(c);
  std::ostringstream os;
  std::string section;
  for (const auto& k : config_schema()) {
    if (k.section != section) {
      os << (section.empty() ? "" : "\n") << "[" << k.section << "]\n";
      section = k.section;
    }
    os << k.key << " = " << v.at(k.path()) << "\n";
  }
  return os.str();
}

nlohmann::json to_json(const ExperimentConfig& c) {
  const ConfigValues v = to_values(c);
  nlohmann::json j = nlohmann::json::object();
  for (const auto& k : config_schema()) j[k.section][k.key] = v.at(k.path());
  return j;
}

}  // namespace thinplate
