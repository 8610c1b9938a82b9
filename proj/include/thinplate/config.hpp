#pragma once

#include "thinplate/density.hpp"
#include "thinplate/geometry.hpp"

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace thinplate {

/// Invalid, unknown or missing configuration; the message names the key or
/// section at fault.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class LoadProfile { Uniform, Sine, Bump };
std::string to_string(LoadProfile p);
LoadProfile load_profile_from_string(const std::string& s);

/// Nodal g on S for a named profile with unit amplitude.
Eigen::VectorXd load_profile_values(LoadProfile p, const MidGrid& grid);

/// Every parameter of a convergence experiment. Defaults are listed in
/// config_schema().
struct ExperimentConfig {
  DensitySpec density;

  MidGrid geometry;
  int n3 = 4;

  LoadProfile profile = LoadProfile::Uniform;
  std::optional<double> amplitude;  // empty: chosen from target_fraction
  double target_fraction = 0.1;     // ||v_lin||_L2 / min(L1, L2) when amplitude is automatic

  double beta = 4.0;
  std::vector<double> h{0.25, 0.125, 0.0625};
  std::optional<double> gamma;  // empty: (alpha - 2) / 2
  int reference_refinement = 1;
  std::uint64_t seed = 42;

  double abs_tol = 1e-14;
  double rel_tol = 1e-9;
  int max_iterations = 100;
  double armijo_c = 1e-4;
  double backtrack = 0.5;
  double min_step = 1e-12;
  double eig_floor = 1e-8;
  bool hourglass = true;
  double hourglass_coeff = 0.05;
  double abs_tol_2d = 1e-13;
  double rel_tol_2d = 1e-10;

  std::string output_dir = "out";
  std::string prefix = "convergence";
  std::string format = "both";  // csv | json | both
  bool plot_script = true;
  bool wall_time = true;
  bool write_fields = false;

  double alpha() const { return 0.5 * (beta + 2.0); }
  double gamma_value() const { return gamma ? *gamma : 0.5 * (alpha() - 2.0); }

  /// Throws ConfigError naming the offending key.
  void validate() const;
};

/// One documented configuration key.
struct ConfigKey {
  std::string section, key, type, default_value, description;
  std::string path() const { return section + "." + key; }
};
const std::vector<ConfigKey>& config_schema();

/// Flat section.key -> value map, in schema order when rendered.
using ConfigValues = std::map<std::string, std::string>;

/// Parses an INI file. Unknown sections or keys are rejected.
ConfigValues read_config_file(const std::string& path);
/// Parses "section.key=value".
std::pair<std::string, std::string> parse_override(const std::string& kv);

/// Applies defaults, then file values, then overrides, with type checks.
/// With require_sweep the [sweep] section must be present in the file or the
/// overrides.
ExperimentConfig resolve_config(const ConfigValues& file, const ConfigValues& overrides, bool require_sweep);
ExperimentConfig load_config(const std::string& path, const std::vector<std::string>& overrides, bool require_sweep);

/// Fully resolved values of a config, keyed like the schema.
ConfigValues to_values(const ExperimentConfig& c);
std::string to_ini(const ExperimentConfig& c);
nlohmann::json to_json(const ExperimentConfig& c);

/// Shortest decimal text that parses back to the same double.
std::string format_double(double x);

}  // namespace thinplate
