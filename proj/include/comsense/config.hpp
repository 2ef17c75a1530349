#pragma once

// INI-style sweep configuration:
//
//   [run]
//   name = lambda_scan
//   metrics = err_prop, qfi_exact
//   state = superposition        (or coherent)
//   out = results
//   workers = 4
//
//   [axes]
//   lambda = linspace(0.5, 0.95, 5)
//   eta = logspace(1, 4, 4)
//   alpha_im = 0, 1, 2
//
//   [fixed]
//   n = 1
//
// Without an `s` entry each cell is evaluated at s = n tau_1(lambda).

#include <filesystem>
#include <istream>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

namespace comsense {

/// Malformed or inconsistent configuration (CLI exit code 2).
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Axis {
  std::string name;
  std::string definition;  ///< as written in the file
  std::vector<double> values;
};

struct SweepSpec {
  std::string name = "sweep";
  std::vector<std::string> metrics;
  std::string state = "superposition";
  std::filesystem::path out_dir = ".";
  int workers = 0;  ///< 0 defers to the caller
  std::vector<Axis> axes;
  std::map<std::string, double> fixed;

  /// Number of grid cells (product of axis lengths).
  std::size_t cells() const;
};

/// Parameter names that may appear in [axes] or [fixed].
const std::vector<std::string>& sweep_parameters();
/// Metric names accepted in `metrics`.
const std::vector<std::string>& sweep_metrics();

/// "linspace(a, b, n)", "logspace(a, b, n)" (powers of ten) or "v1, v2, ...".
std::vector<double> parse_axis(const std::string& definition);

/// Parses and validates; throws ConfigError naming the offending key.
SweepSpec parse_config(std::istream& in);
SweepSpec load_config(const std::filesystem::path& path);
void validate(const SweepSpec& spec);

/// Strict number parse accepting "inf"; throws ConfigError mentioning `key`.
double parse_number(const std::string& text, const std::string& key);

}  // namespace comsense
