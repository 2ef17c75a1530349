#include "comsense/config.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

namespace comsense {
namespace {

std::string trim(std::string_view text) {
  const auto first = text.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = text.find_last_not_of(" \t\r\n");
  return std::string(text.substr(first, last - first + 1));
}

std::vector<std::string> split(const std::string& text, char sep) {
  std::vector<std::string> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, sep)) out.push_back(trim(item));
  return out;
}

bool contains(const std::vector<std::string>& list, const std::string& item) {
  return std::find(list.begin(), list.end(), item) != list.end();
}

std::vector<double> spaced(const std::string& definition, bool logarithmic) {
  const auto open = definition.find('(');
  const auto close = definition.rfind(')');
  if (open == std::string::npos || close == std::string::npos || close < open ||
      !trim(definition.substr(close + 1)).empty()) {
    throw ConfigError("malformed range '" + definition + "'");
  }
  const auto args = split(definition.substr(open + 1, close - open - 1), ',');
  if (args.size() != 3) throw ConfigError("range '" + definition + "' needs (start, stop, count)");
  const double a = parse_number(args[0], definition);
  const double b = parse_number(args[1], definition);
  const double count = parse_number(args[2], definition);
  if (!(count >= 1.0) || count != std::floor(count)) {
    throw ConfigError("range '" + definition + "' needs a positive integer count");
  }
  const int n = static_cast<int>(count);
  std::vector<double> values(n);
  for (int k = 0; k < n; ++k) {
    const double t = n == 1 ? a : a + (b - a) * k / (n - 1);
    values[k] = logarithmic ? std::pow(10.0, t) : t;
  }
  if (n > 1) values.back() = logarithmic ? std::pow(10.0, b) : b;
  return values;
}

void require_integer(double v, double lowest, const std::string& key) {
  if (!(v >= lowest) || v != std::floor(v) || std::isinf(v)) {
    throw ConfigError("'" + key + "' must be an integer >= " + std::to_string(static_cast<int>(lowest)));
  }
}

}  // namespace

std::size_t SweepSpec::cells() const {
  std::size_t n = 1;
  for (const auto& axis : axes) n *= axis.values.size();
  return n;
}

const std::vector<std::string>& sweep_parameters() {
  static const std::vector<std::string> names{"lambda", "eta", "alpha_re", "alpha_im",
                                              "s",      "n",   "cutoff"};
  return names;
}

const std::vector<std::string>& sweep_metrics() {
  static const std::vector<std::string> names{
      "phase",          "eps_np",        "eps_np_im",     "E_np",          "r_np",
      "lambda_eff",     "tau",           "mean_x",        "var_x",         "susceptibility",
      "mean_x_numeric", "var_x_numeric", "qfi_exact",     "qfi_asymptotic", "qfi_numeric",
      "cfi",            "err_prop",      "err_prop_numeric", "finite_eta_ratio",
      "working_point",  "working_point_variant"};
  return names;
}

double parse_number(const std::string& text, const std::string& key) {
  std::string t = trim(text);
  if (t.size() > 1 && t.front() == '+') t.erase(0, 1);
  if (t == "inf") return std::numeric_limits<double>::infinity();
  double value = 0.0;
  const char* end = t.data() + t.size();
  const auto [ptr, ec] = std::from_chars(t.data(), end, value);
  if (t.empty() || ec != std::errc() || ptr != end || !std::isfinite(value)) {
    throw ConfigError("'" + key + "': cannot read number '" + t + "'");
  }
  return value;
}

std::vector<double> parse_axis(const std::string& definition) {
  const std::string d = trim(definition);
  if (d.rfind("linspace", 0) == 0) return spaced(d, false);
  if (d.rfind("logspace", 0) == 0) return spaced(d, true);
  std::vector<double> values;
  for (const auto& item : split(d, ',')) values.push_back(parse_number(item, definition));
  if (values.empty()) throw ConfigError("empty axis '" + definition + "'");
  return values;
}

SweepSpec parse_config(std::istream& in) {
  SweepSpec spec;
  std::string section;
  std::set<std::string> seen;
  std::set<std::string> seen_params;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find_first_of("#;");
    const std::string text = trim(hash == std::string::npos ? line : line.substr(0, hash));
    if (text.empty()) continue;
    if (text.front() == '[') {
      if (text.back() != ']') throw ConfigError("line " + std::to_string(lineno) + ": bad section");
      section = trim(text.substr(1, text.size() - 2));
      if (section != "run" && section != "axes" && section != "fixed") {
        throw ConfigError("unknown section [" + section + "]");
      }
      continue;
    }
    const auto eq = text.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("line " + std::to_string(lineno) + ": expected key = value");
    }
    const std::string key = trim(text.substr(0, eq));
    const std::string value = trim(text.substr(eq + 1));
    if (section.empty()) throw ConfigError("key '" + key + "' outside any section");
    if (!seen.insert(section + "." + key).second) throw ConfigError("duplicate key '" + key + "'");

    if (section == "run") {
      if (key == "name") {
        spec.name = value;
      } else if (key == "metrics") {
        spec.metrics = split(value, ',');
      } else if (key == "state") {
        spec.state = value;
      } else if (key == "out") {
        spec.out_dir = value;
      } else if (key == "workers") {
        const double w = parse_number(value, key);
        require_integer(w, 1.0, key);
        spec.workers = static_cast<int>(w);
      } else {
        throw ConfigError("unknown key '" + key + "' in [run]");
      }
      continue;
    }
    if (!contains(sweep_parameters(), key)) {
      throw ConfigError("unknown key '" + key + "' in [" + section + "]");
    }
    if (!seen_params.insert(key).second) throw ConfigError("duplicate key '" + key + "'");
    if (section == "axes") {
      spec.axes.push_back({key, value, parse_axis(value)});
    } else {
      spec.fixed[key] = parse_number(value, key);
    }
  }
  validate(spec);
  return spec;
}

SweepSpec load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config '" + path.string() + "'");
  return parse_config(in);
}

void validate(const SweepSpec& spec) {
  if (spec.name.empty() || spec.name.find_first_of("/\\") != std::string::npos) {
    throw ConfigError("'name' must be a plain file stem");
  }
  if (spec.metrics.empty()) throw ConfigError("'metrics' must list at least one metric");
  std::set<std::string> metric_set;
  for (const auto& m : spec.metrics) {
    if (!contains(sweep_metrics(), m)) throw ConfigError("unknown metric '" + m + "'");
    if (!metric_set.insert(m).second) throw ConfigError("duplicate metric '" + m + "'");
  }
  if (spec.state != "superposition" && spec.state != "coherent") {
    throw ConfigError("'state' must be superposition or coherent");
  }

  std::map<std::string, std::vector<double>> values;
  for (const auto& axis : spec.axes) {
    if (axis.values.empty()) throw ConfigError("axis '" + axis.name + "' is empty");
    values[axis.name] = axis.values;
  }
  for (const auto& [key, v] : spec.fixed) values[key] = {v};
  if (!values.count("lambda")) throw ConfigError("'lambda' must be given in [axes] or [fixed]");
  if (values.count("s") && values.count("n")) throw ConfigError("give either 's' or 'n', not both");

  for (const double v : values["lambda"]) {
    if (!(v >= 0.0) || std::isinf(v)) throw ConfigError("'lambda' must be finite and non-negative");
  }
  const bool phase_only = std::all_of(spec.metrics.begin(), spec.metrics.end(), [](const auto& m) {
    return m == "phase" || m == "eps_np" || m == "eps_np_im";
  });
  if (!phase_only) {
    for (const double v : values["lambda"]) {
      if (v >= 1.0) {
        throw ConfigError("unstable regime: lambda = " + std::to_string(v) +
                          " requested for metrics that need lambda < 1");
      }
    }
  }
  if (values.count("eta")) {
    for (const double v : values["eta"]) {
      if (!(v > 0.0)) throw ConfigError("'eta' must be positive");
    }
  }
  if (values.count("s")) {
    for (const double v : values["s"]) {
      if (!(v >= 0.0) || std::isinf(v)) throw ConfigError("'s' must be finite and non-negative");
    }
  }
  if (values.count("n")) {
    for (const double v : values["n"]) require_integer(v, 1.0, "n");
  }
  if (values.count("cutoff")) {
    for (const double v : values["cutoff"]) {
      require_integer(v, 0.0, "cutoff");
      if (v == 1.0) throw ConfigError("'cutoff' must be 0 (auto) or at least 2");
    }
  }
  for (const auto& key : {"alpha_re", "alpha_im"}) {
    if (!values.count(key)) continue;
    if (spec.state != "coherent") {
      throw ConfigError(std::string("'") + key + "' needs state = coherent");
    }
    for (const double v : values[key]) {
      if (std::isinf(v)) throw ConfigError(std::string("'") + key + "' must be finite");
    }
  }
}

}  // namespace comsense
