#pragma once

#include <complex>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "comsense/output.hpp"
#include "comsense/sweep.hpp"

namespace comsense {

struct FigureFile {
  std::string stem;  ///< e.g. "fig3b" or "fig3b_inset"
  Table table;
  PlotSpec plot;
};

struct FigureResult {
  std::string name;
  std::vector<FigureFile> files;
  std::map<std::string, std::string> parameters;  ///< defaults merged with overrides
  std::size_t failed_cells = 0;
};

const std::vector<std::string>& figure_names();

/// Default parameters; every key may be overridden with --set key=value.
std::map<std::string, std::string> figure_defaults(const std::string& name);

/// Throws ConfigError for an unknown figure or override key.
FigureResult make_figure(const std::string& name,
                         const std::map<std::string, std::string>& overrides, int workers);

/// "1", "2i", "1+1i", "-0.5-2i".
std::complex<double> parse_complex(const std::string& text, const std::string& key);

}  // namespace comsense
