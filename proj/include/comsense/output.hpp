#pragma once

#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "comsense/sweep.hpp"

namespace comsense {

/// File-system failure (CLI exit code 4).
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

std::string_view version() noexcept;

/// Numbers as %.12g; literals verbatim.
std::string format_cell(const Cell& cell);
std::string to_csv(const Table& table);

/// Writes to a temporary sibling and renames it over `path`.
void write_atomic(const std::filesystem::path& path, const std::string& content);
void write_csv(const std::filesystem::path& path, const Table& table);
void write_json(const std::filesystem::path& path, const nlohmann::json& meta);

struct PlotSeries {
  std::string label;
  std::vector<double> x;
  std::vector<double> y;
};

struct PlotSpec {
  std::string title;
  std::string x_label;
  std::string y_label;
  bool log_x = false;
  bool log_y = false;
  std::vector<PlotSeries> series;
};

std::string render_svg(const PlotSpec& plot);
/// Best effort: returns false instead of throwing.
bool write_svg(const std::filesystem::path& path, const PlotSpec& plot) noexcept;

}  // namespace comsense
