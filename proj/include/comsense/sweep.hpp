#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <exception>
#include <map>
#include <string>
#include <thread>
#include <variant>
#include <vector>

#include "comsense/config.hpp"

namespace comsense {

/// A CSV cell: a number or a literal such as a phase name or error code.
using Cell = std::variant<double, std::string>;

struct Table {
  std::vector<std::string> columns;
  std::vector<std::vector<Cell>> rows;

  /// Index of `name` in columns; throws if missing.
  std::size_t column(const std::string& name) const;
};

/// Worker count from COMSENSE_WORKERS, else the hardware concurrency.
int default_workers();

/// f(0), ..., f(count - 1) evaluated on up to `workers` threads; results keep
/// index order. The first exception thrown by any task is rethrown.
template <class F>
auto parallel_map(std::size_t count, int workers, F f) -> std::vector<decltype(f(std::size_t{}))> {
  using R = decltype(f(std::size_t{}));
  std::vector<R> results(count);
  std::vector<std::exception_ptr> errors(count);
  std::atomic<std::size_t> next{0};
  auto work = [&] {
    for (std::size_t i = next++; i < count; i = next++) {
      try {
        results[i] = f(i);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  const std::size_t n = std::min<std::size_t>(count, static_cast<std::size_t>(std::max(1, workers)));
  if (n <= 1) {
    work();
  } else {
    std::vector<std::jthread> pool;
    pool.reserve(n);
    for (std::size_t t = 0; t < n; ++t) pool.emplace_back(work);
  }
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  return results;
}

struct SweepResult {
  Table table;
  std::size_t failed_cells = 0;
};

/// Parameter values of grid cell `index`, first axis outermost.
std::map<std::string, double> grid_point(const SweepSpec& spec, std::size_t index);

/// One row: axis values, requested metrics, cutoff_used, tail_mass, status.
/// Numeric failures become error-code cells.
std::vector<Cell> evaluate_cell(const SweepSpec& spec, const std::map<std::string, double>& point);

SweepResult run_sweep(const SweepSpec& spec, int workers);

}  // namespace comsense
