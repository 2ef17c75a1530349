#include "comsense/sweep.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <functional>
#include <optional>

#include "comsense/metrology.hpp"
#include "comsense/model.hpp"

namespace comsense {
namespace {

bool needs_state(const std::string& metric) {
  return metric == "mean_x_numeric" || metric == "var_x_numeric" || metric == "qfi_exact" ||
         metric == "qfi_numeric" || metric == "cfi" || metric == "err_prop_numeric";
}

double value_or(const std::map<std::string, double>& point, const std::string& key, double fallback) {
  const auto it = point.find(key);
  return it == point.end() ? fallback : it->second;
}

std::string error_tag(const std::exception_ptr& e) {
  try {
    std::rethrow_exception(e);
  } catch (const Error& err) {
    return std::string(code_name(err.code()));
  } catch (...) {
    return "ERROR";
  }
}

}  // namespace

std::size_t Table::column(const std::string& name) const {
  const auto it = std::find(columns.begin(), columns.end(), name);
  if (it == columns.end()) throw Error(ErrorCode::InvalidArgument, "no column '" + name + "'");
  return static_cast<std::size_t>(it - columns.begin());
}

int default_workers() {
  if (const char* env = std::getenv("COMSENSE_WORKERS")) {
    char* end = nullptr;
    const long n = std::strtol(env, &end, 10);
    if (end != env && *end == '\0' && n >= 1) return static_cast<int>(n);
  }
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : static_cast<int>(hw);
}

std::map<std::string, double> grid_point(const SweepSpec& spec, std::size_t index) {
  std::map<std::string, double> point = spec.fixed;
  for (auto it = spec.axes.rbegin(); it != spec.axes.rend(); ++it) {
    const std::size_t len = it->values.size();
    point[it->name] = it->values[index % len];
    index /= len;
  }
  return point;
}

std::vector<Cell> evaluate_cell(const SweepSpec& spec, const std::map<std::string, double>& point) {
  const double lambda = point.at("lambda");
  const double eta = value_or(point, "eta", kInfinity);
  const int n = static_cast<int>(value_or(point, "n", 1.0));
  const int cutoff = static_cast<int>(value_or(point, "cutoff", 0.0));
  StateKind kind = Superposition{};
  if (spec.state == "coherent") {
    kind = Coherent{cplx(value_or(point, "alpha_re", 0.0), value_or(point, "alpha_im", 0.0))};
  }
  const auto time = [&] {
    const auto it = point.find("s");
    return it != point.end() ? it->second : tau(lambda, n);
  };

  std::optional<EffectiveRun> run;
  std::exception_ptr run_error;
  const auto numeric = [&]() -> const EffectiveRun& {
    if (run_error) std::rethrow_exception(run_error);
    if (!run) {
      try {
        const double times[] = {time()};
        run = evolve_effective(lambda, kind, times, cutoff, true);
      } catch (...) {
        run_error = std::current_exception();
        throw;
      }
    }
    return *run;
  };
  const auto initial = [&] { return make_state(kind, numeric().cutoff); };

  std::vector<Cell> row;
  for (const auto& axis : spec.axes) row.emplace_back(point.at(axis.name));

  std::string status = "ok";
  for (const auto& metric : spec.metrics) {
    try {
      Cell cell;
      if (metric == "phase") {
        cell = std::string(phase_name(classify_phase(lambda)));
      } else if (metric == "eps_np" || metric == "eps_np_im" || metric == "E_np" ||
                 metric == "r_np") {
        const EffectiveParams ep = effective_params(lambda, eta);
        if (metric == "eps_np") cell = ep.eps_np.real();
        if (metric == "eps_np_im") cell = ep.eps_np.imag();
        if (metric == "E_np") cell = ep.E_np;
        if (metric == "r_np") cell = ep.r_np;
      } else if (metric == "lambda_eff") {
        cell = lambda_eff(lambda, eta);
      } else if (metric == "tau") {
        cell = tau(lambda, n);
      } else if (metric == "mean_x" || metric == "var_x" || metric == "susceptibility") {
        const QuadratureMoments m = analytic_moments(kind, lambda, time());
        cell = metric == "mean_x" ? m.mean_x : metric == "var_x" ? m.var_x : m.susceptibility;
      } else if (metric == "mean_x_numeric") {
        cell = numeric().trajectory.mean_x[0];
      } else if (metric == "var_x_numeric") {
        cell = numeric().trajectory.var_x[0];
      } else if (metric == "qfi_exact") {
        const QuantumState psi0 = initial();
        cell = qfi_exact(generator_decomposition(lambda, psi0.shape().cutoff()), lambda, time(), psi0);
      } else if (metric == "qfi_asymptotic") {
        const int small = std::holds_alternative<Coherent>(kind)
                              ? static_cast<int>(std::ceil(4.0 * std::norm(std::get<Coherent>(kind).alpha))) + 40
                              : 40;
        const QuantumState psi0 = make_state(kind, small);
        const FockOperator p = quadratures(small).p;
        cell = qfi_asymptotic(lambda, time(), variance(as_hermitian(p * p), psi0));
      } else if (metric == "qfi_numeric") {
        cell = qfi_numeric(lambda, time(), initial());
      } else if (metric == "cfi") {
        cell = cfi_homodyne(lambda, time(), initial());
      } else if (metric == "err_prop") {
        cell = error_propagation(lambda, time(), kind, EvaluationPath::analytic);
      } else if (metric == "err_prop_numeric") {
        cell = error_propagation(lambda, time(), kind, EvaluationPath::numeric, numeric().cutoff);
      } else if (metric == "finite_eta_ratio") {
        cell = finite_eta_ratio(lambda, eta, kind);
      } else if (metric == "working_point") {
        cell = working_point_relation(lambda, eta, WorkingPointForm::verbatim);
      } else if (metric == "working_point_variant") {
        cell = working_point_relation(lambda, eta, WorkingPointForm::variant);
      } else {
        throw Error(ErrorCode::InvalidArgument, "unknown metric " + metric);
      }
      row.push_back(std::move(cell));
    } catch (...) {
      const std::string tag = error_tag(std::current_exception());
      if (status == "ok") status = tag;
      row.emplace_back(tag);
    }
  }

  const bool used_state = std::any_of(spec.metrics.begin(), spec.metrics.end(), needs_state);
  if (!used_state) {
    row.emplace_back(0.0);
    row.emplace_back(0.0);
  } else if (run) {
    row.emplace_back(static_cast<double>(run->cutoff));
    row.emplace_back(run->trajectory.states[0].tail_mass());
  } else {
    const std::string tag = run_error ? error_tag(run_error) : std::string("ERROR");
    row.emplace_back(static_cast<double>(cutoff));
    row.emplace_back(tag);
  }
  row.emplace_back(status);
  return row;
}

SweepResult run_sweep(const SweepSpec& spec, int workers) {
  validate(spec);
  SweepResult out;
  for (const auto& axis : spec.axes) out.table.columns.push_back(axis.name);
  for (const auto& m : spec.metrics) out.table.columns.push_back(m);
  out.table.columns.insert(out.table.columns.end(), {"cutoff_used", "tail_mass", "status"});

  out.table.rows = parallel_map(spec.cells(), workers, [&](std::size_t i) {
    return evaluate_cell(spec, grid_point(spec, i));
  });
  for (const auto& row : out.table.rows) {
    if (std::get<std::string>(row.back()) != "ok") ++out.failed_cells;
  }
  return out;
}

}  // namespace comsense
