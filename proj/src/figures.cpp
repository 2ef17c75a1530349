#include "comsense/figures.hpp"

#include <algorithm>
#include <atomic>
#include <cctype>
#include <cstdio>
#include <cmath>
#include <functional>
#include <numbers>

#include "comsense/config.hpp"
#include "comsense/metrology.hpp"
#include "comsense/model.hpp"

namespace comsense {
namespace {

using Params = std::map<std::string, std::string>;

class Reader {
 public:
  explicit Reader(const Params& p) : p_(p) {}

  double number(const std::string& key) const { return parse_number(p_.at(key), key); }
  int count(const std::string& key) const {
    const double v = number(key);
    if (!(v >= 1.0) || v != std::floor(v)) throw ConfigError("'" + key + "' must be a positive integer");
    return static_cast<int>(v);
  }
  std::vector<double> list(const std::string& key) const { return parse_axis(p_.at(key)); }
  std::vector<cplx> alphas(const std::string& key) const {
    std::vector<cplx> out;
    std::string item;
    for (const char c : p_.at(key) + ",") {
      if (c != ',') {
        item += c;
        continue;
      }
      out.push_back(parse_complex(item, key));
      item.clear();
    }
    return out;
  }
  const std::string& text(const std::string& key) const { return p_.at(key); }

 private:
  const Params& p_;
};

struct Failures {
  std::atomic<std::size_t> count{0};
};

template <class F>
Cell guarded(Failures& failures, F fn) {
  try {
    return Cell(fn());
  } catch (const Error& e) {
    ++failures.count;
    return std::string(code_name(e.code()));
  }
}

double number_of(const Cell& c) {
  const auto* v = std::get_if<double>(&c);
  return v ? *v : std::numeric_limits<double>::quiet_NaN();
}

std::string alpha_label(cplx a) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "alpha=%g%+gi", a.real(), a.imag());
  return buf;
}

std::string value_label(const char* key, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%s=%g", key, v);
  return buf;
}

/// Rows of `table` grouped by the value in `group_col`, plotted as y_col vs x_col.
std::vector<PlotSeries> grouped(const Table& table, const std::string& group_col,
                                const std::string& x_col, const std::string& y_col,
                                const std::function<std::string(const std::vector<Cell>&)>& label,
                                const std::function<bool(const std::vector<Cell>&)>& keep = {}) {
  const std::size_t g = table.column(group_col), x = table.column(x_col), y = table.column(y_col);
  std::vector<PlotSeries> out;
  std::vector<double> keys;
  for (const auto& row : table.rows) {
    if (keep && !keep(row)) continue;
    const double key = number_of(row[g]);
    auto it = std::find(keys.begin(), keys.end(), key);
    if (it == keys.end()) {
      keys.push_back(key);
      out.push_back({label(row), {}, {}});
      it = keys.end() - 1;
    }
    auto& s = out[static_cast<std::size_t>(it - keys.begin())];
    s.x.push_back(number_of(row[x]));
    s.y.push_back(number_of(row[y]));
  }
  return out;
}

PlotSeries column_series(const Table& table, const std::string& x_col, const std::string& y_col) {
  PlotSeries s{y_col, {}, {}};
  const std::size_t x = table.column(x_col), y = table.column(y_col);
  for (const auto& row : table.rows) {
    s.x.push_back(number_of(row[x]));
    s.y.push_back(number_of(row[y]));
  }
  return s;
}

double working_tau(double lambda0, const std::string& form) {
  if (form == "text") return tau(lambda0, 1);
  if (form == "caption") {
    if (!(lambda0 < 1.0)) throw Error(ErrorCode::UnstableRegime, "unstable regime: lambda0 >= 1");
    return std::numbers::pi / (1.0 - lambda0);
  }
  throw ConfigError("'lambda0_form' must be text or caption");
}

QuantumState coherent_for_generator(cplx alpha) {
  const int n = static_cast<int>(std::ceil(4.0 * std::norm(alpha))) + 40;
  return coherent_state(alpha, n);
}

// ---------------------------------------------------------------------------

FigureResult fig2(const Reader& r, int workers, Failures& fail) {
  const auto lambdas = linspace(r.number("lambda_min"), r.number("lambda_max"), r.count("points"));
  Table t{{"lambda", "eps_np_re", "eps_np_im", "eps_real", "phase"}, {}};
  t.rows = parallel_map(lambdas.size(), workers, [&](std::size_t i) {
    const double l = lambdas[i];
    std::vector<Cell> row{l};
    const Cell eps = guarded(fail, [&] { return effective_params(l, kInfinity).eps_np.real(); });
    const Cell im = guarded(fail, [&] { return effective_params(l, kInfinity).eps_np.imag(); });
    row.insert(row.end(), {eps, im});
    row.emplace_back(number_of(im) == 0.0 ? 1.0 : 0.0);
    row.push_back(guarded(fail, [&] { return std::string(phase_name(classify_phase(l))); }));
    return row;
  });
  PlotSpec plot{"Excitation frequency", "lambda", "eps_np / omega_m", false, false,
                {column_series(t, "lambda", "eps_np_re"), column_series(t, "lambda", "eps_np_im")}};
  return {"fig2", {{"fig2", std::move(t), std::move(plot)}}, {}, 0};
}

FigureResult fig3a(const Reader& r, int workers, Failures& fail) {
  const auto lambda0s = r.list("lambda0");
  const std::string form = r.text("lambda0_form");
  const auto grid = linspace(r.number("lambda_min"), r.number("lambda_max"), r.count("points"));

  struct Job {
    double lambda0, lambda;
    bool marker;
  };
  std::vector<Job> jobs;
  for (const double l0 : lambda0s) {
    std::vector<Job> block;
    for (const double l : grid) block.push_back({l0, l, false});
    block.push_back({l0, l0, true});
    std::stable_sort(block.begin(), block.end(),
                     [](const Job& a, const Job& b) { return a.lambda < b.lambda; });
    jobs.insert(jobs.end(), block.begin(), block.end());
  }
  working_tau(lambda0s.empty() ? 0.5 : lambda0s.front(), form);

  Table main{{"lambda0", "lambda", "tau", "mean_x", "susceptibility", "marker"}, {}};
  main.rows = parallel_map(jobs.size(), workers, [&](std::size_t i) {
    const Job& j = jobs[i];
    std::vector<Cell> row{j.lambda0, j.lambda};
    const Cell s = guarded(fail, [&] { return working_tau(j.lambda0, form); });
    row.push_back(s);
    row.push_back(guarded(fail, [&] {
      return analytic_mean_var_superposition(j.lambda, number_of(s)).mean_x;
    }));
    row.push_back(guarded(fail, [&] {
      return analytic_mean_var_superposition(j.lambda, number_of(s)).susceptibility;
    }));
    row.emplace_back(j.marker ? 1.0 : 0.0);
    return row;
  });

  Table inset{{"lambda", "tau", "susceptibility_at_working_point"}, {}};
  inset.rows = parallel_map(grid.size(), workers, [&](std::size_t i) {
    const double l = grid[i];
    const Cell s = guarded(fail, [&] { return working_tau(l, form); });
    return std::vector<Cell>{l, s, guarded(fail, [&] {
                               return analytic_mean_var_superposition(l, number_of(s)).susceptibility;
                             })};
  });

  const auto label = [](const std::vector<Cell>& row) { return value_label("lambda0", number_of(row[0])); };
  const auto not_marker = [](const std::vector<Cell>& row) { return number_of(row[5]) == 0.0; };
  PlotSpec p1{"<X> after the working-point time", "lambda", "<X>", false, false,
              grouped(main, "lambda0", "lambda", "mean_x", label, not_marker)};
  PlotSpec p2{"Susceptibility at lambda0 = lambda", "lambda", "d<X>/dlambda", false, false,
              {column_series(inset, "lambda", "susceptibility_at_working_point")}};
  return {"fig3a",
          {{"fig3a", std::move(main), std::move(p1)}, {"fig3a_inset", std::move(inset), std::move(p2)}},
          {},
          0};
}

FigureResult fig3b(const Reader& r, int workers, Failures& fail) {
  const double lambda = r.number("lambda");
  const auto times = linspace(0.0, r.number("periods") * tau(lambda, 1), r.count("points"));
  const QuantumState psi0 = superposition_state(30);
  const GeneratorDecomposition gd = generator_decomposition(lambda, 30);

  Table main{{"s", "qfi_exact", "qfi_asymptotic", "err_prop"}, {}};
  main.rows = parallel_map(times.size(), workers, [&](std::size_t i) {
    const double s = times[i];
    return std::vector<Cell>{
        s, guarded(fail, [&] { return qfi_exact(gd, lambda, s, psi0); }),
        guarded(fail, [&] { return qfi_asymptotic(lambda, s, 1.25); }),
        guarded(fail, [&] {
          return error_propagation(lambda, s, Superposition{}, EvaluationPath::analytic);
        })};
  });

  const auto lambdas =
      linspace(r.number("inset_lambda_min"), r.number("inset_lambda_max"), r.count("inset_points"));
  Table inset{{"lambda", "tau", "err_prop", "qfi_exact", "ratio", "ratio_asymptotic"}, {}};
  inset.rows = parallel_map(lambdas.size(), workers, [&](std::size_t i) {
    const double l = lambdas[i];
    std::vector<Cell> row{l};
    const Cell s = guarded(fail, [&] { return tau(l, 1); });
    const Cell e = guarded(fail, [&] {
      return error_propagation(l, number_of(s), Superposition{}, EvaluationPath::analytic);
    });
    const Cell q = guarded(fail, [&] { return qfi_exact(l, number_of(s), superposition_state(30)); });
    row.insert(row.end(), {s, e, q});
    row.push_back(guarded(fail, [&] {
      if (!std::isfinite(number_of(q))) throw Error(ErrorCode::InvalidArgument, "missing QFI");
      return number_of(e) / number_of(q);
    }));
    row.push_back(guarded(fail, [&] {
      return number_of(e) / qfi_asymptotic(l, number_of(s), 1.25);
    }));
    return row;
  });

  PlotSpec p1{"QFI and error propagation vs time", "s", "Fisher information", false, false,
              {column_series(main, "s", "qfi_exact"), column_series(main, "s", "qfi_asymptotic"),
               column_series(main, "s", "err_prop")}};
  PlotSpec p2{"Error propagation over QFI at tau_1", "lambda", "ratio", false, false,
              {column_series(inset, "lambda", "ratio"), column_series(inset, "lambda", "ratio_asymptotic")}};
  return {"fig3b",
          {{"fig3b", std::move(main), std::move(p1)}, {"fig3b_inset", std::move(inset), std::move(p2)}},
          {},
          0};
}

CorrectionPath correction_path(const std::string& text) {
  if (text == "analytic") return CorrectionPath::analytic_lambda_eff;
  if (text == "two_mode") return CorrectionPath::two_mode_numeric;
  throw ConfigError("'path' must be analytic or two_mode");
}

FigureResult fig4(const Reader& r, int workers, Failures& fail) {
  const auto etas = r.list("eta");
  const auto lambdas = linspace(r.number("lambda_min"), r.number("lambda_max"), r.count("points"));
  const CorrectionPath path = correction_path(r.text("path"));
  const std::size_t n = etas.size() * lambdas.size();

  Table main{{"eta", "lambda", "ratio"}, {}};
  main.rows = parallel_map(n, workers, [&](std::size_t i) {
    const double eta = etas[i / lambdas.size()], l = lambdas[i % lambdas.size()];
    return std::vector<Cell>{eta, l,
                             guarded(fail, [&] { return finite_eta_ratio(l, eta, Superposition{}, path); })};
  });
  Table inset{{"eta", "lambda", "log10_lambda0", "log10_lambda0_variant"}, {}};
  inset.rows = parallel_map(n, workers, [&](std::size_t i) {
    const double eta = etas[i / lambdas.size()], l = lambdas[i % lambdas.size()];
    return std::vector<Cell>{
        eta, l, guarded(fail, [&] { return working_point_relation(l, eta, WorkingPointForm::verbatim); }),
        guarded(fail, [&] { return working_point_relation(l, eta, WorkingPointForm::variant); })};
  });
  const auto label = [](const std::vector<Cell>& row) { return value_label("eta", number_of(row[0])); };
  PlotSpec p1{"Finite-eta error propagation ratio", "lambda", "ratio", false, false,
              grouped(main, "eta", "lambda", "ratio", label)};
  PlotSpec p2{"Working-point relation", "lambda", "log10 Lambda_lambda0", false, false,
              grouped(inset, "eta", "lambda", "log10_lambda0", label)};
  return {"fig4",
          {{"fig4", std::move(main), std::move(p1)}, {"fig4_inset", std::move(inset), std::move(p2)}},
          {},
          0};
}

FigureResult fig5(const Reader& r, int workers, Failures& fail) {
  const double lambda = r.number("lambda");
  const auto alphas = r.alphas("alpha");
  const auto times = linspace(0.0, r.number("periods") * tau(lambda, 1), r.count("points"));
  const std::size_t n = alphas.size() * times.size();

  std::vector<QuantumState> states;
  std::vector<GeneratorDecomposition> gds;
  for (const cplx a : alphas) {
    states.push_back(coherent_for_generator(a));
    gds.push_back(generator_decomposition(lambda, states.back().shape().cutoff()));
  }
  Table t{{"alpha_re", "alpha_im", "s", "qfi_exact", "err_prop"}, {}};
  t.rows = parallel_map(n, workers, [&](std::size_t i) {
    const std::size_t k = i / times.size();
    const double s = times[i % times.size()];
    return std::vector<Cell>{
        alphas[k].real(), alphas[k].imag(), s,
        guarded(fail, [&] { return qfi_exact(gds[k], lambda, s, states[k]); }),
        guarded(fail, [&] {
          return error_propagation(lambda, s, Coherent{alphas[k]}, EvaluationPath::analytic);
        })};
  });
  std::vector<PlotSeries> series;
  for (std::size_t k = 0; k < alphas.size(); ++k) {
    PlotSeries s{alpha_label(alphas[k]), {}, {}};
    for (std::size_t j = 0; j < times.size(); ++j) {
      s.x.push_back(times[j]);
      s.y.push_back(number_of(t.rows[k * times.size() + j][3]));
    }
    series.push_back(std::move(s));
  }
  PlotSpec plot{"Coherent-state QFI vs time", "s", "QFI", false, false, std::move(series)};
  return {"fig5", {{"fig5", std::move(t), std::move(plot)}}, {}, 0};
}

FigureResult fig6(const Reader& r, int workers, Failures& fail) {
  const double lambda = r.number("lambda");
  const auto re = linspace(r.number("alpha_re_min"), r.number("alpha_re_max"), r.count("points"));
  const auto im = r.list("alpha_im");
  const double s = tau(lambda, 1);
  const std::size_t n = im.size() * re.size();

  Table t{{"alpha_re", "alpha_im", "tau", "err_prop", "qfi_exact", "ratio"}, {}};
  t.rows = parallel_map(n, workers, [&](std::size_t i) {
    const cplx a(re[i % re.size()], im[i / re.size()]);
    const Cell e =
        guarded(fail, [&] { return error_propagation(lambda, s, Coherent{a}, EvaluationPath::analytic); });
    const Cell q = guarded(fail, [&] { return qfi_exact(lambda, s, coherent_for_generator(a)); });
    return std::vector<Cell>{a.real(), a.imag(), s, e, q, guarded(fail, [&] {
                               if (!std::isfinite(number_of(q)) || !std::isfinite(number_of(e))) {
                                 throw Error(ErrorCode::InvalidArgument, "missing metric");
                               }
                               return number_of(e) / number_of(q);
                             })};
  });
  const auto label = [](const std::vector<Cell>& row) { return value_label("Im(alpha)", number_of(row[1])); };
  PlotSpec plot{"Error propagation over QFI at tau_1", "Re(alpha)", "ratio", false, false,
                grouped(t, "alpha_im", "alpha_re", "ratio", label)};
  return {"fig6", {{"fig6", std::move(t), std::move(plot)}}, {}, 0};
}

FigureResult fig7(const Reader& r, int workers, Failures& fail) {
  const double lambda = r.number("lambda");
  const auto alphas = r.alphas("alpha");
  const int points = r.count("points");
  std::vector<double> etas = linspace(r.number("log10_eta_min"), r.number("log10_eta_max"), points);
  for (double& e : etas) e = std::pow(10.0, e);
  const CorrectionPath path = correction_path(r.text("path"));
  const std::size_t n = alphas.size() * etas.size();

  Table t{{"alpha_re", "alpha_im", "eta", "ratio"}, {}};
  t.rows = parallel_map(n, workers, [&](std::size_t i) {
    const cplx a = alphas[i / etas.size()];
    const double eta = etas[i % etas.size()];
    return std::vector<Cell>{a.real(), a.imag(), eta,
                             guarded(fail, [&] { return finite_eta_ratio(lambda, eta, Coherent{a}, path); })};
  });
  std::vector<PlotSeries> series;
  for (std::size_t k = 0; k < alphas.size(); ++k) {
    PlotSeries s{alpha_label(alphas[k]), {}, {}};
    for (std::size_t j = 0; j < etas.size(); ++j) {
      s.x.push_back(etas[j]);
      s.y.push_back(number_of(t.rows[k * etas.size() + j][3]));
    }
    series.push_back(std::move(s));
  }
  PlotSpec plot{"Finite-eta ratio, coherent states", "eta", "ratio", true, false, std::move(series)};
  return {"fig7", {{"fig7", std::move(t), std::move(plot)}}, {}, 0};
}

FigureResult fig8(const Reader& r, int /*workers*/, Failures& fail) {
  const double lambda = r.number("lambda");
  const auto times = linspace(0.0, r.number("periods") * tau(lambda, 1), r.count("points"));
  Table t{{"s", "mean_x", "var_x", "qfi_exact", "qfi_asymptotic", "cfi", "err_prop"}, {}};
  try {
    const MetrologySeries m = metrology_series(lambda, times, Superposition{});
    for (std::size_t k = 0; k < times.size(); ++k) {
      t.rows.push_back({times[k], m.mean_x[k], m.var_x[k], m.qfi_exact[k], m.qfi_asymptotic[k],
                        m.cfi[k], m.err_prop[k]});
    }
  } catch (const Error& e) {
    const std::string tag(code_name(e.code()));
    for (const double s : times) {
      t.rows.push_back({s, tag, tag, tag, tag, tag, tag});
      fail.count += 6;
    }
  }
  PlotSpec plot{"QFI, CFI and error propagation", "s", "Fisher information", false, false,
                {column_series(t, "s", "qfi_exact"), column_series(t, "s", "cfi"),
                 column_series(t, "s", "err_prop")}};
  return {"fig8", {{"fig8", std::move(t), std::move(plot)}}, {}, 0};
}

}  // namespace

const std::vector<std::string>& figure_names() {
  static const std::vector<std::string> names{"fig2", "fig3a", "fig3b", "fig4",
                                              "fig5", "fig6",  "fig7",  "fig8"};
  return names;
}

std::map<std::string, std::string> figure_defaults(const std::string& name) {
  if (name == "fig2") return {{"lambda_min", "0"}, {"lambda_max", "1.2"}, {"points", "400"}};
  if (name == "fig3a") {
    return {{"lambda0", "0.9, 0.95, 0.98"}, {"lambda0_form", "text"}, {"lambda_min", "0.85"},
            {"lambda_max", "0.995"}, {"points", "400"}};
  }
  if (name == "fig3b") {
    return {{"lambda", "0.98"}, {"periods", "2"}, {"points", "400"}, {"inset_lambda_min", "0.9"},
            {"inset_lambda_max", "0.995"}, {"inset_points", "100"}};
  }
  if (name == "fig4") {
    return {{"eta", "100, 1000, 10000"}, {"lambda_min", "0.9"}, {"lambda_max", "0.995"},
            {"points", "400"}, {"path", "analytic"}};
  }
  if (name == "fig5") {
    return {{"lambda", "0.98"}, {"alpha", "1, 1i, 2i, 1+1i"}, {"periods", "2"}, {"points", "400"}};
  }
  if (name == "fig6") {
    return {{"lambda", "0.98"}, {"alpha_re_min", "0"}, {"alpha_re_max", "2"}, {"points", "41"},
            {"alpha_im", "0.5, 1, 2"}};
  }
  if (name == "fig7") {
    return {{"lambda", "0.98"}, {"alpha", "1i, 2i, 1+1i, 2+1i"}, {"log10_eta_min", "1"},
            {"log10_eta_max", "4"}, {"points", "400"}, {"path", "analytic"}};
  }
  if (name == "fig8") return {{"lambda", "0.9"}, {"periods", "3"}, {"points", "400"}};
  throw ConfigError("unknown figure '" + name + "'");
}

FigureResult make_figure(const std::string& name, const std::map<std::string, std::string>& overrides,
                         int workers) {
  Params params = figure_defaults(name);
  for (const auto& [key, value] : overrides) {
    if (!params.count(key)) throw ConfigError("unknown key '" + key + "' for " + name);
    params[key] = value;
  }
  const Reader r(params);
  for (const char* key : {"lambda"}) {
    if (params.count(key) && !(r.number(key) >= 0.0 && r.number(key) < 1.0)) {
      throw ConfigError("unstable regime: lambda = " + params.at(key) + " must lie in [0, 1)");
    }
  }

  Failures fail;
  FigureResult out;
  try {
    if (name == "fig2") out = fig2(r, workers, fail);
    if (name == "fig3a") out = fig3a(r, workers, fail);
    if (name == "fig3b") out = fig3b(r, workers, fail);
    if (name == "fig4") out = fig4(r, workers, fail);
    if (name == "fig5") out = fig5(r, workers, fail);
    if (name == "fig6") out = fig6(r, workers, fail);
    if (name == "fig7") out = fig7(r, workers, fail);
    if (name == "fig8") out = fig8(r, workers, fail);
  } catch (const std::out_of_range&) {
    throw ConfigError("missing parameter for " + name);
  } catch (const Error& e) {
    if (e.code() == ErrorCode::InvalidArgument || e.code() == ErrorCode::UnstableRegime ||
        e.code() == ErrorCode::InvalidRegime) {
      throw ConfigError(e.what());
    }
    throw;
  }
  out.name = name;
  out.parameters = params;
  out.failed_cells = fail.count;
  return out;
}

std::complex<double> parse_complex(const std::string& text, const std::string& key) {
  std::string t;
  for (const char c : text) {
    if (!std::isspace(static_cast<unsigned char>(c))) t += c;
  }
  if (t.empty()) throw ConfigError("'" + key + "': empty complex number");
  if (t.back() != 'i') return {parse_number(t, key), 0.0};
  t.pop_back();
  std::size_t split = std::string::npos;
  for (std::size_t k = 1; k < t.size(); ++k) {
    if ((t[k] == '+' || t[k] == '-') && t[k - 1] != 'e' && t[k - 1] != 'E') split = k;
  }
  const auto imag = [&](const std::string& part) {
    if (part.empty() || part == "+") return 1.0;
    if (part == "-") return -1.0;
    return parse_number(part, key);
  };
  if (split == std::string::npos) return {0.0, imag(t)};
  return {parse_number(t.substr(0, split), key), imag(t.substr(split))};
}

}  // namespace comsense
