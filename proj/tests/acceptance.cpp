// Acceptance suite: one PASS/FAIL line per criterion. Exit status is non-zero if any fails.

#include <sys/wait.h>
#include <unistd.h>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include "comsense/dynamics.hpp"
#include "comsense/figures.hpp"
#include "comsense/metrology.hpp"
#include "comsense/model.hpp"
#include "comsense/spectral.hpp"
#include "oracle.hpp"

using namespace comsense;
namespace fs = std::filesystem;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

struct Outcome {
  bool pass = true;
  std::string detail;

  void require(bool ok, const std::string& what) {
    pass = pass && ok;
    if (!detail.empty()) detail += "; ";
    detail += what + (ok ? "" : " [miss]");
  }
  void note(const std::string& what) {
    if (!detail.empty()) detail += "; ";
    detail += what;
  }
};

std::string f(const char* pattern, double a) {
  char buf[96];
  std::snprintf(buf, sizeof buf, pattern, a);
  return buf;
}

int failures = 0;

void report(int id, const char* title, const std::function<Outcome()>& body) {
  const auto t0 = Clock::now();
  Outcome o;
  try {
    o = body();
  } catch (const std::exception& e) {
    o.pass = false;
    o.detail = std::string("exception: ") + e.what();
  }
  if (!o.pass) ++failures;
  std::printf("[%s] criterion %2d %s: %s (%.2f s)\n", o.pass ? "PASS" : "FAIL", id, title,
              o.detail.c_str(), seconds_since(t0));
  std::fflush(stdout);
}

double max_abs_diff(const std::vector<double>& a, const std::vector<double>& b) {
  double worst = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) worst = std::max(worst, std::abs(a[k] - b[k]));
  return worst;
}

// Reference coherent moments with baseline variance 1/4 and a Lambda^-1/2 momentum term.
oracle::MeanVar quarter_variance_coherent(double lambda, cplx alpha, double s) {
  const double L = oracle::Lambda(lambda);
  const double root = std::sqrt(L);
  const double mean = std::sqrt(2.0) / root * alpha.imag() * std::sin(root * s / 2.0) +
                      std::sqrt(2.0) * alpha.real() * std::cos(root * s / 2.0);
  const double var = 0.25 + (1.0 - lambda * lambda) / L * std::cos(root * s);
  return {mean, var};
}

Outcome spectrum() {
  Outcome o;
  const auto t0 = Clock::now();
  const HermitianSpectrum spec(hamiltonian_effective(0.6, 120).matrix());
  double worst = 0.0;
  for (int k = 0; k < 5; ++k) {
    worst = std::max(worst, std::abs((spec.values()[k + 1] - spec.values()[k]) - 0.8) / 0.8);
  }
  const double t = seconds_since(t0);
  o.require(worst <= 1e-8, f("max relative gap error %.2e", worst));
  o.require(t < 1.0, f("runtime %.3f s", t));
  return o;
}

Outcome trajectories() {
  Outcome o;
  const auto t0 = Clock::now();
  double worst_sup = 0.0, worst_quarter = 0.0, worst_heis = 0.0;
  for (const double lambda : {0.5, 0.9, 0.98}) {
    const auto times = linspace(0.0, 2.0 * tau(lambda), 200);
    const EffectiveRun run = evolve_effective(lambda, Superposition{}, times);
    std::vector<double> mean, var;
    for (const double s : times) {
      const auto m = analytic_mean_var_superposition(lambda, s);
      mean.push_back(m.mean_x);
      var.push_back(m.var_x);
    }
    worst_sup = std::max({worst_sup, max_abs_diff(run.trajectory.mean_x, mean),
                          max_abs_diff(run.trajectory.var_x, var)});

    for (const cplx alpha : {cplx(1, 0), cplx(0, 2), cplx(1, 1)}) {
      const EffectiveRun c = evolve_effective(lambda, Coherent{alpha}, times);
      std::vector<double> pm, pv, hm, hv;
      for (const double s : times) {
        const auto p = quarter_variance_coherent(lambda, alpha, s);
        pm.push_back(p.mean);
        pv.push_back(p.var);
        const auto h = oracle::heisenberg(lambda, s, oracle::coherent_moments(alpha));
        hm.push_back(h.mean);
        hv.push_back(h.var);
      }
      worst_quarter = std::max({worst_quarter, max_abs_diff(c.trajectory.mean_x, pm),
                                max_abs_diff(c.trajectory.var_x, pv)});
      worst_heis = std::max({worst_heis, max_abs_diff(c.trajectory.mean_x, hm),
                             max_abs_diff(c.trajectory.var_x, hv)});
    }
  }
  const double t = seconds_since(t0);
  o.require(worst_sup <= 1e-6, f("superposition max error %.2e", worst_sup));
  o.require(worst_quarter <= 1e-6, f("coherent vs displayed closed form max error %.3g", worst_quarter));
  o.note(f("coherent vs Heisenberg solution %.2e", worst_heis));
  o.require(t < 30.0, f("runtime %.1f s", t));
  return o;
}

Outcome peak_values() {
  Outcome o;
  const double lambda = 0.9;
  const double s1 = tau(lambda), s2 = tau(lambda, 2);
  const double sup = error_propagation(lambda, s1, Superposition{}, EvaluationPath::numeric);
  const double closed = oracle::err_prop_peak_superposition(lambda);
  o.require(std::abs(sup / closed - 1.0) <= 1e-3, f("superposition %.4f", sup) + f(" vs %.4f", closed));

  const cplx alpha(0.0, 2.0);
  const double coh = error_propagation(lambda, s1, Coherent{alpha}, EvaluationPath::numeric);
  const double target = oracle::err_prop_peak_coherent_64(lambda, alpha);
  o.require(std::abs(coh / target - 1.0) <= 1e-3, f("coherent alpha=2i %.1f", coh) + f(" vs %.1f", target));
  o.note(f("Heisenberg closed form %.1f", oracle::err_prop_peak_coherent(lambda, alpha)));

  const double sup2 = error_propagation(lambda, s2, Superposition{}, EvaluationPath::numeric);
  const double coh2 = error_propagation(lambda, s2, Coherent{alpha}, EvaluationPath::numeric);
  o.require(std::abs(sup2 / sup / 4.0 - 1.0) <= 1e-3, f("n=2 ratio %.5f", sup2 / sup));
  o.require(std::abs(coh2 / coh / 4.0 - 1.0) <= 1e-3, f("coherent n=2 ratio %.5f", coh2 / coh));
  return o;
}

Outcome qfi_consistency() {
  Outcome o;
  const double lambda = 0.9;
  const int n = initial_cutoff(lambda, Superposition{});
  const GeneratorDecomposition gd = generator_decomposition(lambda, n);
  const QuantumState psi = superposition_state(n);
  for (const double s : {0.5 * tau(lambda), tau(lambda)}) {
    const QfiTerms t = qfi_terms(gd, lambda, s, psi);
    const double num = qfi_numeric(lambda, s, psi);
    const double rel_b = std::abs(t.expanded - t.direct) / t.direct;
    const double rel_n = std::max(std::abs(num - t.direct) / t.direct, std::abs(num - t.expanded) / t.expanded);
    o.require(rel_b <= 1e-6, f("s=%.4f", s) + f(" expansion rel %.1e", rel_b));
    o.require(rel_n <= 1e-3, f("fidelity rel %.1e", rel_n));
  }
  return o;
}

Outcome asymptotic_dominance() {
  Outcome o;
  const double var_p2 = oracle::var_p2_superposition();
  std::vector<double> lambdas{0.9, 0.95, 0.98, 0.99}, Ls, exact, asym;
  for (const double lambda : lambdas) {
    const int n = initial_cutoff(lambda, Superposition{});
    exact.push_back(qfi_exact(lambda, tau(lambda), superposition_state(n)));
    asym.push_back(qfi_asymptotic(lambda, tau(lambda), var_p2));
    Ls.push_back(oracle::Lambda(lambda));
  }
  const double r95 = exact[1] / asym[1], r99 = exact[3] / asym[3];
  o.require(std::abs(r99 - 1.0) <= 0.05, f("ratio at 0.99 %.4f", r99));
  o.require(std::abs(r95 - 1.0) <= 0.15, f("ratio at 0.95 %.4f", r95));
  const double slope = oracle::loglog_slope(Ls, exact);
  o.require(std::abs(slope + 3.0) <= 0.1, f("slope of exact QFI vs Lambda %.3f", slope));
  o.note(f("asymptotic slope %.3f", oracle::loglog_slope(Ls, asym)));
  return o;
}

Outcome inequality_chain() {
  Outcome o;
  const auto t0 = Clock::now();
  const double lambda = 0.9;
  const auto times = linspace(0.0, 2.0 * tau(lambda), 50);
  const MetrologySeries m = metrology_series(lambda, times, Superposition{});
  int violations = 0;
  for (std::size_t k = 0; k < times.size(); ++k) {
    const double tol = 1e-6 * m.qfi_exact[k];
    if (!(m.qfi_exact[k] + tol >= m.cfi[k] && m.cfi[k] + tol >= m.err_prop[k])) ++violations;
  }
  o.require(violations == 0, std::to_string(violations) + " ordering violations in 50 samples");

  double worst = 0.0;
  const QuantumState psi = superposition_state(m.cutoff);
  for (const double s : {0.25 * tau(lambda), 0.5 * tau(lambda), tau(lambda), 1.5 * tau(lambda)}) {
    const double sd = std::sqrt(analytic_mean_var_superposition(lambda, s).var_x);
    const double hw = 8.0 * std::max(sd, 1.0);
    const double a = cfi_homodyne(lambda, s, psi, {hw, hw / 2000.0, 0.0, false});
    const double b = cfi_homodyne(lambda, s, psi, {hw, hw / 4000.0, 0.0, false});
    worst = std::max(worst, std::abs(a - b) / b);
  }
  o.require(worst <= 1e-3, f("CFI step-halving change %.1e", worst));
  const double t = seconds_since(t0);
  o.require(t < 120.0, f("runtime %.1f s", t));
  return o;
}

Outcome peak_ratio() {
  Outcome o;
  for (const double lambda : {0.95, 0.98}) {
    const int cut = initial_cutoff(lambda, Superposition{});
    for (const int n : {1, 2}) {
      const double s = tau(lambda, n);
      const double r = error_propagation(lambda, s, Superposition{}, EvaluationPath::analytic) /
                       qfi_exact(lambda, s, superposition_state(cut));
      o.require(std::abs(r - 0.4) <= 0.02, f("lambda=%.2f", lambda) + f(" n=%.0f", n) + f(" ratio %.4f", r));
    }
    const double ra = error_propagation(lambda, tau(lambda), Superposition{}, EvaluationPath::analytic) /
                      qfi_asymptotic(lambda, tau(lambda), oracle::var_p2_superposition());
    o.note(f("against leading-order QFI %.4f", ra));
  }
  return o;
}

Outcome finite_eta() {
  Outcome o;
  const double lambda = 0.9;
  const auto times = linspace(0.0, tau(lambda), 101);
  std::vector<double> etas{30, 100, 300}, dm, dv;
  for (const double eta : etas) {
    const Trajectory t = corrected_trajectory(lambda, eta, Superposition{}, times);
    double worst_m = 0.0, worst_v = 0.0;
    for (std::size_t k = 0; k < times.size(); ++k) {
      const auto base = analytic_mean_var_superposition(lambda, times[k]);
      worst_m = std::max(worst_m, std::abs(t.mean_x[k] - base.mean_x));
      worst_v = std::max(worst_v, std::abs(t.var_x[k] - base.var_x));
    }
    dm.push_back(worst_m);
    dv.push_back(worst_v);
  }
  const double sm = oracle::loglog_slope(etas, dm), sv = oracle::loglog_slope(etas, dv);
  o.require(std::abs(sm + 2.0) <= 0.2, f("mean correction slope %.3f", sm));
  o.require(std::abs(sv + 2.0) <= 0.2, f("variance correction slope %.3f", sv));

  std::vector<double> ratios;
  for (const double eta : {1e2, 1e3, 1e4}) ratios.push_back(finite_eta_ratio(lambda, eta, Superposition{}));
  const bool monotone = std::abs(ratios[2] - 1) < std::abs(ratios[1] - 1) &&
                        std::abs(ratios[1] - 1) < std::abs(ratios[0] - 1);
  o.require(monotone, f("ratios %.7f", ratios[0]) + f(", %.7f", ratios[1]) + f(", %.9f", ratios[2]));
  o.require(std::abs(ratios[2] - 1.0) <= 0.02, f("deviation at 1e4 %.1e", std::abs(ratios[2] - 1.0)));

  double spread = 0.0;
  for (const double eta : {30.0, 100.0, 1000.0}) {
    const double r0 = finite_eta_ratio(lambda, eta, Coherent{{0.0, 0.5}});
    for (const double im : {1.0, 2.0}) {
      spread = std::max(spread, std::abs(finite_eta_ratio(lambda, eta, Coherent{{0.0, im}}) - r0));
    }
  }
  o.require(spread <= 1e-6, f("coherent Im(alpha) spread %.1e", spread));
  return o;
}

Outcome steady() {
  Outcome o;
  double worst = 0.0;
  for (int i = 0; i < 10; ++i) {
    for (int j = 0; j < 10; ++j) {
      PhysicalParams p;
      p.omega_c = 110.0;
      p.omega_l = 100.0;
      p.gamma_c = 1.0;
      p.gamma_m = 0.01;
      p.g = 1e-3 * (1 + i);
      p.eps_l = 2.0 + 4.0 * j;
      const SteadyState ss = steady_state(p);
      worst = std::max(worst, steady_state_residual(p, ss.mean_a, ss.mean_b));
    }
  }
  o.require(worst <= 1e-10, f("max residual %.1e", worst));

  PhysicalParams p;
  p.omega_c = 110.0;
  p.omega_l = 100.0;
  p.gamma_c = 1.0;
  p.eps_l = 7.0;
  const SteadyState ss = steady_state(p);
  const cplx closed = p.eps_l / cplx(p.gamma_c / 2.0, p.delta());
  const double err = std::max(std::abs(ss.mean_a - closed), std::abs(ss.mean_b));
  o.require(err <= 1e-12, f("g=0 error %.1e", err));
  return o;
}

Outcome sw_structure() {
  Outcome o;
  const double lambda = 0.5, eta = 20.0;
  double anti = 0.0;
  for (const int order : {1, 3}) {
    const Matrix s = sw_generator(lambda, eta, 8, 30, order).matrix();
    anti = std::max(anti, (s + s.adjoint()).norm());
  }
  o.require(anti <= 1e-12, f("anti-Hermiticity %.1e", anti));
  const FockOperator h = hamiltonian_linearized(lambda, eta, 8, 30);
  const double r1 = sw_offdiagonal_residual(h, sw_generator(lambda, eta, 8, 30, 1), 3, 9);
  const double r3 = sw_offdiagonal_residual(h, sw_generator(lambda, eta, 8, 30, 3), 3, 9);
  o.require(r3 < r1, f("residual order 3 %.4f", r3) + f(" < order 1 %.4f", r1));

  double ladder = 0.0;
  for (const double l : {0.5, 0.9}) {
    const GeneratorDecomposition gd = generator_decomposition(l, 60);
    for (const int n : {0, 1}) {
      const double ln = std::pow(gd.Lambda, n);
      const auto rel = [](const FockOperator& a, const FockOperator& b) {
        const Matrix da = interior_block(a, 0.5), db = interior_block(b, 0.5);
        return (da - db).norm() / db.norm();
      };
      ladder = std::max(ladder, rel(nested_commutator(gd, 2 * n + 1), (kI * ln) * gd.C));
      ladder = std::max(ladder, rel(nested_commutator(gd, 2 * n + 2), -ln * gd.D));
    }
  }
  o.require(ladder <= 1e-6, f("commutator ladder %.1e", ladder));
  return o;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Outcome cli_suite() {
  Outcome o;
  const fs::path root = fs::temp_directory_path() / ("comsense_accept_" + std::to_string(::getpid()));
  fs::remove_all(root);
  const auto pass = [&](int workers, const fs::path& dir) {
    int bad = 0;
    for (const auto& name : figure_names()) {
      const std::string cmd = std::string(COMSENSE_BIN) + " figure " + name + " --workers " +
                              std::to_string(workers) + " --out " + dir.string() + " >/dev/null 2>&1";
      const int status = std::system(cmd.c_str());
      if (!WIFEXITED(status) || WEXITSTATUS(status) != 0) ++bad;
    }
    return bad;
  };
  auto t0 = Clock::now();
  const int bad8 = pass(8, root / "w8");
  const double t8 = seconds_since(t0);
  t0 = Clock::now();
  const int bad1 = pass(1, root / "w1");
  const double t1 = seconds_since(t0);
  o.require(bad8 == 0 && bad1 == 0, std::to_string(bad8 + bad1) + " failed figure runs");
  o.require(t8 < 300.0, f("eight figures in %.1f s with 8 workers", t8));
  o.note(f("%.1f s with 1 worker", t1));

  int files = 0, differ = 0;
  for (const auto& entry : fs::directory_iterator(root / "w1")) {
    if (entry.path().extension() != ".csv") continue;
    ++files;
    if (slurp(entry.path()) != slurp(root / "w8" / entry.path().filename())) ++differ;
  }
  o.require(files >= 8 && differ == 0, std::to_string(files) + " CSV files, " + std::to_string(differ) + " differ");
  fs::remove_all(root);
  return o;
}

}  // namespace

int main() {
  report(1, "spectrum", spectrum);
  report(2, "trajectory oracle", trajectories);
  report(3, "peak values", peak_values);
  report(4, "QFI consistency", qfi_consistency);
  report(5, "asymptotic dominance", asymptotic_dominance);
  report(6, "inequality chain", inequality_chain);
  report(7, "ratio at peaks", peak_ratio);
  report(8, "finite-eta scalings", finite_eta);
  report(9, "steady state", steady);
  report(10, "SW structure", sw_structure);
  report(11, "CLI determinism and figures", cli_suite);
  std::printf("%d of 11 criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
