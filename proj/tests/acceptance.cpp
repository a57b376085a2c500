// Acceptance suite: exercises every headline requirement end to end and
// prints one PASS/FAIL line per criterion. Exit code = number of failures.

#include <chrono>
#include <cmath>
#include <complex>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <map>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include "svl/analytic.hpp"
#include "svl/problem.hpp"
#include "svl/quadrature.hpp"
#include "svl/sim.hpp"

#ifndef SVL_CLI_PATH
#define SVL_CLI_PATH "svl"
#endif

using namespace svl;

namespace {

struct Check {
  bool ok = true;
  std::string detail;

  void require(bool condition, const std::string& message) {
    if (!condition) {
      ok = false;
      if (!detail.empty()) detail += "; ";
      detail += message;
    }
  }
};

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.4e", v);
  return buf;
}

double rel(double value, double reference) {
  return std::abs(value - reference) / std::abs(reference);
}

QuadraticProblem clustered_spectrum_instance() {
  SpectrumSpec spec;
  spec.eigenvalues = Eigen::VectorXd{{0.1807, 0.1951, 0.1998, 0.2033, 0.2194}};
  spec.mode_powers = Eigen::VectorXd{{0.0019, 0.0019, 0.0022, 0.0020, 0.0022}};
  return build_spectrum_instance(spec, 1000, 38);
}

QuadraticProblem dispersed_spectrum_instance() {
  SpectrumSpec spec;
  spec.eigenvalues = Eigen::VectorXd{{0.0074, 0.0947, 0.1322, 0.2763, 0.3422}};
  spec.mode_powers =
      Eigen::VectorXd{{4.7496e-06, 1.7296e-05, 1.4069e-04, 4.8573e-05, 1.3472e-04}};
  return build_spectrum_instance(spec, 10, 38);
}

AlgorithmSpec spec_for(Algorithm algo, double gamma, double alpha) {
  return make_spec(algo, gamma, algo == Algorithm::sgd ? 0.0 : alpha);
}

// ---- criterion 1: reference variances through the CLI ---------------------

Check criterion_theory_column() {
  Check c;
  const std::string csv = "/tmp/svl_acceptance_theory.csv";
  const std::string cmd =
      std::string(SVL_CLI_PATH) +
      " theory --spectrum 0.1807,0.1951,0.1998,0.2033,0.2194"
      " --powers 0.0019,0.0019,0.0022,0.0020,0.0022 -n 1000"
      " --gamma 5e-4 --alpha 0.8 -o " + csv + " > /dev/null";
  c.require(std::system(cmd.c_str()) == 0, "theory subcommand failed");
  if (!c.ok) return c;

  const std::map<std::pair<std::string, std::string>, double> expected{
      {{"sgd", "with_replacement"}, 1.2787e-05},
      {{"sgd", "random_reshuffle"}, 4.1518e-07},
      {{"sgd", "shuffle_once"}, 2.1278e-07},
      {{"sgdm", "with_replacement"}, 6.3935e-05},
      {{"sgdm", "random_reshuffle"}, 9.3300e-06},
      {{"sgdm", "shuffle_once"}, 5.1800e-06},
      {{"snag", "with_replacement"}, 6.3909e-05},
      {{"snag", "random_reshuffle"}, 9.3230e-06},
      {{"snag", "shuffle_once"}, 5.1760e-06},
  };
  std::ifstream in(csv);
  std::string header;
  std::getline(in, header);
  std::string line;
  int matched = 0;
  while (std::getline(in, line)) {
    std::stringstream ls(line);
    std::string algo, gamma, alpha, scheme, method, total;
    std::getline(ls, algo, ',');
    std::getline(ls, gamma, ',');
    std::getline(ls, alpha, ',');
    std::getline(ls, scheme, ',');
    std::getline(ls, method, ',');
    std::getline(ls, total, ',');
    const auto it = expected.find({algo, scheme});
    if (it == expected.end()) continue;
    ++matched;
    const double r = rel(std::stod(total), it->second);
    c.require(r <= 0.03, algo + "-" + scheme + " off by " + fmt(r));
  }
  c.require(matched == 9, "expected 9 rows, matched " + std::to_string(matched));
  if (c.ok) c.detail = "nine values within 3%";
  return c;
}

// ---- criterion 2: approximation identities --------------------------------

Check criterion_approximations() {
  Check c;
  const auto problem = clustered_spectrum_instance();
  const auto a8 = variance_approx(problem, make_spec(Algorithm::sgdm, 5e-4, 0.8),
                                  SamplingScheme::with_replacement);
  const auto a9 = variance_approx(problem, make_spec(Algorithm::sgdm, 5e-4, 0.9),
                                  SamplingScheme::with_replacement);
  c.require(rel(a8.total, 6.3933e-05) <= 0.01,
            "leading-order value " + fmt(a8.total) + " vs 6.3933e-05");
  c.require(rel(a9.total, 1.2787e-04) <= 0.01,
            "alpha=0.9 value " + fmt(a9.total) + " vs 1.2787e-04");
  c.require(rel(a9.total, 2.0 * a8.total) <= 1e-14, "alpha ratio not exactly 2");

  const double e8 = variance_exact(problem, make_spec(Algorithm::sgdm, 5e-4, 0.8),
                                   SamplingScheme::with_replacement)
                        .total;
  const double e9 = variance_exact(problem, make_spec(Algorithm::sgdm, 5e-4, 0.9),
                                   SamplingScheme::with_replacement)
                        .total;
  c.require(std::abs(e9 / e8 - 2.0) <= 0.01,
            "exact alpha ratio " + fmt(e9 / e8) + " not 2.000 +- 1%");
  if (c.ok)
    c.detail = "approx " + fmt(a8.total) + ", exact ratio " + fmt(e9 / e8);
  return c;
}

// ---- criterion 3: squared-stepsize scaling of shuffle-once ----------------

Check criterion_gamma_squared_scaling() {
  Check c;
  const auto problem = dispersed_spectrum_instance();
  const double lo = variance_exact(problem, make_spec(Algorithm::sgdm, 2e-4, 0.8),
                                   SamplingScheme::shuffle_once)
                        .total;
  const double hi = variance_exact(problem, make_spec(Algorithm::sgdm, 2e-3, 0.8),
                                   SamplingScheme::shuffle_once)
                        .total;
  const double ratio = hi / lo;
  c.require(ratio >= 99.0 && ratio <= 101.0, "ratio " + fmt(ratio) + " outside 100 +- 1%");
  c.require(rel(lo, 2.6210e-11) <= 0.03, "low value " + fmt(lo) + " vs 2.6210e-11");
  c.require(rel(hi, 2.6262e-09) <= 0.03, "high value " + fmt(hi) + " vs 2.6262e-09");
  if (c.ok) c.detail = "ratio " + fmt(ratio);
  return c;
}

// ---- criterion 4: oracle equivalence ---------------------------------------

QuadraticProblem dense_instance(int n, int d, std::uint64_t seed) {
  CounterRng rng(seed);
  std::vector<QuadraticComponent> components;
  for (int i = 0; i < n; ++i) {
    Eigen::MatrixXd m(d, d);
    for (int r = 0; r < d; ++r)
      for (int col = 0; col < d; ++col) m(r, col) = rng.next_gaussian();
    Eigen::VectorXd b(d);
    for (int r = 0; r < d; ++r) b[r] = rng.next_gaussian();
    components.push_back(
        {m * m.transpose() / d + 0.3 * Eigen::MatrixXd::Identity(d, d), b});
  }
  return assemble(std::move(components));
}

Check criterion_oracles() {
  Check c;
  // 36 Lyapunov points: sgd over 12 stepsizes, sgdm/snag over 3 alphas x 4.
  const auto grid_problem = dense_instance(8, 3, 404);
  const double lam_max = grid_problem.eigenvalues[2];
  int points = 0;
  const double sgd_targets[] = {1e-5, 3e-5, 1e-4, 3e-4, 1e-3, 3e-3,
                                1e-2, 3e-2, 0.1,  0.3,  1.0,  1.8};
  for (double gl : sgd_targets) {
    const auto spec = make_spec(Algorithm::sgd, gl / lam_max, 0.0);
    const double oracle = lyapunov_oracle(grid_problem, spec);
    const double closed =
        variance_exact(grid_problem, spec, SamplingScheme::with_replacement).total;
    c.require(rel(oracle, closed) <= 1e-9,
              "sgd gl=" + fmt(gl) + " rel " + fmt(rel(oracle, closed)));
    ++points;
  }
  for (auto algo : {Algorithm::sgdm, Algorithm::snag})
    for (double alpha : {0.5, 0.8, 0.9})
      for (double gl : {1e-4, 1e-3, 1e-2, 5e-2}) {
        const auto spec = make_spec(algo, gl / lam_max, alpha);
        const double oracle = lyapunov_oracle(grid_problem, spec);
        const double closed =
            variance_exact(grid_problem, spec, SamplingScheme::with_replacement).total;
        c.require(rel(oracle, closed) <= 1e-9,
                  to_string(algo) + " a=" + fmt(alpha) + " gl=" + fmt(gl) + " rel " +
                      fmt(rel(oracle, closed)));
        ++points;
      }
  c.require(points == 36, "grid size wrong");

  // Permutation oracle: n in {3,4,5}, d in {1,2}, three instances each.
  const Algorithm cycle[] = {Algorithm::sgd, Algorithm::sgdm, Algorithm::snag};
  int idx = 0;
  for (int n : {3, 4, 5})
    for (int d : {1, 2})
      for (int rep = 0; rep < 3; ++rep, ++idx) {
        const auto problem = dense_instance(n, d, 1000 + idx);
        const auto spec =
            spec_for(cycle[idx % 3], 0.08 / problem.eigenvalues[d - 1], 0.5);
        const double so = permutation_oracle(problem, spec, SamplingScheme::shuffle_once);
        const double so_exact =
            variance_exact(problem, spec, SamplingScheme::shuffle_once).total;
        c.require(rel(so, so_exact) <= 1e-8,
                  "so n=" + std::to_string(n) + " d=" + std::to_string(d) + " rel " +
                      fmt(rel(so, so_exact)));
        const double rr = permutation_oracle(problem, spec, SamplingScheme::random_reshuffle);
        const double rr_exact =
            variance_exact(problem, spec, SamplingScheme::random_reshuffle).total;
        c.require(rel(rr, rr_exact) <= 1e-8,
                  "rr n=" + std::to_string(n) + " d=" + std::to_string(d) + " rel " +
                      fmt(rel(rr, rr_exact)));
      }
  if (c.ok) c.detail = "36 Lyapunov points + 18 instances x {so, rr}";
  return c;
}

// ---- criterion 5: closed form vs quadrature --------------------------------

Check criterion_closed_vs_quadrature() {
  Check c;
  for (auto algo : {Algorithm::sgd, Algorithm::sgdm, Algorithm::snag})
    for (double alpha : {0.0, 0.5, 0.8, 0.9}) {
      if (algo == Algorithm::sgd && alpha > 0) continue;
      for (double gl : {1e-5, 1e-4, 1e-3, 1e-2}) {
        const auto spec = make_spec(algo, gl / 0.2, alpha);
        const auto full = full_interval_integral(spec, 0.2);
        if (full.path != EvaluationPath::closed_form) continue;  // complex regime
        const double quad = quadrature_interval_integral(spec, 0.2);
        c.require(rel(full.value, quad) <= 1e-8,
                  to_string(algo) + " a=" + fmt(alpha) + " gl=" + fmt(gl) + " rel " +
                      fmt(rel(full.value, quad)));
      }
    }
  if (c.ok) c.detail = "grid within 1e-8";
  return c;
}

// ---- criterion 6: reshuffling spectral density suite ------------------------

Check criterion_rn_suite() {
  Check c;
  for (int n : {2, 3, 5, 10})
    for (int j = 0; j < 50; ++j) {
      const double x = 2 * std::numbers::pi * (j + 0.5) / 50.0;
      std::complex<double> sum = 0;
      for (long k = -n; k <= n; ++k)
        sum += theoretical_autocorrelation(SamplingScheme::random_reshuffle, n, k) *
               std::exp(std::complex<double>(0, -k * x));
      c.require(std::abs(sum.real() - r_n(n, x)) <= 1e-10,
                "fourier mismatch at n=" + std::to_string(n));
    }

  for (int n : {2, 7, 40}) {
    std::vector<double> knots;
    for (int k = 0; k <= 2 * n; ++k) knots.push_back(2 * std::numbers::pi * k / (2.0 * n));
    const double integral = integrate_adaptive([&](double x) { return r_n(n, x); }, knots,
                                               {.rel_tol = 1e-12});
    c.require(std::abs(integral / (2 * std::numbers::pi) - 1.0) <= 1e-10,
              "normalization off at n=" + std::to_string(n));
  }

  for (int j = 0; j < 10000; ++j) {
    const int n = 2 + j % 25;
    const double x = 2 * std::numbers::pi * (j + 0.5) / 10000.0;
    if (std::abs(r_n(n, x)) > 2.0 * n / (n - 1.0)) {
      c.require(false, "bound violated at n=" + std::to_string(n) + " x=" + fmt(x));
      break;
    }
  }

  const double x = 1e-5;
  const double ratio = r_n(100, x) / (100.0 * 101.0 * x * x / 12.0);
  c.require(std::abs(ratio - 1.0) <= 1e-3, "taylor ratio " + fmt(ratio));
  if (c.ok) c.detail = "fourier, normalization, bound, taylor all hold";
  return c;
}

// ---- criteria 7-8: desk-scale Monte-Carlo ----------------------------------

TrajectoryConfig desk_config(bool shuffle_once) {
  TrajectoryConfig cfg;
  cfg.iterations = 400000;
  cfg.burn_in = 50000;
  cfg.runs = 8;
  cfg.master_seed = 20240809;
  if (shuffle_once) cfg.so_periods = SoPeriods{50000, 10000};
  return cfg;
}

Check criterion_desk_scale_agreement() {
  Check c;
  const auto problem = clustered_spectrum_instance();
  const SamplingScheme schemes[] = {SamplingScheme::with_replacement,
                                    SamplingScheme::random_reshuffle,
                                    SamplingScheme::shuffle_once};
  for (auto algo : {Algorithm::sgd, Algorithm::sgdm, Algorithm::snag}) {
    const auto spec = spec_for(algo, 5e-4, 0.8);
    std::map<SamplingScheme, double> means;
    for (auto scheme : schemes) {
      const auto cfg = desk_config(scheme == SamplingScheme::shuffle_once);
      const auto est = run_mse_estimate(problem, spec, scheme, NoiseMode::zero_order, cfg);
      const double exact = variance_exact(problem, spec, scheme).total;
      means[scheme] = est.mean;
      const double sigmas = std::abs(est.mean - exact) / std::max(est.std, 1e-300);
      c.require(sigmas <= 4.0, to_string(algo) + "-" + to_string(scheme) + " at " +
                                   fmt(sigmas) + " std");
    }
    c.require(means[SamplingScheme::shuffle_once] <
                      means[SamplingScheme::random_reshuffle] &&
                  means[SamplingScheme::random_reshuffle] <
                      means[SamplingScheme::with_replacement],
              to_string(algo) + " ordering violated");
  }
  if (c.ok) c.detail = "nine combinations within 4 std, ordering holds";
  return c;
}

Check criterion_full_noise_proximity() {
  Check c;
  const auto problem = assemble(build_regression_instance(1000, 5, 0.1, 314159));
  const SamplingScheme schemes[] = {SamplingScheme::with_replacement,
                                    SamplingScheme::random_reshuffle,
                                    SamplingScheme::shuffle_once};
  for (auto algo : {Algorithm::sgd, Algorithm::sgdm, Algorithm::snag}) {
    const auto spec = spec_for(algo, 5e-4, 0.8);
    for (auto scheme : schemes) {
      TrajectoryConfig cfg = desk_config(scheme == SamplingScheme::shuffle_once);
      cfg.iterations = 200000;
      cfg.burn_in = 50000;
      if (cfg.so_periods) cfg.so_periods = SoPeriods{50000, 10000};
      const auto full = run_mse_estimate(problem, spec, scheme, NoiseMode::full, cfg);
      const auto zero = run_mse_estimate(problem, spec, scheme, NoiseMode::zero_order, cfg);
      const double gap = std::abs(full.mean - zero.mean);
      const double budget = 5.0 * (full.std + zero.std);
      c.require(gap <= budget, to_string(algo) + "-" + to_string(scheme) + " gap " +
                                   fmt(gap) + " > " + fmt(budget));
    }
  }
  if (c.ok) c.detail = "full noise within 5 combined std of zero-order, all nine";
  return c;
}

// ---- criterion 9: first-order bias ------------------------------------------

Check criterion_bias() {
  Check c;
  const auto problem = assemble(build_regression_instance(10, 2, 0.1, 271828));
  const auto spec = make_spec(Algorithm::sgd, 1e-3, 0.0);
  TrajectoryConfig cfg;
  cfg.iterations = 300000;
  cfg.burn_in = 60000;
  cfg.runs = 10;
  cfg.master_seed = 8;
  const auto offset = mean_offset_estimate(problem, spec, SamplingScheme::with_replacement,
                                           NoiseMode::full, cfg);
  const Eigen::VectorXd predicted = first_order_bias(problem, spec.stepsize);
  for (int j = 0; j < problem.d(); ++j) {
    const double sigmas = std::abs(offset.mean[j] - predicted[j]) /
                          std::max(offset.std[j], 1e-300);
    c.require(sigmas <= 4.0, "coordinate " + std::to_string(j) + " at " + fmt(sigmas) +
                                 " std");
  }
  if (c.ok)
    c.detail = "offset " + fmt(offset.mean.norm()) + " vs predicted " +
               fmt(predicted.norm());
  return c;
}

}  // namespace

int main() {
  struct Criterion {
    int id;
    const char* description;
    std::function<Check()> run;
  };
  const Criterion criteria[] = {
      {1, "reference variance reproduction (CLI, nine values, 3%)", criterion_theory_column},
      {2, "leading-order approximation identities", criterion_approximations},
      {3, "squared-stepsize scaling of shuffle-once variance", criterion_gamma_squared_scaling},
      {4, "oracle equivalence (Lyapunov + permutation)", criterion_oracles},
      {5, "closed forms vs adaptive quadrature (1e-8)", criterion_closed_vs_quadrature},
      {6, "reshuffling spectral density suite", criterion_rn_suite},
      {7, "desk-scale Monte-Carlo agreement (nine combos, 4 std)", criterion_desk_scale_agreement},
      {8, "full-noise vs zero-order proximity (regression instance)", criterion_full_noise_proximity},
      {9, "with-replacement mean offset vs first-order bias", criterion_bias},
  };

  int failures = 0;
  for (const auto& criterion : criteria) {
    const auto start = std::chrono::steady_clock::now();
    Check check;
    try {
      check = criterion.run();
    } catch (const std::exception& e) {
      check.ok = false;
      check.detail = std::string("exception: ") + e.what();
    }
    const double seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    std::printf("[%s] criterion %d: %s (%s) [%.1fs]\n", check.ok ? "PASS" : "FAIL",
                criterion.id, criterion.description, check.detail.c_str(), seconds);
    std::fflush(stdout);
    if (!check.ok) ++failures;
  }
  if (failures) std::printf("%d criterion(s) failed\n", failures);
  return failures;
}
