#pragma once

#include <Eigen/Dense>
#include <array>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "svl/problem.hpp"
#include "svl/sampling.hpp"
#include "svl/spectral.hpp"

namespace svl {

enum class VarianceMethod { exact, approx };
std::string to_string(VarianceMethod method);

struct ModeContribution {
  double lambda;
  double mode_power;
  double contribution;  // >= 0, summing to total
  EvaluationPath path;
};

// Stationary trace-variance of the iterates, split per eigenmode, with the
// regime ratios the asymptotic formulas assume so callers can judge how much
// to trust an `approx` report.
struct VarianceReport {
  double total = 0.0;
  std::vector<ModeContribution> per_mode;
  VarianceMethod method = VarianceMethod::exact;
  SamplingScheme scheme = SamplingScheme::with_replacement;
  AlgorithmSpec algorithm{Algorithm::sgd, 0.0, 0.0};
  int n = 0;
  double max_gl_over_1ma = 0.0;   // max_i gamma*lambda_i / (1-alpha)
  double max_gln_over_1ma = 0.0;  // max_i gamma*lambda_i*n / (1-alpha)
};

// Exact stationary variance:
//   with replacement -> gamma^2 sum_i s_i * int_0^1 gain_i(f) df  (closed form
//     where available, else quadrature),
//   shuffle-once     -> gamma^2/(n-1) sum_i s_i sum_{k'=1}^{n-1} gain_i(k'/n),
//   reshuffling      -> gamma^2 sum_i s_i int_0^1 gain_i(f) r_n(2 pi f) df.
// Throws InstabilityError naming the offending eigenvalue.
VarianceReport variance_exact(const QuadraticProblem& problem, const AlgorithmSpec& spec,
                              SamplingScheme scheme);

// Leading-order approximations. The reshuffling formula keeps an explicit
// exponent offset delta in (0,1) and refuses to pick one silently.
VarianceReport variance_approx(const QuadraticProblem& problem, const AlgorithmSpec& spec,
                               SamplingScheme scheme,
                               std::optional<double> delta = std::nullopt);

// First-order mean offset of the with-replacement iterates under the true
// gradient noise: gamma * A^{-1} * (1/n) sum_i A_i y_i.
Eigen::VectorXd first_order_bias(const QuadraticProblem& problem, double gamma);

struct SchemeComparison {
  std::array<VarianceReport, 3> reports;           // replacement, reshuffle, shuffle-once
  std::array<SamplingScheme, 3> ascending;         // schemes ordered by total
  double so_over_rr = 0.0;
  double rr_over_replacement = 0.0;
};

SchemeComparison scheme_comparison(const QuadraticProblem& problem,
                                   const AlgorithmSpec& spec);

std::string report_to_json(const VarianceReport& report);

// One CSV row per report: algorithm, scheme, method, total, regime columns,
// then per-mode lambda/power/contribution/path columns.
void write_reports_csv_header(std::ostream& out, int d);
void write_report_csv_row(std::ostream& out, const VarianceReport& report);

}  // namespace svl
