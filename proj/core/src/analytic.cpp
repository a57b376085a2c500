#include "svl/analytic.hpp"

#include <algorithm>
#include <cmath>
#include <nlohmann/json.hpp>
#include <numbers>
#include <ostream>
#include <stdexcept>

#include "svl/errors.hpp"
#include "svl/quadrature.hpp"

namespace svl {

std::string to_string(VarianceMethod method) {
  return method == VarianceMethod::exact ? "exact" : "approx";
}

namespace {

void check_stability(const QuadraticProblem& problem, const AlgorithmSpec& spec) {
  for (int i = 0; i < problem.d(); ++i) {
    const double lambda = problem.eigenvalues[i];
    const StabilityResult stab = is_stable(spec, lambda);
    if (!stab.stable)
      throw InstabilityError("variance: unstable mode at lambda = " + std::to_string(lambda) +
                             " (root modulus " + std::to_string(stab.margin) + ")");
  }
}

VarianceReport make_report(const QuadraticProblem& problem, const AlgorithmSpec& spec,
                           SamplingScheme scheme, VarianceMethod method) {
  VarianceReport report;
  report.method = method;
  report.scheme = scheme;
  report.algorithm = spec;
  report.n = problem.n();
  const double one_minus_alpha = 1.0 - spec.momentum;
  for (int i = 0; i < problem.d(); ++i) {
    const double ratio = spec.stepsize * problem.eigenvalues[i] / one_minus_alpha;
    report.max_gl_over_1ma = std::max(report.max_gl_over_1ma, ratio);
    report.max_gln_over_1ma = std::max(report.max_gln_over_1ma, ratio * problem.n());
  }
  return report;
}

// Sum over the shuffle-once frequency comb f = k'/n, k' = 1..n-1, grouped in
// (k', n-k') pairs via the gain symmetry about f = 1/2.
double shuffle_once_mode_sum(const AlgorithmSpec& spec, double lambda, int n) {
  double sum = 0.0;
  for (int k = 1; 2 * k < n; ++k)
    sum += 2.0 * mode_gain(spec, lambda, static_cast<double>(k) / n);
  if (n % 2 == 0) sum += mode_gain(spec, lambda, 0.5);
  return sum;
}

double reshuffle_mode_integral(const AlgorithmSpec& spec, double lambda, int n) {
  const double peak_width =
      spec.stepsize * lambda / std::max(1.0 - spec.momentum, 1e-12);
  auto knots = peak_refined_knots(0.0, 1.0, peak_width);
  // r_n oscillates on the 1/n scale; seed two panels per comb cell.
  for (int k = 1; k < 2 * n; ++k) knots.push_back(static_cast<double>(k) / (2 * n));
  std::sort(knots.begin(), knots.end());
  knots.erase(std::unique(knots.begin(), knots.end()), knots.end());
  const auto integrand = [&](double f) {
    return mode_gain(spec, lambda, f) * r_n(n, 2 * std::numbers::pi * f);
  };
  return integrate_adaptive(integrand, knots, {.rel_tol = 1e-10});
}

}  // namespace

VarianceReport variance_exact(const QuadraticProblem& problem, const AlgorithmSpec& spec,
                              SamplingScheme scheme) {
  if (scheme != SamplingScheme::with_replacement && problem.n() < 2)
    throw std::invalid_argument("variance_exact: reshuffling schemes need n >= 2");
  check_stability(problem, spec);

  VarianceReport report = make_report(problem, spec, scheme, VarianceMethod::exact);
  const double g2 = spec.stepsize * spec.stepsize;
  const int n = problem.n();
  // Fixed ascending-lambda reduction order for bitwise reproducibility.
  for (int i = 0; i < problem.d(); ++i) {
    const double lambda = problem.eigenvalues[i];
    const double power = problem.mode_powers[i];
    ModeContribution mode{lambda, power, 0.0, EvaluationPath::closed_form};
    switch (scheme) {
      case SamplingScheme::with_replacement: {
        const IntervalIntegral integral = full_interval_integral(spec, lambda);
        mode.contribution = g2 * power * integral.value;
        mode.path = integral.path;
        break;
      }
      case SamplingScheme::shuffle_once:
        mode.contribution = g2 * power * shuffle_once_mode_sum(spec, lambda, n) / (n - 1);
        mode.path = EvaluationPath::discrete_sum;
        break;
      case SamplingScheme::random_reshuffle:
        mode.contribution = g2 * power * reshuffle_mode_integral(spec, lambda, n);
        mode.path = EvaluationPath::quadrature;
        break;
    }
    report.per_mode.push_back(mode);
    report.total += mode.contribution;
  }
  return report;
}

VarianceReport variance_approx(const QuadraticProblem& problem, const AlgorithmSpec& spec,
                               SamplingScheme scheme, std::optional<double> delta) {
  if (scheme != SamplingScheme::with_replacement && problem.n() < 2)
    throw std::invalid_argument("variance_approx: reshuffling schemes need n >= 2");
  if (scheme == SamplingScheme::random_reshuffle) {
    if (!delta)
      throw std::invalid_argument(
          "variance_approx: the reshuffling approximation requires an explicit delta in (0,1)");
    if (!(*delta > 0 && *delta < 1))
      throw std::invalid_argument("variance_approx: delta must lie in (0,1)");
  }

  VarianceReport report = make_report(problem, spec, scheme, VarianceMethod::approx);
  const double gamma = spec.stepsize;
  const double one_minus_alpha = 1.0 - spec.momentum;
  const double n = problem.n();
  constexpr double pi2 = std::numbers::pi * std::numbers::pi;
  for (int i = 0; i < problem.d(); ++i) {
    const double lambda = problem.eigenvalues[i];
    const double power = problem.mode_powers[i];
    double value = 0.0;
    switch (scheme) {
      case SamplingScheme::with_replacement:
        value = gamma * power / (2.0 * one_minus_alpha * lambda);
        break;
      case SamplingScheme::shuffle_once:
        value = power * 2.0 * gamma * gamma * n * n /
                (pi2 * (n - 1) * one_minus_alpha * one_minus_alpha);
        break;
      case SamplingScheme::random_reshuffle:
        value = power * gamma * gamma * std::pow(n, 2.0 + *delta) /
                (pi2 * (n - 1) * one_minus_alpha * one_minus_alpha);
        break;
    }
    report.per_mode.push_back({lambda, power, value, EvaluationPath::closed_form});
    report.total += value;
  }
  return report;
}

Eigen::VectorXd first_order_bias(const QuadraticProblem& problem, double gamma) {
  if (!(gamma > 0)) throw std::invalid_argument("first_order_bias: gamma must be > 0");
  const int d = problem.d();
  Eigen::VectorXd mean_ay = Eigen::VectorXd::Zero(d);
  for (int i = 0; i < problem.n(); ++i)
    mean_ay += problem.components[i].hessian_part * problem.noise_vectors[i];
  mean_ay /= problem.n();
  Eigen::LLT<Eigen::MatrixXd> chol(problem.mean_hessian);
  return gamma * chol.solve(mean_ay);
}

SchemeComparison scheme_comparison(const QuadraticProblem& problem,
                                   const AlgorithmSpec& spec) {
  SchemeComparison cmp;
  cmp.reports[0] = variance_exact(problem, spec, SamplingScheme::with_replacement);
  cmp.reports[1] = variance_exact(problem, spec, SamplingScheme::random_reshuffle);
  cmp.reports[2] = variance_exact(problem, spec, SamplingScheme::shuffle_once);
  std::array<int, 3> order{0, 1, 2};
  std::sort(order.begin(), order.end(),
            [&](int a, int b) { return cmp.reports[a].total < cmp.reports[b].total; });
  for (int i = 0; i < 3; ++i) cmp.ascending[i] = cmp.reports[order[i]].scheme;
  if (cmp.reports[1].total > 0) cmp.so_over_rr = cmp.reports[2].total / cmp.reports[1].total;
  if (cmp.reports[0].total > 0)
    cmp.rr_over_replacement = cmp.reports[1].total / cmp.reports[0].total;
  return cmp;
}

std::string report_to_json(const VarianceReport& report) {
  nlohmann::json doc;
  doc["algorithm"] = to_string(report.algorithm.algorithm);
  doc["gamma"] = report.algorithm.stepsize;
  doc["alpha"] = report.algorithm.momentum;
  doc["scheme"] = to_string(report.scheme);
  doc["method"] = to_string(report.method);
  doc["total"] = report.total;
  doc["n"] = report.n;
  doc["regime"] = {{"max_gamma_lambda_over_1ma", report.max_gl_over_1ma},
                   {"max_gamma_lambda_n_over_1ma", report.max_gln_over_1ma}};
  auto& modes = doc["per_mode"] = nlohmann::json::array();
  for (const auto& m : report.per_mode)
    modes.push_back({{"lambda", m.lambda},
                     {"mode_power", m.mode_power},
                     {"contribution", m.contribution},
                     {"path", to_string(m.path)}});
  return doc.dump(2);
}

void write_reports_csv_header(std::ostream& out, int d) {
  out << "algorithm,gamma,alpha,scheme,method,total,n,max_gl_over_1ma,max_gln_over_1ma";
  for (int i = 0; i < d; ++i)
    out << ",lambda_" << i << ",mode_power_" << i << ",contribution_" << i << ",path_" << i;
  out << "\n";
}

void write_report_csv_row(std::ostream& out, const VarianceReport& report) {
  const auto old_precision = out.precision(17);
  out << to_string(report.algorithm.algorithm) << ',' << report.algorithm.stepsize << ','
      << report.algorithm.momentum << ',' << to_string(report.scheme) << ','
      << to_string(report.method) << ',' << report.total << ',' << report.n << ','
      << report.max_gl_over_1ma << ',' << report.max_gln_over_1ma;
  for (const auto& m : report.per_mode)
    out << ',' << m.lambda << ',' << m.mode_power << ',' << m.contribution << ','
        << to_string(m.path);
  out << "\n";
  out.precision(old_precision);
}

}  // namespace svl
