#pragma once

#include <string>

namespace svl {

enum class Algorithm { sgd, sgdm, snag };

std::string to_string(Algorithm algorithm);
Algorithm parse_algorithm(const std::string& name);

// Stochastic first-order method with stepsize gamma and momentum weight
// alpha. Plain SGD carries alpha = 0 by definition; make_spec forces it.
struct AlgorithmSpec {
  Algorithm algorithm;
  double stepsize;  // gamma > 0
  double momentum;  // alpha in [0, 1)
};

AlgorithmSpec make_spec(Algorithm algorithm, double stepsize, double momentum = 0.0);

// Coefficients of the per-mode characteristic polynomial z^2 - xi z + chi
// (for SGD the polynomial is z - xi and chi = 0, quadratic = false).
struct CharacteristicPoly {
  double xi;
  double chi;
  bool quadratic;
};

CharacteristicPoly characteristic_poly(const AlgorithmSpec& spec, double lambda);

struct StabilityResult {
  bool stable;
  double margin;  // largest characteristic root modulus
};

// Root moduli of the characteristic polynomial; stable iff all < 1.
StabilityResult is_stable(const AlgorithmSpec& spec, double lambda);

// Negated root pair of the quartic from the partial-fraction evaluation of
// the gain integral. Defined only when `discriminant` >= 0; rho_plus >=
// rho_minus >= 0 there.
struct RhoPair {
  double rho_plus;
  double rho_minus;
  double discriminant;
};

// Throws RegimeError in the complex-root regime (discriminant < 0), where no
// closed form exists and callers must integrate numerically.
RhoPair rho_pair(const AlgorithmSpec& spec, double lambda);

// Squared-magnitude reciprocal of the characteristic polynomial on the unit
// circle at frequency f, WITHOUT the gamma^2 prefactor; variance assemblers
// multiply by gamma^2 * mode_power explicitly. Throws InstabilityError if the
// polynomial vanishes on the circle.
double mode_gain(const AlgorithmSpec& spec, double lambda, double f);

// Exact value of int_{eps0}^{eps1} mode_gain df via the arctan antiderivative,
// evaluated with atan2(sin(x/2), sqrt(rho) cos(x/2)) so the limits at
// f -> {0,1} (x -> -+pi) are +-pi/2 without cancellation. Requires
// 0 < eps0 <= eps1 < 1 and the rho_pair regime.
double closed_form_partial_integral(const AlgorithmSpec& spec, double lambda,
                                    double eps0, double eps1);

enum class EvaluationPath { closed_form, quadrature, discrete_sum };
std::string to_string(EvaluationPath path);

struct IntervalIntegral {
  double value;  // int_0^1 mode_gain df
  EvaluationPath path;
};

// Full-period gain integral: closed form where the rho_pair regime holds,
// otherwise adaptive quadrature with panels refined near the f in {0,1}
// peak of width ~ gamma*lambda/(1-alpha). Throws InstabilityError when the
// mode is unstable.
IntervalIntegral full_interval_integral(const AlgorithmSpec& spec, double lambda);

// Quadrature route alone (used by the closed-form cross-checks and the
// reshuffling variance integral, which has no closed form).
double quadrature_interval_integral(const AlgorithmSpec& spec, double lambda);

}  // namespace svl
