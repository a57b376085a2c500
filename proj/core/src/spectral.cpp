#include "svl/spectral.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

#include "svl/errors.hpp"
#include "svl/quadrature.hpp"

namespace svl {

std::string to_string(Algorithm algorithm) {
  switch (algorithm) {
    case Algorithm::sgd: return "sgd";
    case Algorithm::sgdm: return "sgdm";
    case Algorithm::snag: return "snag";
  }
  return "?";
}

Algorithm parse_algorithm(const std::string& name) {
  if (name == "sgd") return Algorithm::sgd;
  if (name == "sgdm") return Algorithm::sgdm;
  if (name == "snag") return Algorithm::snag;
  throw std::invalid_argument("unknown algorithm: " + name);
}

AlgorithmSpec make_spec(Algorithm algorithm, double stepsize, double momentum) {
  if (!(stepsize > 0)) throw std::invalid_argument("make_spec: stepsize must be > 0");
  if (algorithm == Algorithm::sgd) momentum = 0.0;
  if (!(momentum >= 0 && momentum < 1))
    throw std::invalid_argument("make_spec: momentum must be in [0, 1)");
  return {algorithm, stepsize, momentum};
}

CharacteristicPoly characteristic_poly(const AlgorithmSpec& spec, double lambda) {
  const double gl = spec.stepsize * lambda;
  const double a = spec.momentum;
  switch (spec.algorithm) {
    case Algorithm::sgd: return {1.0 - gl, 0.0, false};
    case Algorithm::sgdm: return {1.0 + a - gl, a, true};
    case Algorithm::snag: return {(1.0 + a) * (1.0 - gl), a * (1.0 - gl), true};
  }
  return {0, 0, false};
}

StabilityResult is_stable(const AlgorithmSpec& spec, double lambda) {
  if (!(lambda > 0)) throw std::invalid_argument("is_stable: lambda must be > 0");
  const CharacteristicPoly cp = characteristic_poly(spec, lambda);
  double margin;
  if (!cp.quadratic) {
    margin = std::abs(cp.xi);
  } else {
    const double disc = cp.xi * cp.xi - 4.0 * cp.chi;
    if (disc >= 0) {
      const double root = std::sqrt(disc);
      margin = std::max(std::abs((cp.xi + root) / 2), std::abs((cp.xi - root) / 2));
    } else {
      margin = std::sqrt(cp.chi);  // complex pair, |z|^2 = chi
    }
  }
  return {margin < 1.0, margin};
}

namespace {

// Shared pieces of the closed forms: the quartic discriminant, the root
// product, and the normalizer Z/(4 pi) of the antiderivative.
struct ClosedFormParts {
  double discriminant;
  double rho_sum_half;    // half the rho_+ + rho_- numerator, over (gl)^2
  double root_product;    // rho_+ * rho_-
  double weight;          // (1-alpha) or (1-alpha(1-gl))
};

ClosedFormParts closed_form_parts(const AlgorithmSpec& spec, double lambda) {
  const double gl = spec.stepsize * lambda;
  const double gl2 = gl * gl;
  const double a = spec.momentum;
  ClosedFormParts parts{};
  if (spec.algorithm == Algorithm::snag) {
    const double u = 1.0 - gl;
    parts.discriminant = u * ((1 - a) * (1 - a) - gl * (1 + a) * (1 + a));
    parts.rho_sum_half =
        (1 + (1 + a) * (1 + a) * u * u + a * a * u * u - 6 * a * u) / gl2;
    parts.root_product =
        (2 * (1 + a) * (1 + a) * u * u + 2 * (a * u + 1) * (a * u + 1) - gl2) / gl2;
    parts.weight = 1 - a * u;
  } else {
    parts.discriminant = (1 - a) * (1 - a) + gl2 - 2 * (1 + a) * gl;
    parts.rho_sum_half = (2 * (1 - a) * (1 - a) + gl2 - 2 * (1 + a) * gl) / gl2;
    const double xi = 1 + a - gl;
    parts.root_product = (2 * xi * xi + 2 * (1 + a) * (1 + a) - gl2) / gl2;
    parts.weight = 1 - a;
  }
  return parts;
}

}  // namespace

RhoPair rho_pair(const AlgorithmSpec& spec, double lambda) {
  if (!(lambda > 0)) throw std::invalid_argument("rho_pair: lambda must be > 0");
  const ClosedFormParts parts = closed_form_parts(spec, lambda);
  if (parts.discriminant < 0)
    throw RegimeError("rho_pair: complex-root regime (discriminant " +
                      std::to_string(parts.discriminant) +
                      " < 0), integrate the gain numerically instead");
  const double gl = spec.stepsize * lambda;
  const double rho_plus =
      parts.rho_sum_half + 2 * parts.weight * std::sqrt(parts.discriminant) / (gl * gl);
  // rho_minus through the root product: the direct minus-branch formula
  // cancels catastrophically for gamma*lambda << 1-alpha.
  const double rho_minus = parts.root_product / rho_plus;
  if (!(rho_plus > 0) || !(rho_minus >= 0))
    throw RegimeError("rho_pair: roots left the nonnegative regime");
  return {rho_plus, rho_minus, parts.discriminant};
}

namespace {

// |e^{i theta} - a|^2 for real root a, written as a sum of nonnegative terms.
// The naive 1 - 2a cos(theta) + a^2 cancels catastrophically when the root
// sits close to the unit circle, which is exactly where the gain peaks.
double real_root_factor(double a, double sin_half_sq, double cos_half_sq) {
  if (a >= 0) return (1 - a) * (1 - a) + 4 * a * sin_half_sq;
  return (1 + a) * (1 + a) - 4 * a * cos_half_sq;
}

}  // namespace

double mode_gain(const AlgorithmSpec& spec, double lambda, double f) {
  const CharacteristicPoly cp = characteristic_poly(spec, lambda);
  const double s = std::sin(std::numbers::pi * f);
  const double c = std::cos(std::numbers::pi * f);
  const double sin_half_sq = s * s;  // sin^2 of half the angle 2 pi f
  const double cos_half_sq = c * c;
  double denom;
  if (!cp.quadratic) {
    if (std::abs(cp.xi) >= 1.0)
      throw InstabilityError("mode_gain: characteristic root on or outside the unit circle");
    denom = real_root_factor(cp.xi, sin_half_sq, cos_half_sq);
  } else {
    // Evaluate |z - r1|^2 |z - r2|^2 through the roots of z^2 - xi z + chi.
    const double disc = cp.xi * cp.xi - 4 * cp.chi;
    if (disc >= 0) {
      const double sq = std::sqrt(disc);
      // Larger-magnitude root first, the other via the product, for accuracy.
      const double r1 = cp.xi >= 0 ? (cp.xi + sq) / 2 : (cp.xi - sq) / 2;
      const double r2 = r1 != 0.0 ? cp.chi / r1 : (cp.xi - r1);
      if (std::abs(r1) >= 1.0 || std::abs(r2) >= 1.0)
        throw InstabilityError("mode_gain: characteristic root on or outside the unit circle");
      denom = real_root_factor(r1, sin_half_sq, cos_half_sq) *
              real_root_factor(r2, sin_half_sq, cos_half_sq);
    } else {
      if (cp.chi >= 1.0)  // conjugate pair has squared modulus chi
        throw InstabilityError("mode_gain: characteristic root on or outside the unit circle");
      // Product of the conjugate-pair factors as u^2 - v^2.
      const double a = cp.xi / 2;
      const double b = std::sqrt(-disc) / 2;
      const double u = real_root_factor(a, sin_half_sq, cos_half_sq) + b * b;
      const double v = 2 * b * 2 * s * c;  // 2 b sin(2 pi f)
      denom = u * u - v * v;
    }
  }
  const double g = 1.0 / denom;
  if (!(denom > 0) || !std::isfinite(g))
    throw InstabilityError("mode_gain: characteristic polynomial vanishes on the unit circle");
  return g;
}

namespace {

// (rho - 1)/sqrt(rho) * atan(tan(x/2)/sqrt(rho)) for x in [-pi, pi], with the
// x -> +-pi limits built in via the two-argument arctangent.
double antiderivative_term(double rho, double x) {
  const double sqrt_rho = std::sqrt(rho);
  const double angle = std::atan2(std::sin(x / 2), sqrt_rho * std::cos(x / 2));
  return (rho - 1.0) / sqrt_rho * angle;
}

double antiderivative(const RhoPair& rho, double x) {
  return antiderivative_term(rho.rho_plus, x) - antiderivative_term(rho.rho_minus, x);
}

}  // namespace

double closed_form_partial_integral(const AlgorithmSpec& spec, double lambda,
                                    double eps0, double eps1) {
  if (!(eps0 > 0 && eps0 <= eps1 && eps1 < 1))
    throw std::invalid_argument("closed_form_partial_integral: need 0 < eps0 <= eps1 < 1");
  const StabilityResult stab = is_stable(spec, lambda);
  if (!stab.stable)
    throw InstabilityError("closed_form_partial_integral: unstable mode (root modulus " +
                           std::to_string(stab.margin) + ")");
  const RhoPair rho = rho_pair(spec, lambda);
  const ClosedFormParts parts = closed_form_parts(spec, lambda);
  const double z = 4 * std::numbers::pi * parts.weight * std::sqrt(parts.discriminant);
  const double x0 = -std::numbers::pi + 2 * std::numbers::pi * eps0;
  const double x1 = -std::numbers::pi + 2 * std::numbers::pi * eps1;
  return (antiderivative(rho, x1) - antiderivative(rho, x0)) / z;
}

double quadrature_interval_integral(const AlgorithmSpec& spec, double lambda) {
  const double peak_width =
      spec.stepsize * lambda / std::max(1.0 - spec.momentum, 1e-12);
  const auto knots = peak_refined_knots(0.0, 1.0, peak_width);
  return integrate_adaptive([&](double f) { return mode_gain(spec, lambda, f); }, knots,
                            {.rel_tol = 1e-10});
}

IntervalIntegral full_interval_integral(const AlgorithmSpec& spec, double lambda) {
  const StabilityResult stab = is_stable(spec, lambda);
  if (!stab.stable)
    throw InstabilityError("full_interval_integral: unstable mode (root modulus " +
                           std::to_string(stab.margin) + " at lambda " +
                           std::to_string(lambda) + ")");
  const double gl = spec.stepsize * lambda;
  if (spec.algorithm == Algorithm::sgd)
    return {1.0 / (gl * (2.0 - gl)), EvaluationPath::closed_form};

  const ClosedFormParts parts = closed_form_parts(spec, lambda);
  if (parts.discriminant < 0)
    return {quadrature_interval_integral(spec, lambda), EvaluationPath::quadrature};

  const RhoPair rho = rho_pair(spec, lambda);
  const double sp = std::sqrt(rho.rho_plus);
  const double sm = std::sqrt(rho.rho_minus);
  const double numer = sp - sm - 1.0 / sp + 1.0 / sm;
  const double value =
      numer / (4.0 * parts.weight * std::sqrt(parts.discriminant));
  return {value, EvaluationPath::closed_form};
}

std::string to_string(EvaluationPath path) {
  switch (path) {
    case EvaluationPath::closed_form: return "closed_form";
    case EvaluationPath::quadrature: return "quadrature";
    case EvaluationPath::discrete_sum: return "discrete_sum";
  }
  return "?";
}

}  // namespace svl
