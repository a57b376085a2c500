#include <algorithm>
#include <cmath>
#include <deque>
#include <numeric>
#include <stdexcept>
#include <vector>

#include "svl/errors.hpp"
#include "svl/sim.hpp"

namespace svl {
namespace {

void require_stable(const QuadraticProblem& problem, const AlgorithmSpec& spec,
                    const char* what) {
  for (int i = 0; i < problem.d(); ++i) {
    const StabilityResult stab = is_stable(spec, problem.eigenvalues[i]);
    if (!stab.stable)
      throw InstabilityError(std::string(what) + ": unstable mode at lambda = " +
                             std::to_string(problem.eigenvalues[i]));
  }
}

// State transition of the recentered iterate recursion; (x_k, x_{k-1}) block
// companion form for the momentum methods, plain Id - gamma A for SGD.
Eigen::MatrixXd transition_matrix(const QuadraticProblem& problem,
                                  const AlgorithmSpec& spec) {
  const int d = problem.d();
  const double a = spec.momentum;
  const Eigen::MatrixXd id = Eigen::MatrixXd::Identity(d, d);
  const Eigen::MatrixXd m = id - spec.stepsize * problem.mean_hessian;
  if (spec.algorithm == Algorithm::sgd) return m;
  Eigen::MatrixXd t = Eigen::MatrixXd::Zero(2 * d, 2 * d);
  if (spec.algorithm == Algorithm::sgdm) {
    t.topLeftCorner(d, d) = (1 + a) * id - spec.stepsize * problem.mean_hessian;
    t.topRightCorner(d, d) = -a * id;
  } else {
    t.topLeftCorner(d, d) = (1 + a) * m;
    t.topRightCorner(d, d) = -a * m;
  }
  t.bottomLeftCorner(d, d) = id;
  return t;
}

// Noise injection: column block mapping y to the augmented state increment.
Eigen::MatrixXd noise_injection(int d, int state_dim, double gamma) {
  Eigen::MatrixXd g = Eigen::MatrixXd::Zero(state_dim, d);
  g.topLeftCorner(d, d) = -gamma * Eigen::MatrixXd::Identity(d, d);
  return g;
}

double max_root_modulus(const QuadraticProblem& problem, const AlgorithmSpec& spec) {
  double margin = 0.0;
  for (int i = 0; i < problem.d(); ++i)
    margin = std::max(margin, is_stable(spec, problem.eigenvalues[i]).margin);
  return margin;
}

Eigen::MatrixXd solve_lyapunov_direct(const Eigen::MatrixXd& t, const Eigen::MatrixXd& q) {
  const int m = static_cast<int>(t.rows());
  Eigen::MatrixXd k = Eigen::MatrixXd::Identity(m * m, m * m);
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < m; ++j)
      for (int kk = 0; kk < m; ++kk)
        for (int l = 0; l < m; ++l)
          k(i + m * j, kk + m * l) -= t(i, kk) * t(j, l);
  const Eigen::VectorXd vec_q = Eigen::Map<const Eigen::VectorXd>(q.data(), m * m);
  const Eigen::VectorXd vec_p = k.partialPivLu().solve(vec_q);
  return Eigen::Map<const Eigen::MatrixXd>(vec_p.data(), m, m);
}

// Doubling iteration for P = sum_k T^k Q T'^k; used when the Kronecker system
// would get large.
Eigen::MatrixXd solve_lyapunov_doubling(Eigen::MatrixXd t, Eigen::MatrixXd s) {
  for (int iter = 0; iter < 200; ++iter) {
    const Eigen::MatrixXd update = t * s * t.transpose();
    s += update;
    if (update.norm() <= 1e-16 * s.norm()) return s;
    t = (t * t).eval();
  }
  throw Error("lyapunov_oracle: covariance recursion did not converge");
}

}  // namespace

double lyapunov_oracle(const QuadraticProblem& problem, const AlgorithmSpec& spec) {
  require_stable(problem, spec, "lyapunov_oracle");
  const int d = problem.d();
  const Eigen::MatrixXd t = transition_matrix(problem, spec);
  const int m = static_cast<int>(t.rows());
  Eigen::MatrixXd q = Eigen::MatrixXd::Zero(m, m);
  q.topLeftCorner(d, d) =
      spec.stepsize * spec.stepsize * problem.noise_covariance;
  const Eigen::MatrixXd p =
      d <= 10 ? solve_lyapunov_direct(t, q) : solve_lyapunov_doubling(t, q);
  return p.topLeftCorner(d, d).trace();
}

namespace {

double shuffle_once_orbit_average(const QuadraticProblem& problem,
                                  const AlgorithmSpec& spec) {
  const int n = problem.n();
  const int d = problem.d();
  const Eigen::MatrixXd t = transition_matrix(problem, spec);
  const int m = static_cast<int>(t.rows());
  const Eigen::MatrixXd g = noise_injection(d, m, spec.stepsize);

  Eigen::MatrixXd t_period = Eigen::MatrixXd::Identity(m, m);
  for (int j = 0; j < n; ++j) t_period = t * t_period;
  const Eigen::PartialPivLU<Eigen::MatrixXd> period_solver(
      Eigen::MatrixXd::Identity(m, m) - t_period);

  std::vector<int> perm(n);
  std::iota(perm.begin(), perm.end(), 0);
  double total = 0.0;
  std::size_t count = 0;
  do {
    // Deterministic n-periodic forcing: the stationary law is the periodic
    // orbit, averaged over the n phases.
    Eigen::VectorXd forcing = Eigen::VectorXd::Zero(m);
    for (int j = 0; j < n; ++j)
      forcing = t * forcing + g * problem.noise_vectors[perm[j]];
    Eigen::VectorXd state = period_solver.solve(forcing);
    double orbit_mean_sq = 0.0;
    for (int j = 0; j < n; ++j) {
      orbit_mean_sq += state.head(d).squaredNorm();
      state = t * state + g * problem.noise_vectors[perm[j]];
    }
    total += orbit_mean_sq / n;
    ++count;
  } while (std::next_permutation(perm.begin(), perm.end()));
  return total / static_cast<double>(count);
}

double reshuffle_impulse_sum(const QuadraticProblem& problem, const AlgorithmSpec& spec) {
  const int n = problem.n();
  const int d = problem.d();
  const Eigen::MatrixXd t = transition_matrix(problem, spec);
  const int m = static_cast<int>(t.rows());
  const Eigen::MatrixXd g = noise_injection(d, m, spec.stepsize);
  const Eigen::MatrixXd& sigma = problem.noise_covariance;

  std::vector<double> c(n + 1);
  for (int k = 0; k <= n; ++k)
    c[k] = theoretical_autocorrelation(SamplingScheme::random_reshuffle, n, k);

  // E||dx||^2 = sum over j, j' of Tr[H_j R(j-j') H_{j'}^T] with H_j the
  // first-block impulse response; only |j-j'| <= n pairs contribute.
  Eigen::MatrixXd power = Eigen::MatrixXd::Identity(m, m);
  std::deque<Eigen::MatrixXd> history;  // H_{j-1}, H_{j-2}, ...
  double total = 0.0;
  double abs_chunk = 0.0, abs_total = 0.0;
  const std::size_t max_terms = 20000000;
  for (std::size_t j = 0; j < max_terms; ++j) {
    const Eigen::MatrixXd h = power.topRows(d) * g;  // H_j
    double term = c[0] * (h * sigma * h.transpose()).trace();
    for (std::size_t k = 1; k <= history.size(); ++k)
      term += 2.0 * c[k] * (h * sigma * history[k - 1].transpose()).trace();
    total += term;
    abs_chunk += std::abs(term);
    abs_total += std::abs(term);
    history.push_front(h);
    if (history.size() > static_cast<std::size_t>(n)) history.pop_back();
    power = (t * power).eval();
    if ((j + 1) % static_cast<std::size_t>(n) == 0) {
      if (j + 1 >= static_cast<std::size_t>(3 * n) && abs_chunk <= 1e-16 * abs_total)
        return total;
      abs_chunk = 0.0;
    }
  }
  throw Error("permutation_oracle: impulse response did not decay (root modulus " +
              std::to_string(max_root_modulus(problem, spec)) + ")");
}

}  // namespace

double permutation_oracle(const QuadraticProblem& problem, const AlgorithmSpec& spec,
                          SamplingScheme scheme) {
  if (problem.n() > 6)
    throw std::invalid_argument("permutation_oracle: refused for n > 6 (cost n! poly)");
  if (problem.n() < 2)
    throw std::invalid_argument("permutation_oracle: n must be >= 2");
  require_stable(problem, spec, "permutation_oracle");
  switch (scheme) {
    case SamplingScheme::shuffle_once:
      return shuffle_once_orbit_average(problem, spec);
    case SamplingScheme::random_reshuffle:
      return reshuffle_impulse_sum(problem, spec);
    case SamplingScheme::with_replacement:
      throw std::invalid_argument(
          "permutation_oracle: use lyapunov_oracle for with-replacement sampling");
  }
  throw std::invalid_argument("permutation_oracle: unknown scheme");
}

}  // namespace svl
