#include "svl/sim.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <functional>
#include <ostream>
#include <stdexcept>
#include <thread>

#include "svl/errors.hpp"
#include "svl/rng.hpp"

namespace svl {

std::string to_string(NoiseMode mode) {
  return mode == NoiseMode::full ? "full" : "zero_order";
}

NoiseMode parse_noise_mode(const std::string& name) {
  if (name == "full") return NoiseMode::full;
  if (name == "zero_order" || name == "zero" || name == "0th") return NoiseMode::zero_order;
  throw std::invalid_argument("unknown noise mode: " + name);
}

void TrajectoryConfig::validate() const {
  if (iterations == 0) throw std::invalid_argument("TrajectoryConfig: iterations == 0");
  if (burn_in >= iterations)
    throw std::invalid_argument("TrajectoryConfig: burn_in must be < iterations");
  if (runs < 1) throw std::invalid_argument("TrajectoryConfig: runs must be >= 1");
  if (so_periods) {
    if (so_periods->tail_used == 0 || so_periods->tail_used > so_periods->period_length ||
        so_periods->period_length > iterations)
      throw std::invalid_argument(
          "TrajectoryConfig: need tail_used <= period_length <= iterations");
  }
}

SimState initial_state(const QuadraticProblem& problem) {
  return {problem.minimizer, problem.minimizer};
}

void step(SimState& state, const AlgorithmSpec& spec, const QuadraticProblem& problem,
          int index, NoiseMode mode) {
  const double alpha = spec.momentum;
  const Eigen::VectorXd extrapolated =
      spec.algorithm == Algorithm::snag && alpha != 0.0
          ? (state.x + alpha * (state.x - state.x_prev)).eval()
          : state.x;
  const Eigen::VectorXd g = mode == NoiseMode::full
                                ? component_gradient(problem, index, extrapolated)
                                : zero_order_gradient(problem, index, extrapolated);
  Eigen::VectorXd next = state.x + alpha * (state.x - state.x_prev) - spec.stepsize * g;
  state.x_prev = std::move(state.x);
  state.x = std::move(next);
}

namespace {

// Per-run index source; shuffle-once optionally redraws its permutation at
// period boundaries.
class RunIndices {
 public:
  RunIndices(SamplingScheme scheme, int n, std::uint64_t run_seed,
             std::optional<SoPeriods> periods)
      : scheme_(scheme), n_(n), rng_(run_seed, 2), period_(0) {
    if (scheme_ == SamplingScheme::shuffle_once && periods)
      period_ = periods->period_length;
    if (scheme_ != SamplingScheme::with_replacement)
      permutation_ = random_permutation(n_, rng_);
  }

  int next(std::size_t k) {
    switch (scheme_) {
      case SamplingScheme::with_replacement:
        return static_cast<int>(rng_.next_below(n_));
      case SamplingScheme::random_reshuffle:
        if (position_ == n_) {
          permutation_ = random_permutation(n_, rng_);
          position_ = 0;
        }
        return permutation_[position_++];
      case SamplingScheme::shuffle_once:
        if (period_ != 0 && k != 0 && k % period_ == 0) {
          permutation_ = random_permutation(n_, rng_);
          position_ = 0;
        }
        if (position_ == n_) position_ = 0;
        return permutation_[position_++];
    }
    return 0;
  }

 private:
  SamplingScheme scheme_;
  int n_;
  CounterRng rng_;
  std::vector<int> permutation_;
  int position_ = 0;
  std::size_t period_;
};

bool is_retained(std::size_t k, const TrajectoryConfig& cfg, bool use_periods) {
  if (use_periods) {
    const auto& p = *cfg.so_periods;
    return k % p.period_length >= p.period_length - p.tail_used;
  }
  return k >= cfg.burn_in;
}

double divergence_threshold(const QuadraticProblem& problem) {
  return 1e12 * (1.0 + problem.minimizer.squaredNorm() + problem.noise_covariance.trace());
}

std::string least_stable_mode(const QuadraticProblem& problem, const AlgorithmSpec& spec) {
  double worst_margin = -1.0;
  double worst_lambda = 0.0;
  for (int i = 0; i < problem.d(); ++i) {
    const StabilityResult stab = is_stable(spec, problem.eigenvalues[i]);
    if (stab.margin > worst_margin) {
      worst_margin = stab.margin;
      worst_lambda = problem.eigenvalues[i];
    }
  }
  return "lambda = " + std::to_string(worst_lambda) + " (root modulus " +
         std::to_string(worst_margin) + ")";
}

[[noreturn]] void throw_divergence(const QuadraticProblem& problem,
                                   const AlgorithmSpec& spec, std::size_t k) {
  throw DivergenceError("trajectory diverged at iteration " + std::to_string(k) +
                        "; least stable mode: " + least_stable_mode(problem, spec));
}

// Scalar recurrences in the eigenbasis of A; each zero-order step costs O(d).
struct ModeCoefficients {
  Eigen::ArrayXd current;   // coefficient of u_k
  Eigen::ArrayXd previous;  // coefficient of u_{k-1}
};

ModeCoefficients mode_coefficients(const QuadraticProblem& problem,
                                   const AlgorithmSpec& spec) {
  const int d = problem.d();
  const double a = spec.momentum;
  ModeCoefficients mc{Eigen::ArrayXd(d), Eigen::ArrayXd::Zero(d)};
  for (int m = 0; m < d; ++m) {
    const double gl = spec.stepsize * problem.eigenvalues[m];
    switch (spec.algorithm) {
      case Algorithm::sgd:
        mc.current[m] = 1.0 - gl;
        mc.previous[m] = 0.0;
        break;
      case Algorithm::sgdm:
        mc.current[m] = 1.0 + a - gl;
        mc.previous[m] = -a;
        break;
      case Algorithm::snag:
        mc.current[m] = (1.0 + a) * (1.0 - gl);
        mc.previous[m] = -a * (1.0 - gl);
        break;
    }
  }
  return mc;
}

// One zero-order run in the eigenbasis. `sink(k, sq)` sees every iteration;
// returns the time average of the retained squared distances.
template <typename Sink>
double run_zero_order(const QuadraticProblem& problem, const AlgorithmSpec& spec,
                      SamplingScheme scheme, const TrajectoryConfig& cfg,
                      const Eigen::MatrixXd& rotated_noise, const ModeCoefficients& mc,
                      std::uint64_t run_seed, Sink&& sink) {
  const int d = problem.d();
  const bool use_periods = scheme == SamplingScheme::shuffle_once && cfg.so_periods.has_value();
  RunIndices indices(scheme, problem.n(), run_seed, cfg.so_periods);
  Eigen::ArrayXd u = Eigen::ArrayXd::Zero(d);
  Eigen::ArrayXd u_prev = Eigen::ArrayXd::Zero(d);
  Eigen::ArrayXd u_next(d);
  const double gamma = spec.stepsize;
  const double guard = divergence_threshold(problem);
  double acc = 0.0;
  std::size_t retained = 0;
  for (std::size_t k = 0; k < cfg.iterations; ++k) {
    const int i = indices.next(k);
    u_next = mc.current * u + mc.previous * u_prev - gamma * rotated_noise.col(i).array();
    u_prev = u;
    u = u_next;
    const double sq = u.matrix().squaredNorm();
    if (is_retained(k, cfg, use_periods)) {
      acc += sq;
      ++retained;
    }
    sink(k, sq);
    // negated comparison so NaN (overflowed recursion) also trips the guard
    if ((k & 1023) == 0 && !(sq <= guard)) throw_divergence(problem, spec, k);
  }
  return retained ? acc / static_cast<double>(retained) : 0.0;
}

// One run in the original basis, buffers preallocated. `sink(k, delta)` sees
// the recentered iterate each step.
template <typename Sink>
double run_full_basis(const QuadraticProblem& problem, const AlgorithmSpec& spec,
                      SamplingScheme scheme, NoiseMode mode, const TrajectoryConfig& cfg,
                      std::uint64_t run_seed, Sink&& sink) {
  const bool use_periods = scheme == SamplingScheme::shuffle_once && cfg.so_periods.has_value();
  RunIndices indices(scheme, problem.n(), run_seed, cfg.so_periods);
  const int d = problem.d();
  const double alpha = spec.momentum;
  const double gamma = spec.stepsize;
  const bool extrapolated_gradient = spec.algorithm == Algorithm::snag;
  Eigen::VectorXd x = problem.minimizer;
  Eigen::VectorXd x_prev = problem.minimizer;
  Eigen::VectorXd extrap(d), g(d), next(d), delta(d);
  const double guard = divergence_threshold(problem);
  double acc = 0.0;
  std::size_t retained = 0;
  for (std::size_t k = 0; k < cfg.iterations; ++k) {
    const int i = indices.next(k);
    extrap = x + alpha * (x - x_prev);
    const Eigen::VectorXd& eval = extrapolated_gradient ? extrap : x;
    if (mode == NoiseMode::full) {
      const auto& comp = problem.components[i];
      g.noalias() = comp.hessian_part * eval;
      g += comp.linear_part;
    } else {
      g.noalias() = problem.mean_hessian * eval;
      g += problem.mean_linear;
      g += problem.noise_vectors[i];
    }
    next = extrap - gamma * g;
    x_prev.swap(x);
    x.swap(next);
    delta = x - problem.minimizer;
    const double sq = delta.squaredNorm();
    if (is_retained(k, cfg, use_periods)) {
      acc += sq;
      ++retained;
    }
    sink(k, delta);
    if ((k & 1023) == 0 && !(sq <= guard)) throw_divergence(problem, spec, k);
  }
  return retained ? acc / static_cast<double>(retained) : 0.0;
}

void for_each_run(const TrajectoryConfig& cfg, const std::function<void(int)>& body) {
  int workers = cfg.threads > 0 ? cfg.threads
                                : static_cast<int>(std::thread::hardware_concurrency());
  workers = std::max(1, std::min(workers, cfg.runs));
  if (workers == 1) {
    for (int r = 0; r < cfg.runs; ++r) body(r);
    return;
  }
  std::atomic<int> next_run{0};
  std::vector<std::exception_ptr> errors(cfg.runs);
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (int w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (;;) {
        const int r = next_run.fetch_add(1);
        if (r >= cfg.runs) return;
        try {
          body(r);
        } catch (...) {
          errors[r] = std::current_exception();
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  for (const auto& e : errors)
    if (e) std::rethrow_exception(e);
}

MseEstimate summarize(std::vector<double> per_run) {
  MseEstimate est;
  est.per_run = std::move(per_run);
  const int r = static_cast<int>(est.per_run.size());
  for (double v : est.per_run) est.mean += v;
  est.mean /= r;
  if (r > 1) {
    double ss = 0.0;
    for (double v : est.per_run) ss += (v - est.mean) * (v - est.mean);
    est.std = std::sqrt(ss / (r - 1));
  }
  return est;
}

}  // namespace

MseEstimate run_mse_estimate(const QuadraticProblem& problem, const AlgorithmSpec& spec,
                             SamplingScheme scheme, NoiseMode mode,
                             const TrajectoryConfig& cfg) {
  cfg.validate();
  if (scheme == SamplingScheme::shuffle_once && !cfg.so_periods)
    throw std::invalid_argument("run_mse_estimate: shuffle_once requires so_periods");

  std::vector<double> per_run(cfg.runs, 0.0);
  if (mode == NoiseMode::zero_order) {
    // Rotate the noise once; every step then works on d decoupled modes.
    Eigen::MatrixXd rotated(problem.d(), problem.n());
    for (int i = 0; i < problem.n(); ++i)
      rotated.col(i) = problem.eigenvectors.transpose() * problem.noise_vectors[i];
    const ModeCoefficients mc = mode_coefficients(problem, spec);
    for_each_run(cfg, [&](int r) {
      per_run[r] = run_zero_order(problem, spec, scheme, cfg, rotated, mc,
                                  derive_stream(cfg.master_seed, r),
                                  [](std::size_t, double) {});
    });
  } else {
    for_each_run(cfg, [&](int r) {
      per_run[r] = run_full_basis(problem, spec, scheme, mode, cfg,
                                  derive_stream(cfg.master_seed, r),
                                  [](std::size_t, const Eigen::VectorXd&) {});
    });
  }
  return summarize(std::move(per_run));
}

MeanOffsetEstimate mean_offset_estimate(const QuadraticProblem& problem,
                                        const AlgorithmSpec& spec, SamplingScheme scheme,
                                        NoiseMode mode, const TrajectoryConfig& cfg) {
  cfg.validate();
  if (scheme == SamplingScheme::shuffle_once && !cfg.so_periods)
    throw std::invalid_argument("mean_offset_estimate: shuffle_once requires so_periods");
  const int d = problem.d();
  std::vector<Eigen::VectorXd> run_means(cfg.runs, Eigen::VectorXd::Zero(d));
  const bool use_periods = scheme == SamplingScheme::shuffle_once && cfg.so_periods.has_value();
  for_each_run(cfg, [&](int r) {
    Eigen::VectorXd sum = Eigen::VectorXd::Zero(d);
    std::size_t retained = 0;
    run_full_basis(problem, spec, scheme, mode, cfg, derive_stream(cfg.master_seed, r),
                   [&](std::size_t k, const Eigen::VectorXd& delta) {
                     if (is_retained(k, cfg, use_periods)) {
                       sum += delta;
                       ++retained;
                     }
                   });
    if (retained) run_means[r] = sum / static_cast<double>(retained);
  });

  MeanOffsetEstimate est{Eigen::VectorXd::Zero(d), Eigen::VectorXd::Zero(d)};
  for (const auto& m : run_means) est.mean += m;
  est.mean /= cfg.runs;
  if (cfg.runs > 1) {
    for (const auto& m : run_means)
      est.std += (m - est.mean).cwiseAbs2();
    est.std = (est.std / (cfg.runs - 1)).cwiseSqrt();
  }
  return est;
}

void write_trace_csv(std::ostream& out, const QuadraticProblem& problem,
                     const AlgorithmSpec& spec, SamplingScheme scheme, NoiseMode mode,
                     std::size_t iterations, std::size_t stride, std::uint64_t seed,
                     std::optional<SoPeriods> so_periods) {
  if (stride == 0) throw std::invalid_argument("write_trace_csv: stride must be >= 1");
  TrajectoryConfig cfg;
  cfg.iterations = iterations;
  cfg.burn_in = 0;
  cfg.runs = 1;
  cfg.so_periods = so_periods;
  cfg.master_seed = seed;
  cfg.validate();
  out << "iteration,sq_dist\n";
  const auto old_precision = out.precision(17);
  run_full_basis(problem, spec, scheme, mode, cfg, derive_stream(seed, 0),
                 [&](std::size_t k, const Eigen::VectorXd& delta) {
                   if (k % stride == 0) out << k << ',' << delta.squaredNorm() << '\n';
                 });
  out.precision(old_precision);
}

}  // namespace svl
