#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "svl/analytic.hpp"
#include "svl/problem.hpp"
#include "svl/sampling.hpp"
#include "svl/spectral.hpp"

namespace svl {

// `full` uses the true component gradients A_i x + b_i; `zero_order` the
// homogenized surrogate A x + b + y_i at the same evaluation point.
enum class NoiseMode { full, zero_order };
std::string to_string(NoiseMode mode);
NoiseMode parse_noise_mode(const std::string& name);

// Shuffle-once runs are split into periods; each period draws a fresh
// permutation (keeping the iterate) and only the period tails enter the
// time average, so the estimate approximates the all-permutations average.
struct SoPeriods {
  std::size_t period_length;
  std::size_t tail_used;
};

struct TrajectoryConfig {
  std::size_t iterations = 100000;
  std::size_t burn_in = 20000;
  int runs = 8;
  std::optional<SoPeriods> so_periods;
  std::uint64_t master_seed = 0;
  int threads = 0;  // 0 = hardware concurrency

  void validate() const;
};

// Stationary mean-squared error E||x_k - x*||^2: per-run time averages plus
// their mean and sample standard deviation.
struct MseEstimate {
  double mean = 0.0;
  double std = 0.0;
  std::vector<double> per_run;
};

struct MeanOffsetEstimate {
  Eigen::VectorXd mean;  // run average of the time-averaged x_k - x*
  Eigen::VectorXd std;   // per-coordinate sample std over runs
};

struct SimState {
  Eigen::VectorXd x;
  Eigen::VectorXd x_prev;
};

SimState initial_state(const QuadraticProblem& problem);

// One update x_{k+1} = x_k + alpha (x_k - x_{k-1}) - gamma g, with g evaluated
// at x_k for SGD/SGDM and at the extrapolated point for SNAG.
void step(SimState& state, const AlgorithmSpec& spec, const QuadraticProblem& problem,
          int index, NoiseMode mode);

// Monte-Carlo estimate of the stationary MSE. Runs start at x_0 = x*, are
// seeded independently per run index (so results do not depend on the thread
// count), and discard `burn_in` iterations (shuffle-once: everything outside
// the period tails). Throws DivergenceError when a trajectory blows up.
MseEstimate run_mse_estimate(const QuadraticProblem& problem, const AlgorithmSpec& spec,
                             SamplingScheme scheme, NoiseMode mode,
                             const TrajectoryConfig& cfg);

// Time-and-run average of x_k - x*, for comparison against first_order_bias.
MeanOffsetEstimate mean_offset_estimate(const QuadraticProblem& problem,
                                        const AlgorithmSpec& spec, SamplingScheme scheme,
                                        NoiseMode mode, const TrajectoryConfig& cfg);

// Single-run squared-distance series, rows "iteration,sq_dist", one row per
// `stride` iterations.
void write_trace_csv(std::ostream& out, const QuadraticProblem& problem,
                     const AlgorithmSpec& spec, SamplingScheme scheme, NoiseMode mode,
                     std::size_t iterations, std::size_t stride, std::uint64_t seed,
                     std::optional<SoPeriods> so_periods = std::nullopt);

// Exact stationary Tr[Var] for with-replacement zero-order noise from the
// fixed point of the covariance recursion of the (block-companion) linear
// system; independent of the frequency-domain route.
double lyapunov_oracle(const QuadraticProblem& problem, const AlgorithmSpec& spec);

// Exact stationary Tr[Var] for shuffle-once (average of the n! deterministic
// periodic orbits) or reshuffling (autocorrelation x impulse-response sum).
// Refuses n > 6.
double permutation_oracle(const QuadraticProblem& problem, const AlgorithmSpec& spec,
                          SamplingScheme scheme);

}  // namespace svl
