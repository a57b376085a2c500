#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <vector>

#include "svl/problem.hpp"
#include "svl/rng.hpp"

namespace svl {

enum class SamplingScheme { with_replacement, random_reshuffle, shuffle_once };

std::string to_string(SamplingScheme scheme);
SamplingScheme parse_scheme(const std::string& name);

// Uniform permutation of {0..n-1} by Fisher-Yates.
std::vector<int> random_permutation(int n, CounterRng& rng);

// Incremental index source for the three schemes. Deterministic given
// (scheme, n, seed); all randomness comes from one counter-based stream.
class IndexStream {
 public:
  IndexStream(SamplingScheme scheme, int n, std::uint64_t seed);

  int next();

  // Skips ahead; used to phase-randomize reshuffling streams.
  void discard(std::size_t count);

 private:
  SamplingScheme scheme_;
  int n_;
  CounterRng rng_;
  std::vector<int> permutation_;
  int position_ = 0;
};

// Materialized stream of `length` indices.
std::vector<int> index_stream(SamplingScheme scheme, int n, std::size_t length,
                              std::uint64_t seed);

// Coefficient c(k) with R_y(k) = c(k) Sigma. Even in k; c(0) = 1 for every
// scheme. Requires n >= 2.
double theoretical_autocorrelation(SamplingScheme scheme, int n, long lag);

// Spectral density shape of the reshuffled noise sequence,
//   r_n(x) = n/(n-1) - [sin((n-1/2)x)/sin(x/2) + sin^2((n-1)x/2)/sin^2(x/2)] / (n(n-1)),
// 2pi-periodic and even, with the removable zero at x = 0 evaluated by its
// series n(n+1)x^2/12 * (1 - (2n^2-3)x^2/60): the direct form loses all
// precision there to 1/x^2 cancellation.
double r_n(int n, double x);

// Time-averaged estimates of E[y_{i_k} y_{i_{k+lag}}'] for lag = 0..max_lag.
// Reshuffling streams are started at a uniformly random phase.
std::vector<Eigen::MatrixXd> empirical_autocorrelation(const QuadraticProblem& problem,
                                                       SamplingScheme scheme,
                                                       std::size_t length, int max_lag,
                                                       std::uint64_t seed);

// Debug export, rows (lag, row, col, value).
void write_autocorrelation_csv(std::ostream& out,
                               const std::vector<Eigen::MatrixXd>& autocorr);

}  // namespace svl
