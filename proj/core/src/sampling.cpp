#include "svl/sampling.hpp"

#include <cmath>
#include <numbers>
#include <ostream>
#include <stdexcept>

namespace svl {

std::string to_string(SamplingScheme scheme) {
  switch (scheme) {
    case SamplingScheme::with_replacement: return "with_replacement";
    case SamplingScheme::random_reshuffle: return "random_reshuffle";
    case SamplingScheme::shuffle_once: return "shuffle_once";
  }
  return "?";
}

SamplingScheme parse_scheme(const std::string& name) {
  if (name == "with_replacement" || name == "replacement" || name == "iid")
    return SamplingScheme::with_replacement;
  if (name == "random_reshuffle" || name == "rr" || name == "reshuffle")
    return SamplingScheme::random_reshuffle;
  if (name == "shuffle_once" || name == "so")
    return SamplingScheme::shuffle_once;
  throw std::invalid_argument("unknown sampling scheme: " + name);
}

std::vector<int> random_permutation(int n, CounterRng& rng) {
  std::vector<int> p(n);
  for (int i = 0; i < n; ++i) p[i] = i;
  for (int i = n - 1; i > 0; --i) {
    const int j = static_cast<int>(rng.next_below(static_cast<std::uint64_t>(i) + 1));
    std::swap(p[i], p[j]);
  }
  return p;
}

IndexStream::IndexStream(SamplingScheme scheme, int n, std::uint64_t seed)
    : scheme_(scheme), n_(n), rng_(seed) {
  if (n < 1) throw std::invalid_argument("IndexStream: n must be >= 1");
  if (scheme_ != SamplingScheme::with_replacement)
    permutation_ = random_permutation(n_, rng_);
}

int IndexStream::next() {
  if (scheme_ == SamplingScheme::with_replacement)
    return static_cast<int>(rng_.next_below(n_));
  if (position_ == n_) {
    position_ = 0;
    if (scheme_ == SamplingScheme::random_reshuffle)
      permutation_ = random_permutation(n_, rng_);
  }
  return permutation_[position_++];
}

void IndexStream::discard(std::size_t count) {
  for (std::size_t i = 0; i < count; ++i) next();
}

std::vector<int> index_stream(SamplingScheme scheme, int n, std::size_t length,
                              std::uint64_t seed) {
  IndexStream stream(scheme, n, seed);
  std::vector<int> out(length);
  for (auto& v : out) v = stream.next();
  return out;
}

double theoretical_autocorrelation(SamplingScheme scheme, int n, long lag) {
  if (n < 2)
    throw std::invalid_argument("theoretical_autocorrelation: n must be >= 2");
  const long k = std::labs(lag);
  switch (scheme) {
    case SamplingScheme::with_replacement:
      return k == 0 ? 1.0 : 0.0;
    case SamplingScheme::shuffle_once:
      return (k % n == 0 ? 1.0 + 1.0 / (n - 1) : 0.0) - 1.0 / (n - 1);
    case SamplingScheme::random_reshuffle: {
      const double spike = (k == 0) ? 1.0 + 1.0 / (n - 1) : 0.0;
      const double tri = (k <= n) ? static_cast<double>(n - k) / (static_cast<double>(n) * (n - 1)) : 0.0;
      return spike - tri;
    }
  }
  return 0.0;
}

double r_n(int n, double x) {
  if (n < 2) throw std::invalid_argument("r_n: n must be >= 2");
  constexpr double two_pi = 2.0 * std::numbers::pi;
  double t = std::remainder(x, two_pi);  // t in [-pi, pi]
  t = std::abs(t);
  if (t < 1e-3 / n) {
    const double nn = n;
    return nn * (nn + 1) * t * t / 12.0 * (1.0 - (2.0 * nn * nn - 3.0) * t * t / 60.0);
  }
  const double s = std::sin(t / 2);
  const double dirichlet = std::sin((n - 0.5) * t) / s;
  const double fejer = std::sin((n - 1) * t / 2) / s;
  const double nd = n;
  return nd / (nd - 1) - (dirichlet + fejer * fejer) / (nd * (nd - 1));
}

std::vector<Eigen::MatrixXd> empirical_autocorrelation(const QuadraticProblem& problem,
                                                       SamplingScheme scheme,
                                                       std::size_t length, int max_lag,
                                                       std::uint64_t seed) {
  if (max_lag < 0) throw std::invalid_argument("empirical_autocorrelation: max_lag < 0");
  if (length <= static_cast<std::size_t>(max_lag))
    throw std::invalid_argument("empirical_autocorrelation: length must exceed max_lag");
  const int n = problem.n();
  const int d = problem.d();

  IndexStream stream(scheme, n, seed);
  if (scheme != SamplingScheme::with_replacement) {
    CounterRng phase_rng(seed, 0xf00d);
    stream.discard(phase_rng.next_below(n));
  }
  std::vector<int> idx(length);
  for (auto& v : idx) v = stream.next();

  std::vector<Eigen::MatrixXd> acc(max_lag + 1, Eigen::MatrixXd::Zero(d, d));
  for (std::size_t t = 0; t + max_lag < length; ++t) {
    const Eigen::VectorXd& a = problem.noise_vectors[idx[t]];
    for (int k = 0; k <= max_lag; ++k)
      acc[k].noalias() += a * problem.noise_vectors[idx[t + k]].transpose();
  }
  const double count = static_cast<double>(length - max_lag);
  for (auto& m : acc) m /= count;
  return acc;
}

void write_autocorrelation_csv(std::ostream& out,
                               const std::vector<Eigen::MatrixXd>& autocorr) {
  out << "lag,row,col,value\n";
  for (std::size_t k = 0; k < autocorr.size(); ++k)
    for (Eigen::Index i = 0; i < autocorr[k].rows(); ++i)
      for (Eigen::Index j = 0; j < autocorr[k].cols(); ++j)
        out << k << ',' << i << ',' << j << ',' << autocorr[k](i, j) << '\n';
}

}  // namespace svl
