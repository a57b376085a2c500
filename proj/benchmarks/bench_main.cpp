#include <benchmark/benchmark.h>

#include "svl/analytic.hpp"
#include "svl/problem.hpp"
#include "svl/sim.hpp"

namespace {

svl::QuadraticProblem clustered_instance(int n) {
  svl::SpectrumSpec spec;
  spec.eigenvalues = Eigen::VectorXd{{0.1807, 0.1951, 0.1998, 0.2033, 0.2194}};
  spec.mode_powers = Eigen::VectorXd{{0.0019, 0.0019, 0.0022, 0.0020, 0.0022}};
  return svl::build_spectrum_instance(spec, n, 38);
}

void ModeGain(benchmark::State& state) {
  const auto spec = svl::make_spec(svl::Algorithm::sgdm, 5e-4, 0.8);
  double f = 0.0;
  for (auto _ : state) {
    f += 1e-7;
    benchmark::DoNotOptimize(svl::mode_gain(spec, 0.2, f));
  }
}
BENCHMARK(ModeGain);

void ReplacementClosedForm(benchmark::State& state) {
  const auto problem = clustered_instance(1000);
  const auto spec = svl::make_spec(svl::Algorithm::sgdm, 5e-4, 0.8);
  for (auto _ : state)
    benchmark::DoNotOptimize(
        svl::variance_exact(problem, spec, svl::SamplingScheme::with_replacement));
}
BENCHMARK(ReplacementClosedForm);

void ShuffleOnceSum(benchmark::State& state) {
  const auto problem = clustered_instance(static_cast<int>(state.range(0)));
  const auto spec = svl::make_spec(svl::Algorithm::sgdm, 5e-4, 0.8);
  for (auto _ : state)
    benchmark::DoNotOptimize(
        svl::variance_exact(problem, spec, svl::SamplingScheme::shuffle_once));
  state.SetComplexityN(state.range(0));
}
BENCHMARK(ShuffleOnceSum)->Range(100, 10000)->Complexity();

void ReshuffleQuadrature(benchmark::State& state) {
  const auto problem = clustered_instance(static_cast<int>(state.range(0)));
  const auto spec = svl::make_spec(svl::Algorithm::sgdm, 5e-4, 0.8);
  for (auto _ : state)
    benchmark::DoNotOptimize(
        svl::variance_exact(problem, spec, svl::SamplingScheme::random_reshuffle));
}
BENCHMARK(ReshuffleQuadrature)->Arg(100)->Arg(1000);

void ZeroOrderSteps(benchmark::State& state) {
  const auto problem = clustered_instance(1000);
  const auto spec = svl::make_spec(svl::Algorithm::sgdm, 5e-4, 0.8);
  svl::TrajectoryConfig cfg;
  cfg.iterations = static_cast<std::size_t>(state.range(0));
  cfg.burn_in = cfg.iterations / 5;
  cfg.runs = 1;
  cfg.threads = 1;
  for (auto _ : state)
    benchmark::DoNotOptimize(svl::run_mse_estimate(
        problem, spec, svl::SamplingScheme::with_replacement, svl::NoiseMode::zero_order, cfg));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(ZeroOrderSteps)->Arg(100000);

void LyapunovOracle(benchmark::State& state) {
  const auto problem = clustered_instance(1000);
  const auto spec = svl::make_spec(svl::Algorithm::sgdm, 5e-4, 0.8);
  for (auto _ : state) benchmark::DoNotOptimize(svl::lyapunov_oracle(problem, spec));
}
BENCHMARK(LyapunovOracle);

}  // namespace

BENCHMARK_MAIN();
