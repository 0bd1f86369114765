#include <benchmark/benchmark.h>

#include "raresim/estimators.hpp"
#include "raresim/gaussian.hpp"
#include "raresim/limit_state.hpp"
#include "raresim/rng.hpp"

using namespace raresim;

static void BM_SampleRankOne(benchmark::State& state) {
  const auto n = static_cast<Eigen::Index>(state.range(0));
  const GaussianParams params = linear_optimal_params(n);
  RngStream rng(1);
  for (auto _ : state)
    benchmark::DoNotOptimize(sample(params, 1000, rng));
  state.SetItemsProcessed(state.iterations() * 1000);
}
BENCHMARK(BM_SampleRankOne)->Arg(30)->Arg(100)->Arg(300);

static void BM_LogLikelihoodRatios(benchmark::State& state) {
  const auto n = static_cast<Eigen::Index>(state.range(0));
  const GaussianParams params = linear_optimal_params(n);
  RngStream rng(2);
  const Eigen::MatrixXd points = sample(params, 1000, rng);
  for (auto _ : state)
    benchmark::DoNotOptimize(log_likelihood_ratios(params, points));
  state.SetItemsProcessed(state.iterations() * 1000);
}
BENCHMARK(BM_LogLikelihoodRatios)->Arg(30)->Arg(100)->Arg(300);

static void BM_CeMstarLinear(benchmark::State& state) {
  const auto n = static_cast<Eigen::Index>(state.range(0));
  const auto ls = make_linear_sum(n);
  EstimatorConfig cfg;
  cfg.family = CovarianceFamily::rank_one_along_mean();
  cfg.sample_size = 1000;
  std::uint64_t seed = 0;
  for (auto _ : state) {
    RngStream rng(seed++);
    benchmark::DoNotOptimize(run_ce(ls, cfg, rng));
  }
}
BENCHMARK(BM_CeMstarLinear)->Arg(30)->Arg(100);

static void BM_PortfolioEvaluate(benchmark::State& state) {
  const auto ls = make_portfolio(100, 0.25);
  RngStream rng(3);
  const Eigen::MatrixXd points =
      sample(GaussianParams::standard(ls.dim()), 1000, rng);
  for (auto _ : state)
    benchmark::DoNotOptimize(ls.evaluate_batch(points));
  state.SetItemsProcessed(state.iterations() * 1000);
}
BENCHMARK(BM_PortfolioEvaluate);

BENCHMARK_MAIN();
