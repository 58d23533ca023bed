#include <benchmark/benchmark.h>

#include <cmath>

#include "cranopt/optimizer.hpp"
#include "cranopt/sim.hpp"

using namespace cranopt;

namespace {

struct Fixture {
  NetworkConfig cfg;
  ChannelSet chans;
  Design d;

  explicit Fixture(int n_bs) {
    cfg = NetworkConfig::uniform(n_bs, n_bs, 2, 1, std::pow(10.0, 0.5), 2.0);
    chans = fading_channels(cfg, 1.0, 1);
    d = initial_design(cfg, Formulation{});
  }
};

void BM_UserRate(benchmark::State& state) {
  const Fixture f(static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(user_rate(0, f.chans, f.d));
}
BENCHMARK(BM_UserRate)->Arg(2)->Arg(3)->Arg(4);

void BM_BackhaulAllSubsets(benchmark::State& state) {
  const Fixture f(static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(check_feasible(f.cfg, f.d, 1e-6));
}
BENCHMARK(BM_BackhaulAllSubsets)->Arg(2)->Arg(3)->Arg(4);

void BM_CornerPoint(benchmark::State& state) {
  const Fixture f(static_cast<int>(state.range(0)));
  std::vector<int> perm(static_cast<std::size_t>(f.cfg.n_bs()));
  for (int i = 0; i < f.cfg.n_bs(); ++i) perm[static_cast<std::size_t>(i)] = i;
  for (auto _ : state) benchmark::DoNotOptimize(corner_point(f.cfg, perm, f.d));
}
BENCHMARK(BM_CornerPoint)->Arg(2)->Arg(3)->Arg(4);

void BM_Subproblem(benchmark::State& state) {
  const Fixture f(static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(solve_subproblem(f.d, f.cfg, f.chans, Formulation{}));
}
BENCHMARK(BM_Subproblem)->Arg(2)->Arg(3)->Unit(benchmark::kMillisecond);

void BM_SolveJoint(benchmark::State& state) {
  ProblemSpec s;
  const Fixture f(static_cast<int>(state.range(0)));
  s.cfg = f.cfg;
  s.chans = f.chans;
  for (auto _ : state) benchmark::DoNotOptimize(solve_joint(s).sum_rate);
}
BENCHMARK(BM_SolveJoint)->Arg(2)->Arg(3)->Unit(benchmark::kMillisecond)->Iterations(3);

void BM_SolveFullCooperation(benchmark::State& state) {
  ProblemSpec s;
  const Fixture f(3);
  s.cfg = f.cfg;
  s.chans = f.chans;
  for (auto _ : state) benchmark::DoNotOptimize(solve_full_cooperation(s).sum_rate);
}
BENCHMARK(BM_SolveFullCooperation)->Unit(benchmark::kMillisecond);

void BM_Simulate(benchmark::State& state) {
  const Fixture f(3);
  const auto plan = plan_successive(f.cfg, f.d, {0, 1, 2});
  const auto prec = Precoder::from_covariances(f.d.r);
  const auto n = static_cast<std::size_t>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(simulate(f.cfg, plan, prec, n, 5).samples);
  state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations()) * state.range(0));
}
BENCHMARK(BM_Simulate)->Arg(10000)->Arg(100000)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
