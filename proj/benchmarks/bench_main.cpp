#include <benchmark/benchmark.h>

#include <string>

#include "whf/config.hpp"
#include "whf/ode1.hpp"
#include "whf/ode2.hpp"

using namespace whf;

namespace {

const ProblemConfig& antipov() {
  static const ProblemConfig cfg = load_config(std::string(WHF_FIXTURE_DIR) + "/antipov.toml");
  return cfg;
}

// ODE2 descent cost against the number of RK4 steps N_b.
void BM_ode2_descent(benchmark::State& state) {
  const auto& cfg = antipov();
  const CommutantB B = build_B(*cfg.problem, cfg.poles);
  const auto steps = static_cast<std::size_t>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(integrate(*cfg.problem, B, cfg.L, steps));
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_ode2_descent)->Arg(250)->Arg(500)->Arg(1000)->Arg(2000)->Arg(4000)->Complexity(benchmark::oN)
    ->Unit(benchmark::kMillisecond);

// ODE1 cost against the number of evaluation points on a fixed trajectory.
void BM_ode1_points(benchmark::State& state) {
  const auto& cfg = antipov();
  const CommutantB B = build_B(*cfg.problem, cfg.poles);
  const Ode2Trajectory tr = integrate(*cfg.problem, B, cfg.L, cfg.steps);
  const Ode2System sys(*cfg.problem, B);
  std::vector<EvalPoint> pts;
  const auto n = static_cast<std::size_t>(state.range(0));
  for (std::size_t i = 0; i < n; ++i)
    pts.push_back(EvalPoint::straight(-0.95 + 1.9 * static_cast<double>(i) / static_cast<double>(n)));
  Ode1Options opts;
  opts.threads = 1;
  for (auto _ : state) benchmark::DoNotOptimize(solve_U(sys, tr, pts, opts));
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_ode1_points)->RangeMultiplier(4)->Range(1, 64)->Complexity(benchmark::oN)
    ->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
