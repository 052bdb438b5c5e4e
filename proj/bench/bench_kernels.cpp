#include <benchmark/benchmark.h>

#include <random>

#include "conic/detail.hpp"
#include "regret/blas_env.hpp"
#include "regret/sim.hpp"
#include "regret/synth.hpp"

using namespace regret;

namespace {

LtvSystem spring_damper(int T) {
  Mat A(2, 2), B(2, 1);
  A << 1.0, 0.1, -0.02, 0.99;
  B << 0.0, 0.1;
  return LtvSystem::constant(A, B, Mat::Identity(2, 2), T);
}

CostWeights spring_damper_costs(int T) { return CostWeights::constant(0.1 * Mat::Identity(2, 2), Mat::Identity(1, 1), T); }

struct NormalFixture {
  conic::detail::Structure st;
  Eigen::MatrixXd Vd;

  explicit NormalFixture(int T) {
    const auto pb = SynthesisProblem::build(spring_damper(T), spring_damper_costs(T));
    const BuiltProgram bp = build_energy_program(pb, Vec::Ones(2), 10.0);
    st = conic::detail::build_structure(bp.program);
    const auto& blk = st.psd[0];
    std::mt19937 rng(1);
    std::normal_distribution<double> g;
    Eigen::MatrixXd Rinv = Eigen::MatrixXd::NullaryExpr(blk.size, blk.size, [&] { return g(rng); });
    Rinv.diagonal().array() += blk.size;
    Vd = conic::detail::atom_gram(blk, &Rinv);
  }
};

template <bool Parallel>
void BM_NormalAssembly(benchmark::State& state) {
  const NormalFixture fx(static_cast<int>(state.range(0)));
  Eigen::MatrixXd H(fx.st.m, fx.st.m);
  for (auto _ : state) {
    H.setZero();
    if constexpr (Parallel)
      conic::detail::accumulate_psd_normal(fx.st.psd[0], fx.Vd, fx.st.dense_index, H);
    else
      conic::detail::accumulate_psd_normal_serial(fx.st.psd[0], fx.Vd, fx.st.dense_index, H);
    benchmark::DoNotOptimize(H.data());
  }
  state.counters["vars"] = fx.st.m;
}

template <bool Parallel>
void BM_RolloutBatch(benchmark::State& state) {
  const int T = 100;
  const Plant plant = Plant::build(spring_damper(T), spring_damper_costs(T));
  const auto stk = build_stacked(plant.sys, plant.costs);
  const auto ctrl = CausalController::recover(stk, h2_response(stk));
  const auto sc = DisturbanceScenario::boundary_ellipsoid(Mat::Identity(2, 2), 7);
  std::vector<Vec> ws;
  for (std::int64_t i = 0; i < state.range(0); ++i) ws.push_back(generate(sc, 2, T, static_cast<std::uint64_t>(i)));
  const Vec x0 = (Vec(2) << 1.0, 10.0).finished();
  for (auto _ : state) {
    auto out = Parallel ? rollout_batch(plant, ctrl, x0, ws) : rollout_batch_serial(plant, ctrl, x0, ws);
    benchmark::DoNotOptimize(out.data());
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}

}  // namespace

BENCHMARK(BM_NormalAssembly<false>)->Name("normal_assembly/serial")->Arg(10)->Arg(20)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_NormalAssembly<true>)->Name("normal_assembly/parallel")->Arg(10)->Arg(20)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_RolloutBatch<false>)->Name("rollout_batch/serial")->Arg(256)->Arg(1000)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_RolloutBatch<true>)->Name("rollout_batch/parallel")->Arg(256)->Arg(1000)->Unit(benchmark::kMillisecond);

int main(int argc, char** argv) {
  regret::ensure_blas_env(argv);
  benchmark::Initialize(&argc, argv);
  if (benchmark::ReportUnrecognizedArguments(argc, argv)) return 1;
  benchmark::RunSpecifiedBenchmarks();
  benchmark::Shutdown();
}
