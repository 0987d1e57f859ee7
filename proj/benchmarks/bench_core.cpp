#include <benchmark/benchmark.h>

#include <random>

#include "abl/cases.hpp"
#include "abl/dynamics.hpp"
#include "abl/operators.hpp"
#include "abl/poisson.hpp"
#include "abl/sgs.hpp"

namespace {

abl::CaseConfig gabls(int n) {
  abl::CaseConfig c = abl::CaseConfig::gabls1();
  c.nx = c.ny = c.nz = n;
  return c;
}

void BM_PoissonSolve(benchmark::State& st) {
  const abl::Grid g = gabls(int(st.range(0))).grid();
  abl::PoissonSolver solver(g);
  abl::ScalarField rhs(g, abl::Staggering::Center), p(g, abl::Staggering::Center);
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> d(-1.0, 1.0);
  double sum = 0.0;
  for (double& x : rhs.values()) sum += (x = d(rng));
  for (double& x : rhs.values()) x -= sum / double(rhs.size());
  for (auto _ : st) {
    solver.solve(rhs, p);
    benchmark::DoNotOptimize(p.data());
  }
  st.SetItemsProcessed(st.iterations() * int64_t(g.cell_count()));
}
BENCHMARK(BM_PoissonSolve)->Arg(16)->Arg(32)->Arg(64)->Unit(benchmark::kMillisecond);

void BM_StrainRate(benchmark::State& st) {
  const abl::CaseConfig c = gabls(int(st.range(0)));
  const abl::Grid g = c.grid();
  const abl::FlowState s = abl::init_gabls(c, 3);
  abl::StrainTensorField out(g);
  for (auto _ : st) {
    abl::strain_rate(g, {s.u, s.v, s.w}, out);
    benchmark::DoNotOptimize(out.xz.data());
  }
  st.SetItemsProcessed(st.iterations() * int64_t(g.cell_count()));
}
BENCHMARK(BM_StrainRate)->Arg(32)->Arg(64)->Unit(benchmark::kMillisecond);

void BM_MomentumRhs(benchmark::State& st) {
  const abl::CaseConfig c = gabls(int(st.range(0)));
  const abl::Grid g = c.grid();
  abl::Solver solver(g, c.solver_config());
  const abl::FlowState s = abl::init_gabls(c, 3);
  solver.evaluate(s);
  abl::MomentumTendency t;
  for (auto _ : st) {
    abl::momentum_rhs(g, s, solver.sgs(), solver.wall(), c.physics, t, solver.sampling_height());
    benchmark::DoNotOptimize(t.u.data());
  }
  st.SetItemsProcessed(st.iterations() * int64_t(g.cell_count()));
}
BENCHMARK(BM_MomentumRhs)->Arg(32)->Arg(64)->Unit(benchmark::kMillisecond);

void BM_FullStep(benchmark::State& st) {
  abl::CaseConfig c = gabls(int(st.range(0)));
  if (st.range(1)) c.sgs.model = abl::SgsModel::MfevTkeDrd;
  abl::Solver solver(c.grid(), c.solver_config());
  abl::FlowState s = abl::init_gabls(c, 3);
  for (auto _ : st) solver.advance(s);
  st.SetItemsProcessed(st.iterations() * int64_t(c.grid().cell_count()));
}
BENCHMARK(BM_FullStep)->Args({32, 0})->Args({32, 1})->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
