// Microbenchmarks: sparse matvec, banded LDL^H factorization and solve,
// dense Hermitian eigendecomposition.
#include <benchmark/benchmark.h>

#include <vector>

#include "semidirac/assembly.hpp"
#include "semidirac/eigensolve.hpp"
#include "semidirac/sparse.hpp"

using namespace semidirac;

namespace {

HermitianOperator square_grid_operator(int n) {
  return assemble_T(Grid2D(-10.0, 10.0, 10.0, 2 * n - 1, n), Params{1.0});
}

void bm_matvec(benchmark::State& state) {
  const auto op = square_grid_operator(static_cast<int>(state.range(0)));
  std::vector<cplx> x(op.dimension(), cplx(1.0, 0.5)), y(op.dimension());
  for (auto _ : state) {
    op.matrix().multiply(x, y);
    benchmark::DoNotOptimize(y.data());
  }
  state.SetItemsProcessed(static_cast<int64_t>(state.iterations() * op.matrix().nnz()));
}
BENCHMARK(bm_matvec)->Arg(41)->Arg(81);

void bm_band_ldl_factor(benchmark::State& state) {
  const auto op = square_grid_operator(static_cast<int>(state.range(0)));
  const auto plan = op.pivot_plan();
  for (auto _ : state) {
    BandLdl f(op.matrix(), 0.0, plan);
    benchmark::DoNotOptimize(f.inertia());
  }
}
BENCHMARK(bm_band_ldl_factor)->Arg(21)->Arg(41)->Unit(benchmark::kMillisecond);

void bm_band_ldl_solve(benchmark::State& state) {
  const auto op = square_grid_operator(static_cast<int>(state.range(0)));
  const BandLdl f(op.matrix(), 0.0, op.pivot_plan());
  std::vector<cplx> b(op.dimension(), cplx(1.0, -0.25)), x(op.dimension());
  for (auto _ : state) {
    f.solve(b, x);
    benchmark::DoNotOptimize(x.data());
  }
}
BENCHMARK(bm_band_ldl_solve)->Arg(41)->Arg(81)->Unit(benchmark::kMicrosecond);

void bm_dense_eigs(benchmark::State& state) {
  const auto op = square_grid_operator(static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(dense_eigs(op).pairs.size());
}
BENCHMARK(bm_dense_eigs)->Arg(9)->Arg(13)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
