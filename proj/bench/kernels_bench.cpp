// Parallel kernels against their serial reference loops.
//   ./mpca_bench --benchmark_filter=spectra
// Set OMP_NUM_THREADS to vary the parallel width.

#include <benchmark/benchmark.h>

#include <vector>

#include "mpca/kernels.hpp"
#include "mpca/sampling.hpp"

using namespace mpca;

namespace {

const ObservationSet& data(Index n) {
  static std::vector<std::pair<Index, ObservationSet>> cache;
  for (const auto& [key, x] : cache) {
    if (key == n) return x;
  }
  SimulationConfig cfg;
  cfg.p = n;
  cfg.q = n;
  cfg.seed = 7;
  cache.emplace_back(n, gen_dataset(cfg).observations);
  return cache.back().second;
}

Matrix basis(Index n, Index k) { return OrthonormalBasis::identity(n).matrix().leftCols(k); }

template <auto Fn>
void spectra(benchmark::State& state) {
  const auto& x = data(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(Fn(x, 8));
}

template <auto Fn>
void gram(benchmark::State& state) {
  const auto& x = data(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(Fn(x, Side::left));
}

template <auto Fn>
void projected(benchmark::State& state) {
  const auto& x = data(state.range(0));
  const Matrix b = basis(x.q(), 3);
  for (auto _ : state) benchmark::DoNotOptimize(Fn(x, b, 3, Side::left));
}

template <auto Fn>
void covariance(benchmark::State& state) {
  const auto& x = data(state.range(0));
  const Matrix b = basis(x.q(), 3);
  for (auto _ : state) benchmark::DoNotOptimize(Fn(x, b, Side::left));
}

}  // namespace

BENCHMARK(spectra<&kernels::observation_spectra>)->Name("spectra/parallel")->Arg(20)->Arg(100)->Unit(benchmark::kMillisecond);
BENCHMARK(spectra<&kernels::reference::observation_spectra>)->Name("spectra/reference")->Arg(20)->Arg(100)->Unit(benchmark::kMillisecond);
BENCHMARK(gram<&kernels::gram_average>)->Name("gram/parallel")->Arg(20)->Arg(100)->Unit(benchmark::kMillisecond);
BENCHMARK(gram<&kernels::reference::gram_average>)->Name("gram/reference")->Arg(20)->Arg(100)->Unit(benchmark::kMillisecond);
BENCHMARK(projected<&kernels::projected_leading_vectors>)->Name("projected_vectors/parallel")->Arg(20)->Arg(100)->Unit(benchmark::kMillisecond);
BENCHMARK(projected<&kernels::reference::projected_leading_vectors>)->Name("projected_vectors/reference")->Arg(20)->Arg(100)->Unit(benchmark::kMillisecond);
BENCHMARK(covariance<&kernels::projected_covariance>)->Name("projected_covariance/parallel")->Arg(20)->Arg(100)->Unit(benchmark::kMillisecond);
BENCHMARK(covariance<&kernels::reference::projected_covariance>)->Name("projected_covariance/reference")->Arg(20)->Arg(100)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
