// Serial reference kernels against their OpenMP counterparts on a 2D mesh.
// Run with OMP_NUM_THREADS set to compare thread counts.

#include <benchmark/benchmark.h>

#include <cmath>
#include <map>

#include "kirchhoff/kernels.hpp"

using namespace kirchhoff;

namespace {

const DiscreteOperators& operators(int n) {
  static std::map<int, DiscreteOperators> cache;
  auto it = cache.find(n);
  if (it == cache.end())
    it = cache.emplace(n, assemble_operators(build_mesh(DomainKind::rectangle, {{0, 1}, {0, 1}}, n)))
             .first;
  return it->second;
}

Vector field(const DiscreteOperators& ops) {
  return ops.interpolate([](double x, double y) { return std::sin(3 * x) * std::sin(2 * y) + x * y; }).values;
}

auto cubic = [](double s) { return s + s * s * s; };

template <bool Parallel>
void load(benchmark::State& state) {
  const DiscreteOperators& ops = operators(static_cast<int>(state.range(0)));
  const Vector u = field(ops);
  Vector out;
  for (auto _ : state) {
    if constexpr (Parallel)
      kernels::parallel::galerkin_load(ops, u, cubic, out);
    else
      kernels::serial::galerkin_load(ops, u, cubic, out);
    benchmark::DoNotOptimize(out.data());
  }
  state.SetItemsProcessed(state.iterations() * ops.mesh().element_count());
}

template <bool Parallel>
void weighted_mass(benchmark::State& state) {
  const DiscreteOperators& ops = operators(static_cast<int>(state.range(0)));
  const Vector u = field(ops);
  std::vector<double> local;
  auto w = [](double s) { return 1 + 3 * s * s; };
  for (auto _ : state) {
    if constexpr (Parallel)
      kernels::parallel::element_weighted_mass(ops, u, w, local);
    else
      kernels::serial::element_weighted_mass(ops, u, w, local);
    benchmark::DoNotOptimize(local.data());
  }
  state.SetItemsProcessed(state.iterations() * ops.mesh().element_count());
}

template <bool Parallel>
void spmv(benchmark::State& state) {
  const DiscreteOperators& ops = operators(static_cast<int>(state.range(0)));
  const Vector u = field(ops);
  Vector y(ops.size());
  for (auto _ : state) {
    if constexpr (Parallel)
      kernels::parallel::symmetric_spmv(ops.stiffness(), u, y);
    else
      kernels::serial::symmetric_spmv(ops.stiffness(), u, y);
    benchmark::DoNotOptimize(y.data());
  }
}

template <bool Parallel>
void power(benchmark::State& state) {
  const DiscreteOperators& ops = operators(static_cast<int>(state.range(0)));
  const Vector u = field(ops);
  for (auto _ : state) {
    const double v = Parallel ? kernels::parallel::integrate_power(ops, u, 4)
                              : kernels::serial::integrate_power(ops, u, 4);
    benchmark::DoNotOptimize(v);
  }
}

}  // namespace

BENCHMARK(load<false>)->Name("galerkin_load/serial")->Arg(64)->Arg(256)->UseRealTime();
BENCHMARK(load<true>)->Name("galerkin_load/parallel")->Arg(64)->Arg(256)->UseRealTime();
BENCHMARK(weighted_mass<false>)->Name("weighted_mass/serial")->Arg(64)->Arg(256)->UseRealTime();
BENCHMARK(weighted_mass<true>)->Name("weighted_mass/parallel")->Arg(64)->Arg(256)->UseRealTime();
BENCHMARK(spmv<false>)->Name("symmetric_spmv/serial")->Arg(64)->Arg(256)->UseRealTime();
BENCHMARK(spmv<true>)->Name("symmetric_spmv/parallel")->Arg(64)->Arg(256)->UseRealTime();
BENCHMARK(power<false>)->Name("integrate_power/serial")->Arg(64)->Arg(256)->UseRealTime();
BENCHMARK(power<true>)->Name("integrate_power/parallel")->Arg(64)->Arg(256)->UseRealTime();

BENCHMARK_MAIN();
