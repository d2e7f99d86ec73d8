#include <benchmark/benchmark.h>

#include <cmath>
#include <random>

#include "hhardy/czd.hpp"

using namespace hh;

namespace {

GridFunction bump_field(const GridSpec& g) {
  return GridFunction::sample(g, [](const HPoint& z) {
    const double s = koranyi_norm4(1, z.coords().data());
    return s < 1.0 ? std::pow(1.0 - s, 3) * (1.0 + 0.5 * z.x(0)) : 0.0;
  });
}

}  // namespace

static void BM_GroupLaw(benchmark::State& state) {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(-2.0, 2.0);
  std::vector<HPoint> pts;
  for (int i = 0; i < 1024; ++i) {
    HPoint z(1);
    z.x(0) = u(rng);
    z.x(1) = u(rng);
    z.t() = u(rng);
    pts.push_back(z);
  }
  double acc = 0.0;
  for (auto _ : state)
    for (std::size_t i = 0; i + 1 < pts.size(); ++i) acc += quasi_distance(pts[i], multiply(pts[i], pts[i + 1]));
  benchmark::DoNotOptimize(acc);
  state.SetItemsProcessed(state.iterations() * 1023);
}
BENCHMARK(BM_GroupLaw);

static void BM_Luxemburg(benchmark::State& state) {
  const GridSpec g = GridSpec::symmetric(1, 1.0, 1.0, int(state.range(0)), int(state.range(0)));
  const GridFunction f = bump_field(g);
  const OrliczSpec phi = OrliczSpec::tlog();
  for (auto _ : state) benchmark::DoNotOptimize(luxemburg_norm(f, phi));
  state.SetComplexityN(std::int64_t(g.size()));
}
BENCHMARK(BM_Luxemburg)->Arg(16)->Arg(32)->Arg(64);

static void BM_HardyLittlewood(benchmark::State& state) {
  const GridSpec g = GridSpec::symmetric(1, 1.5, 2.25, int(state.range(0)), int(state.range(0)) * 3 / 2);
  const GridFunction f = bump_field(g);
  for (auto _ : state) benchmark::DoNotOptimize(hl_maximal_field(f));
}
BENCHMARK(BM_HardyLittlewood)->Arg(12)->Arg(16)->Unit(benchmark::kMillisecond);

static void BM_GrandMaximal(benchmark::State& state) {
  const GridSpec g = GridSpec::symmetric(1, 1.5, 2.25, int(state.range(0)), int(state.range(0)) * 3 / 2);
  const GridFunction f = bump_field(g);
  for (auto _ : state) benchmark::DoNotOptimize(grand_maximal(f));
}
BENCHMARK(BM_GrandMaximal)->Arg(10)->Arg(16)->Unit(benchmark::kMillisecond);

static void BM_Potential(benchmark::State& state) {
  const GridSpec g = GridSpec::symmetric(1, 1.5, 2.25, int(state.range(0)), int(state.range(0)) * 3 / 2);
  const GridFunction f = bump_field(g);
  for (auto _ : state) benchmark::DoNotOptimize(potential(f));
}
BENCHMARK(BM_Potential)->Arg(10)->Arg(16)->Unit(benchmark::kMillisecond);

static void BM_WhitneyCover(benchmark::State& state) {
  const GridSpec g = GridSpec::symmetric(1, 1.5, 2.25, int(state.range(0)), int(state.range(0)) * 3 / 2);
  HPoint c(1);
  const GridSet O = GridSet::from_balls(g, {KoranyiBall{c, 0.9}});
  const WhitneyConstants k = WhitneyConstants::make(1.0, 1.0, 7);
  for (auto _ : state) benchmark::DoNotOptimize(whitney_cover(O, k));
}
BENCHMARK(BM_WhitneyCover)->Arg(16)->Arg(24)->Unit(benchmark::kMillisecond);

static void BM_AtomicDecompose(benchmark::State& state) {
  const GridSpec g = GridSpec::symmetric(1, 1.5, 2.25, 16, 24);
  const KoranyiBall b{HPoint(1), 0.8};
  const OrliczSpec phi = OrliczSpec::power(2.0);
  const Atom a = make_atom(bump_field(g), b, phi, kInfinity, 1);
  for (auto _ : state) benchmark::DoNotOptimize(atomic_decompose(a.samples, phi, 1));
}
BENCHMARK(BM_AtomicDecompose)->Unit(benchmark::kMillisecond);
BENCHMARK_MAIN();
