#include <benchmark/benchmark.h>

#include "bcz/counting.hpp"

using namespace bcz;

namespace {

SurfacePtr surface_of(const std::string& name) {
  static std::map<std::string, SurfacePtr> cache;
  auto it = cache.find(name);
  if (it != cache.end()) return it->second;
  auto s = load_surface(std::string(BCZ_PRESET_DIR) + "/" + name + ".json");
  cache.emplace(name, s);
  return s;
}

void BM_QuadValArithmetic(benchmark::State& state) {
  QuadVal phi(Rational(1, 2), Rational(1, 2), 5);
  QuadVal x(Rational(355, 113), Rational(-7, 3), 5);
  for (auto _ : state) {
    QuadVal y = x * phi + phi / x - x;
    benchmark::DoNotOptimize(y.sign());
  }
}
BENCHMARK(BM_QuadValArithmetic);

void BM_ReturnMapExactTorus(benchmark::State& state) {
  auto torus = surface_of("torus");
  LatticeCache cache(torus);
  SectionPoint p = make_section_point(torus, QuadVal(Rational(611, 1000)),
                                      QuadVal(Rational(777, 1000)));
  SectionPoint cur = p;
  for (auto _ : state) {
    ReturnRecord rec = return_map(cur, cache);
    cur = rec.next;
    benchmark::DoNotOptimize(cur.s);
  }
}
BENCHMARK(BM_ReturnMapExactTorus);

void BM_ReturnMapFloatTorus(benchmark::State& state) {
  auto torus = surface_of("torus");
  LatticeCache cache(torus);
  auto table = cache.ensure(512.0);
  double s = 0.611, t = 0.777;
  for (auto _ : state) {
    auto step = return_map_f(*table, s, t, 1.0);
    if (step) {
      s = step->s;
      t = step->t;
    } else {
      s = 0.611;
      t = 0.777;
    }
    benchmark::DoNotOptimize(s);
  }
}
BENCHMARK(BM_ReturnMapFloatTorus);

void BM_CountInBoxFloat(benchmark::State& state) {
  auto torus = surface_of("torus");
  LatticeCache cache(torus, false);
  auto table = cache.ensure(32.0);
  BoxRegion box{0.2, 0.45, 20.0};
  double s = 0.7, t = 0.9;
  for (auto _ : state) {
    auto c = count_in_box_f(*table, s, t, box);
    benchmark::DoNotOptimize(c);
  }
}
BENCHMARK(BM_CountInBoxFloat);

void BM_EnumerateTriangleTorus(benchmark::State& state) {
  auto torus = surface_of("torus");
  const long long R = state.range(0);
  for (auto _ : state) {
    HeightTable t = heights_table_direct(torus, QuadVal(R), false, false);
    benchmark::DoNotOptimize(t.size());
  }
  state.SetComplexityN(R);
}
BENCHMARK(BM_EnumerateTriangleTorus)->Arg(64)->Arg(256)->Arg(1024)->Complexity();

void BM_EnumerateTriangleGolden(benchmark::State& state) {
  auto golden = surface_of("golden_l");
  const long long R = state.range(0);
  for (auto _ : state) {
    HeightTable t = heights_table_direct(golden, QuadVal(R), false, false);
    benchmark::DoNotOptimize(t.size());
  }
}
BENCHMARK(BM_EnumerateTriangleGolden)->Arg(32)->Arg(128);

}  // namespace

int main(int argc, char** argv) {
  benchmark::Initialize(&argc, argv);
  benchmark::RunSpecifiedBenchmarks();
  return 0;
}
