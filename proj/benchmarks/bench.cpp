#include <benchmark/benchmark.h>

#include <cstdint>
#include <string>
#include <vector>

#include "onedim/analysis.hpp"
#include "onedim/diffeo.hpp"
#include "onedim/graph.hpp"
#include "onedim/obstruction.hpp"
#include "onedim/word.hpp"

using namespace onedim;

namespace {

Diffeo layered_map() {
  return Diffeo::compose({
      Diffeo::bump_push(Manifold::interval, 0.1, 0.4, 0.05),
      Diffeo::inverse(Diffeo::bump_push(Manifold::interval, 0.3, 0.8, 0.04)),
      Diffeo::spline(Manifold::interval, {0.0, 0.5, 1.0}, {0.0, 0.45, 1.0},
                     {1.0, 0.9, 1.0}),
  });
}

void bm_evaluate(benchmark::State& state) {
  Diffeo f = layered_map();
  double x = 0.0;
  for (auto _ : state) {
    x += 0.373;
    if (x > 1.0) x -= 1.0;
    benchmark::DoNotOptimize(f(x));
  }
}
BENCHMARK(bm_evaluate);

void bm_derivative(benchmark::State& state) {
  Diffeo f = layered_map();
  double x = 0.0;
  for (auto _ : state) {
    x += 0.373;
    if (x > 1.0) x -= 1.0;
    benchmark::DoNotOptimize(f.derivative(x));
  }
}
BENCHMARK(bm_derivative);

void bm_fixed_set(benchmark::State& state) {
  Diffeo f = Diffeo::compose({
      Diffeo::bump_push(Manifold::interval, 0.1, 0.3, 0.02),
      Diffeo::bump_push(Manifold::interval, 0.5, 0.9, 0.03),
  });
  RunConfig cfg;
  cfg.grid_pow = static_cast<int>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(fixed_set(f, cfg));
}
BENCHMARK(bm_fixed_set)->Arg(10)->Arg(14);

void bm_build_cotree(benchmark::State& state) {
  // the complete multipartite-ish worst case: alternating join/union layers
  int n = static_cast<int>(state.range(0));
  std::vector<std::string> vs;
  std::vector<std::pair<std::string, std::string>> es;
  for (int i = 0; i < n; ++i) vs.push_back("v" + std::to_string(i));
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j)
      if ((j - i) % 2 == 1) es.emplace_back(vs[i], vs[j]);
  SimplicialGraph g(vs, es);
  for (auto _ : state) benchmark::DoNotOptimize(build_cotree(g));
}
BENCHMARK(bm_build_cotree)->Arg(8)->Arg(16)->Arg(32);

void bm_reduce_in_raag(benchmark::State& state) {
  RaagPresentation p{SimplicialGraph(
      {"a", "b", "c", "d"}, {{"b", "d"}, {"d", "a"}, {"a", "c"}})};
  FreeWord w = FreeWord::parse(
      "a b c d a^-1 b^-1 c^-1 d^-1 a c a^-1 c^-1 b d b^-1 d^-1 a b c d");
  for (auto _ : state) benchmark::DoNotOptimize(reduce_in_raag(w, p));
}
BENCHMARK(bm_reduce_in_raag);

void bm_two_jumps(benchmark::State& state) {
  // the symmetric jump pair: f fixes [y+h,1], g fixes [0,y-h]
  double y = 0.5, h = 0.0625;
  double s1 = (y - h) / y, s3 = (1.0 - y - h) / (1.0 - y);
  Diffeo f = Diffeo::spline(Manifold::interval, {0.0, y, y + h, 1.0},
                            {0.0, y - h, y + h, 1.0}, {s1, s1, 1.0, 1.0});
  Diffeo g = Diffeo::spline(Manifold::interval, {0.0, y - h, y, 1.0},
                            {0.0, y - h, y + h, 1.0}, {1.0, 1.0, s3, s3});
  std::vector<TwoJumpsConfig> cfgs{{y, Ival{y - h, y + h}}};
  for (auto _ : state) benchmark::DoNotOptimize(two_jumps(f, g, cfgs));
}
BENCHMARK(bm_two_jumps);

}  // namespace

BENCHMARK_MAIN();
