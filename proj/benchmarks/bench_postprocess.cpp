#include <benchmark/benchmark.h>

#include "oracles/oracles.hpp"
#include "simota/evalmap.hpp"
#include "simota/postprocess.hpp"

using namespace simota;

namespace {

std::vector<Detection> random_dets(std::size_t n) {
  SplitMix64 r(n);
  std::vector<Detection> d;
  for (std::size_t i = 0; i < n; ++i)
    d.push_back({oracle::random_box(r, 640, 4, 120), static_cast<int>(r.below(8)), r.uniform(), i});
  return d;
}

}  // namespace

static void BM_NmsGreedy(benchmark::State& state) {
  const auto dets = random_dets(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(nms_greedy(dets, 0.65));
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_NmsGreedy)->RangeMultiplier(4)->Range(64, 4096)->Complexity();

// The O(n^2)-per-pass reference, for scale.
static void BM_NmsReference(benchmark::State& state) {
  const auto dets = random_dets(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(nms_reference(dets, 0.65));
}
BENCHMARK(BM_NmsReference)->RangeMultiplier(4)->Range(64, 1024);

static void BM_MeanAp(benchmark::State& state) {
  SplitMix64 r(3);
  std::vector<EvalImage> images(static_cast<std::size_t>(state.range(0)));
  std::size_t anchor = 0;
  for (auto& im : images) {
    for (int k = 0; k < 10; ++k) im.gts.push_back({oracle::random_box(r, 640, 10, 100), static_cast<int>(r.below(4))});
    for (const auto& g : im.gts)
      for (int c = 0; c < 3; ++c)
        im.dets.push_back({{g.box.cx + r.normal() * 5, g.box.cy + r.normal() * 5, g.box.w, g.box.h}, g.class_id,
                           r.uniform(), anchor++});
  }
  for (auto _ : state) benchmark::DoNotOptimize(mean_ap(images));
}
BENCHMARK(BM_MeanAp)->Arg(10)->Arg(100)->Unit(benchmark::kMillisecond);
