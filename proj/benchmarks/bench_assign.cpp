#include <benchmark/benchmark.h>

#include "oracles/instances.hpp"
#include "simota/assigner.hpp"

using namespace simota;

namespace {

// A 640x640 FPN has 8400 anchors; state.range(0) is the gt count.
instances::DetectionInstance big_instance(int gts) {
  SplitMix64 r(static_cast<std::uint64_t>(gts));
  instances::DetectionInstance d;
  d.spec = FpnSpec::with_size(640, 640);
  d.anchors = build_anchors(d.spec);
  for (int i = 0; i < gts; ++i)
    d.gts.push_back({{r.uniform(20, 620), r.uniform(20, 620), r.uniform(8, 300), r.uniform(8, 300)},
                     static_cast<int>(r.below(80))});
  for (const auto& a : d.anchors) {
    RawPrediction p;
    const auto& g = d.gts[r.below(d.gts.size())].box;
    p.t = encode(BBox{g.cx + r.normal() * 20, g.cy + r.normal() * 20, g.w, g.h}, a);
    p.obj_logit = r.normal();
    for (int c = 0; c < 80; ++c) p.cls_logits.push_back(r.normal() - 3);
    d.preds.push_back(decode(p, a));
  }
  return d;
}

}  // namespace

static void BM_CostMatrix(benchmark::State& state) {
  const auto d = big_instance(static_cast<int>(state.range(0)));
  AssignerConfig cfg;
  for (auto _ : state) benchmark::DoNotOptimize(cost_matrix(d.preds, d.anchors, d.gts, cfg));
  state.SetItemsProcessed(state.iterations() * state.range(0) * static_cast<std::int64_t>(d.anchors.size()));
}
BENCHMARK(BM_CostMatrix)->Arg(1)->Arg(8)->Arg(32)->Unit(benchmark::kMillisecond);

static void BM_SimOtaAssign(benchmark::State& state) {
  const auto d = big_instance(static_cast<int>(state.range(0)));
  AssignerConfig cfg;
  const auto cm = cost_matrix(d.preds, d.anchors, d.gts, cfg);
  for (auto _ : state) benchmark::DoNotOptimize(simota_assign(cm, cfg));
}
BENCHMARK(BM_SimOtaAssign)->Arg(1)->Arg(8)->Arg(32)->Unit(benchmark::kMicrosecond);

static void BM_Sinkhorn(benchmark::State& state) {
  const auto d = big_instance(static_cast<int>(state.range(0)));
  AssignerConfig cfg;
  const auto cm = cost_matrix(d.preds, d.anchors, d.gts, cfg);
  const auto ks = dynamic_k(cm.ious, cfg, cm.center_mask);
  SinkhornOptions opts;
  opts.max_iters = 200;
  for (auto _ : state) benchmark::DoNotOptimize(sinkhorn_ot(cm, ks, opts));
}
BENCHMARK(BM_Sinkhorn)->Arg(1)->Arg(8)->Unit(benchmark::kMillisecond);

static void BM_Hungarian(benchmark::State& state) {
  SplitMix64 r(7);
  const auto g = static_cast<std::size_t>(state.range(0));
  MatrixD c(g, 4 * g);
  for (double& v : c.data()) v = r.uniform();
  for (auto _ : state) benchmark::DoNotOptimize(hungarian(c));
}
BENCHMARK(BM_Hungarian)->RangeMultiplier(4)->Range(4, 256)->Unit(benchmark::kMicrosecond);
