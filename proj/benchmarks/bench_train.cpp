// SPDX-FileCopyrightText: © 2026 The fxdpd Authors
//
// SPDX-License-Identifier: Apache-2.0

#include <benchmark/benchmark.h>

#include "fxdpd/pa.hpp"
#include "fxdpd/signal.hpp"
#include "fxdpd/train.hpp"

namespace fxdpd {
namespace {

// One optimizer batch: forward, PA, adjoint and parameter gradients.
void BM_FrameLossBatch(benchmark::State& state) {
  const ModelConfig cfg;
  SignalSpec spec;
  spec.num_samples = 20000;
  const auto x = gen_baseband(spec).signal.samples;
  const FeatureStream f = compute_features(x, cfg, FeatureSource::kFixedPoint);
  const ModelParams p = init_params(cfg, InitScheme::kIdentity, 0.05, 1);
  const bool qat = state.range(0) != 0;
  std::vector<std::size_t> starts;
  for (std::size_t s = 0; s < 8; ++s) starts.push_back(s * 2000);
  const PaCoeffs pa = default_pa();
  ParamGrads g;
  for (auto _ : state) {
    benchmark::DoNotOptimize(
        frame_loss(p, f, x, starts, 250, frame_warmup(cfg, pa), cfg, pa, qat, &g));
  }
  state.SetItemsProcessed(state.iterations() * 8 * 250);
}
BENCHMARK(BM_FrameLossBatch)->Arg(0)->Arg(1)->Unit(benchmark::kMicrosecond);

void BM_ComputeFeatures(benchmark::State& state) {
  const ModelConfig cfg;
  SignalSpec spec;
  spec.num_samples = 16384;
  const auto x = gen_baseband(spec).signal.samples;
  for (auto _ : state) {
    benchmark::DoNotOptimize(compute_features(x, cfg, FeatureSource::kFixedPoint));
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(x.size()));
}
BENCHMARK(BM_ComputeFeatures)->Unit(benchmark::kMillisecond);

}  // namespace
}  // namespace fxdpd
