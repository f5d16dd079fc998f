// SPDX-FileCopyrightText: © 2026 The fxdpd Authors
//
// SPDX-License-Identifier: Apache-2.0

#include <benchmark/benchmark.h>

#include "fxdpd/invsqrt.hpp"
#include "fxdpd/model.hpp"
#include "fxdpd/rng.hpp"
#include "fxdpd/signal.hpp"
#include "fxdpd/train.hpp"

namespace fxdpd {
namespace {

std::vector<cd> stream(std::size_t n) {
  SignalSpec spec;
  spec.num_samples = n;
  return gen_baseband(spec).signal.samples;
}

ModelParams pruned_params(const ModelConfig& cfg, int rounds) {
  ModelParams p = init_params(cfg, InitScheme::kRandom, 0.1, 3);
  for (int r = 0; r < rounds; ++r) prune_round(p, 0.2);
  return p;
}

void BM_InvSqrt(benchmark::State& state) {
  const InvSqrtUnit unit{InvSqrtConfig{}};
  Rng rng(1);
  std::vector<std::uint64_t> z(4096);
  for (auto& v : z) v = 1 + rng.uniform_index(std::uint64_t{1} << 27);
  std::size_t i = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(unit.inv_sqrt(z[i++ & 4095]));
  }
  state.SetItemsProcessed(state.iterations());
}
BENCHMARK(BM_InvSqrt);

void BM_FeatureExtract(benchmark::State& state) {
  const ModelConfig cfg;
  const InvSqrtUnit unit(cfg.invsqrt);
  const auto x = quantize_stream(stream(4096), cfg.act_format);
  std::size_t i = 0;
  for (auto _ : state) {
    const FxpComplex& s = x[i++ & 4095];
    benchmark::DoNotOptimize(fixedpoint::feature_extract(s.i, s.q, unit, cfg));
  }
  state.SetItemsProcessed(state.iterations());
}
BENCHMARK(BM_FeatureExtract);

// Samples per second of the bit-exact datapath, dense (0) and after 6 rounds.
void BM_FixedPointDpd(benchmark::State& state) {
  const ModelConfig cfg;
  FixedPointDpd dpd(cfg, pruned_params(cfg, static_cast<int>(state.range(0))));
  const auto x = quantize_stream(stream(8192), cfg.act_format);
  for (auto _ : state) {
    dpd.reset();
    benchmark::DoNotOptimize(dpd.run(x));
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(x.size()));
}
BENCHMARK(BM_FixedPointDpd)->Arg(0)->Arg(6)->Unit(benchmark::kMillisecond);

void BM_ReferenceDpd(benchmark::State& state) {
  const ModelConfig cfg;
  const ModelParams p = pruned_params(cfg, 6);
  const auto x = stream(8192);
  for (auto _ : state) benchmark::DoNotOptimize(run_dpd(x, p, cfg, DpdPath::kReference));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(x.size()));
}
BENCHMARK(BM_ReferenceDpd)->Unit(benchmark::kMillisecond);

void BM_FcLayer(benchmark::State& state) {
  const ModelConfig cfg;
  const QuantizedParams q = quantize_params(pruned_params(cfg, 0), cfg);
  std::vector<FxpValue> x(static_cast<std::size_t>(cfg.fc_input_width()));
  Rng rng(2);
  for (auto& v : x) v = {static_cast<std::int64_t>(rng.uniform_index(16384)) - 8192, cfg.act_format};
  for (auto _ : state) benchmark::DoNotOptimize(fixedpoint::fc_forward(x, q, cfg));
}
BENCHMARK(BM_FcLayer);

void BM_CertifySubset(benchmark::State& state) {
  const InvSqrtConfig cfg;
  const auto z_max = static_cast<std::uint64_t>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(certify_error(cfg, z_max));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_CertifySubset)->Arg(1 << 20)->Unit(benchmark::kMillisecond);

}  // namespace
}  // namespace fxdpd
