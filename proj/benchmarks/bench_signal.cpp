// SPDX-FileCopyrightText: © 2026 The fxdpd Authors
//
// SPDX-License-Identifier: Apache-2.0

#include <benchmark/benchmark.h>

#include "fxdpd/metrics.hpp"
#include "fxdpd/pa.hpp"
#include "fxdpd/signal.hpp"

namespace fxdpd {
namespace {

void BM_GenBaseband(benchmark::State& state) {
  SignalSpec spec;
  spec.num_samples = static_cast<std::size_t>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(gen_baseband(spec));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_GenBaseband)->Arg(16384)->Unit(benchmark::kMillisecond);

void BM_PaForward(benchmark::State& state) {
  SignalSpec spec;
  spec.num_samples = 65536;
  const auto x = gen_baseband(spec).signal.samples;
  std::vector<cd> y(x.size());
  const PaCoeffs pa = default_pa();
  for (auto _ : state) {
    pa_forward(x, y, pa);
    benchmark::DoNotOptimize(y.data());
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(x.size()));
}
BENCHMARK(BM_PaForward)->Unit(benchmark::kMillisecond);

void BM_Acpr(benchmark::State& state) {
  SignalSpec spec;
  spec.num_samples = 65536;
  const auto x = gen_baseband(spec).signal.samples;
  for (auto _ : state) benchmark::DoNotOptimize(acpr(x, spec.sample_rate, spec.bandwidth));
}
BENCHMARK(BM_Acpr)->Unit(benchmark::kMillisecond);

void BM_Evm(benchmark::State& state) {
  SignalSpec spec;
  spec.num_samples = 65536;
  const Baseband bb = gen_baseband(spec);
  for (auto _ : state) benchmark::DoNotOptimize(evm(bb.signal.samples, 0, bb.symbols, spec));
}
BENCHMARK(BM_Evm)->Unit(benchmark::kMillisecond);

void BM_FitPa(benchmark::State& state) {
  SignalSpec spec;
  spec.num_samples = 16384;
  const auto x = gen_baseband(spec).signal.samples;
  std::vector<cd> y(x.size());
  pa_forward(x, y, default_pa());
  for (auto _ : state) benchmark::DoNotOptimize(fit_pa(x, y, 7, 3));
}
BENCHMARK(BM_FitPa)->Unit(benchmark::kMillisecond);

}  // namespace
}  // namespace fxdpd
