// SPDX-FileCopyrightText: © 2026 The fxdpd Authors
//
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <optional>
#include <span>
#include <vector>

#include "fxdpd/metrics.hpp"
#include "fxdpd/model.hpp"
#include "fxdpd/pa.hpp"
#include "fxdpd/signal.hpp"

namespace fxdpd {

struct SegmentMetrics {
  double nmse_db = 0.0;  // against a[1][0] * x
  AcprResult acpr;
  std::optional<double> evm_db;
};

struct LinearizationReport {
  DpdPath path = DpdPath::kReference;
  std::size_t begin = 0;  // first scored sample (after warm-up)
  std::size_t end = 0;
  int psd_segment = 0;
  SegmentMetrics dpd;
  SegmentMetrics baseline;  // PA alone
  std::uint64_t overflow_events = 0;
  std::vector<cd> pa_out_dpd;       // scored samples
  std::vector<cd> pa_out_baseline;  // scored samples
};

// Optional symbol reference for EVM: the spec that generated x (sample 0 of x
// is sample 0 of the spec's waveform) and its symbols.
struct EvmReference {
  const SignalSpec* spec = nullptr;
  std::span<const cd> symbols;
};

// Runs the DPD from a cold start on x[begin, end), feeds the PA model and
// scores the samples after the warm-up of max(n, M) against the PA-only
// baseline on the same samples. The Welch segment is 4096 when the scored
// length allows, else the largest power of two not above half of it (>= 64).
// Throws std::invalid_argument when the scored range is shorter than 128.
LinearizationReport evaluate_linearization(std::span<const cd> x, std::size_t begin,
                                           std::size_t end, const ModelParams& params,
                                           const ModelConfig& cfg, DpdPath path,
                                           const PaCoeffs& pa, double sample_rate,
                                           double bandwidth, EvmReference evm_ref = {});

}  // namespace fxdpd
