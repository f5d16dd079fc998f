// SPDX-FileCopyrightText: © 2026 The fxdpd Authors
//
// SPDX-License-Identifier: Apache-2.0

#include "fxdpd/evaluate.hpp"

#include <stdexcept>

#include "fxdpd/train.hpp"

namespace fxdpd {

namespace {

SegmentMetrics score(std::span<const cd> y, std::span<const cd> target, std::size_t first_sample,
                     double sample_rate, double bandwidth, int seg, const EvmReference& ref) {
  SegmentMetrics m;
  m.nmse_db = nmse(y, target).db;
  m.acpr = acpr(y, sample_rate, bandwidth, 0.0, seg, seg / 2);
  if (ref.spec != nullptr && !ref.symbols.empty()) {
    try {
      m.evm_db = evm(y, first_sample, ref.symbols, *ref.spec).db;
    } catch (const std::invalid_argument&) {
      // segment too short to hold one full symbol pulse
    }
  }
  return m;
}

}  // namespace

LinearizationReport evaluate_linearization(std::span<const cd> x, std::size_t begin,
                                           std::size_t end, const ModelParams& params,
                                           const ModelConfig& cfg, DpdPath path,
                                           const PaCoeffs& pa, double sample_rate,
                                           double bandwidth, EvmReference evm_ref) {
  if (begin > end || end > x.size()) {
    throw std::invalid_argument("evaluate_linearization: range out of bounds");
  }
  const auto warmup = static_cast<std::size_t>(frame_warmup(cfg, pa));
  if (end - begin < warmup + 128) {
    throw std::invalid_argument("evaluate_linearization: fewer than 128 scored samples");
  }
  const std::span<const cd> seg = x.subspan(begin, end - begin);

  LinearizationReport r;
  r.path = path;
  r.begin = begin + warmup;
  r.end = end;
  const std::size_t scored = end - r.begin;
  int psd = 4096;
  while (static_cast<std::size_t>(psd) > scored / 2 && psd > 64) psd /= 2;
  r.psd_segment = psd;

  std::vector<cd> u;
  if (path == DpdPath::kFixedPoint) {
    FixedPointDpd dpd(cfg, params);
    u = dpd.run(seg);
    r.overflow_events = dpd.overflow_events();
  } else {
    u = run_dpd(seg, params, cfg, path);
  }
  std::vector<cd> y(u.size());
  pa_forward(u, y, pa);
  std::vector<cd> y0(seg.size());
  pa_forward(seg, y0, pa);

  const cd g = pa.at(1, 0);
  std::vector<cd> target(scored);
  for (std::size_t t = 0; t < scored; ++t) target[t] = g * seg[warmup + t];
  r.pa_out_dpd.assign(y.begin() + static_cast<std::ptrdiff_t>(warmup), y.end());
  r.pa_out_baseline.assign(y0.begin() + static_cast<std::ptrdiff_t>(warmup), y0.end());
  r.dpd = score(r.pa_out_dpd, target, r.begin, sample_rate, bandwidth, psd, evm_ref);
  r.baseline = score(r.pa_out_baseline, target, r.begin, sample_rate, bandwidth, psd, evm_ref);
  return r;
}

}  // namespace fxdpd
