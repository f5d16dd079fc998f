// SPDX-FileCopyrightText: © 2026 The fxdpd Authors
//
// SPDX-License-Identifier: Apache-2.0

#include "bridge.hpp"

#include "fxdpd/rng.hpp"

namespace fxdpd::testing {

oracle::InterpreterConfig interpreter_config(const ModelConfig& cfg) {
  oracle::InterpreterConfig c;
  c.memory_depth = cfg.memory_depth;
  c.hidden_size = cfg.hidden_size;
  c.window_bits = cfg.invsqrt.window_bits;
  c.lut_addr_bits = cfg.invsqrt.lut_addr_bits;
  c.iter_count = cfg.invsqrt.iter_count;
  return c;
}

oracle::InterpreterParams interpreter_params(const QuantizedParams& q) {
  oracle::InterpreterParams p;
  p.w_fc = q.w_fc.data();
  p.b_fc = q.b_fc;
  p.w_out = q.w_out.data();
  p.b_out = q.b_out;
  p.mask_fc = q.mask_fc.data();
  p.mask_out = q.mask_out.data();
  return p;
}

std::vector<std::pair<std::int64_t, std::int64_t>> raw_pairs(std::span<const FxpComplex> x) {
  std::vector<std::pair<std::int64_t, std::int64_t>> out;
  out.reserve(x.size());
  for (const FxpComplex& s : x) out.emplace_back(s.i.raw, s.q.raw);
  return out;
}

QuantizedParams random_quantized(const ModelConfig& cfg, std::uint64_t seed, double keep) {
  ModelParams p = ModelParams::zeros(cfg);
  Rng rng(seed);
  const double hi = cfg.weight_format.max_value();
  const double lo = cfg.weight_format.min_value();
  for (double& w : p.w_fc.data()) w = rng.uniform(lo, hi);
  for (double& w : p.w_out.data()) w = rng.uniform(lo, hi);
  for (double& b : p.b_fc) b = rng.uniform(lo, hi);
  for (double& b : p.b_out) b = rng.uniform(lo, hi);
  for (auto& m : p.mask_fc.data()) m = rng.uniform01() < keep ? 1 : 0;
  for (auto& m : p.mask_out.data()) m = rng.uniform01() < keep ? 1 : 0;
  p.apply_masks();
  return quantize_params(p, cfg);
}

}  // namespace fxdpd::testing
