// SPDX-FileCopyrightText: © 2026 The fxdpd Authors
//
// SPDX-License-Identifier: Apache-2.0

#include "gradcheck.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "fxdpd/rng.hpp"
#include "fxdpd/signal.hpp"

namespace fxdpd::testing {

GradCheckResult gradient_check(std::uint64_t seed, int memory_depth, int hidden, double std_dev,
                               double step, const PaCoeffs& pa) {
  const ModelConfig cfg = ModelConfig::with_precision(14, memory_depth, hidden);
  ModelParams p = ModelParams::zeros(cfg);
  Rng rng(seed);
  for (double& w : p.w_fc.data()) w = std_dev * rng.normal();
  for (double& w : p.w_out.data()) w = std_dev * rng.normal();
  for (double& b : p.b_fc) b = std_dev * rng.normal();
  for (double& b : p.b_out) b = std_dev * rng.normal();

  SignalSpec spec;
  spec.num_samples = 96;
  spec.seed = seed + 1000;
  const std::vector<cd> x = gen_baseband(spec).signal.samples;
  const FeatureStream f = compute_features(x, cfg, FeatureSource::kReference);
  const int warmup = frame_warmup(cfg, pa);
  const std::vector<std::size_t> starts{0, 40};
  const int len = 48;

  ParamGrads g;
  frame_loss(p, f, x, starts, len, warmup, cfg, pa, false, &g);
  const auto loss = [&](const ModelParams& q) {
    return frame_loss(q, f, x, starts, len, warmup, cfg, pa, false, nullptr).mse();
  };

  // Region of every ReLU / clamp over the frame rows.
  std::vector<std::size_t> rows;
  for (std::size_t s : starts) {
    for (int t = 0; t < len; ++t) rows.push_back(s + static_cast<std::size_t>(t));
  }
  const auto region = [&](double v) { return v < -1.0 ? 0 : v < 0.0 ? 1 : v < 1.0 ? 2 : 3; };
  const auto pattern = [&](const ModelParams& q) {
    const EffectiveWeights w = effective_weights(q, cfg, false);
    std::vector<int> out;
    NetworkTrace tr;
    for (std::size_t t : rows) {
      network_forward(f.row(t), f.p[t], w, cfg, false, &tr);
      for (double v : tr.h_pre) out.push_back(region(v));
      for (double v : tr.o_pre) out.push_back(region(v));
    }
    return out;
  };

  GradCheckResult res;
  const auto check = [&](double& param, double analytic, const std::string& name) {
    const double keep = param;
    double h = step;
    double up = 0.0;
    double down = 0.0;
    for (int attempt = 0; attempt < 4; ++attempt) {
      param = keep + h;
      up = loss(p);
      const std::vector<int> pu = pattern(p);
      param = keep - h;
      down = loss(p);
      const std::vector<int> pd = pattern(p);
      if (pu == pd || attempt == 3) break;
      ++res.refined;
      h /= 10.0;
    }
    param = keep;
    const double fd = (up - down) / (2.0 * h);
    const double scale = std::max({std::abs(analytic), std::abs(fd), 1e-8});
    const double rel = std::abs(analytic - fd) / scale;
    ++res.checked;
    if (rel > res.max_rel_error) {
      res.max_rel_error = rel;
      res.worst = name;
    }
  };
  for (int r = 0; r < p.w_fc.rows(); ++r) {
    for (int c = 0; c < p.w_fc.cols(); ++c) {
      check(p.w_fc(r, c), g.w_fc(r, c), "w_fc(" + std::to_string(r) + "," + std::to_string(c) + ")");
    }
  }
  for (int r = 0; r < p.w_out.rows(); ++r) {
    for (int c = 0; c < p.w_out.cols(); ++c) {
      check(p.w_out(r, c), g.w_out(r, c),
            "w_out(" + std::to_string(r) + "," + std::to_string(c) + ")");
    }
  }
  for (std::size_t i = 0; i < p.b_fc.size(); ++i) check(p.b_fc[i], g.b_fc[i], "b_fc" + std::to_string(i));
  for (std::size_t i = 0; i < p.b_out.size(); ++i) {
    check(p.b_out[i], g.b_out[i], "b_out" + std::to_string(i));
  }
  return res;
}

}  // namespace fxdpd::testing
