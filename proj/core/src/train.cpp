// SPDX-FileCopyrightText: © 2026 The fxdpd Authors
//
// SPDX-License-Identifier: Apache-2.0

#include "fxdpd/train.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <tuple>

#include "fxdpd/metrics.hpp"
#include "fxdpd/rng.hpp"

namespace fxdpd {

std::string to_string(InitScheme s) { return s == InitScheme::kIdentity ? "identity" : "random"; }

InitScheme parse_init_scheme(std::string_view name) {
  if (name == "identity") return InitScheme::kIdentity;
  if (name == "random") return InitScheme::kRandom;
  throw std::invalid_argument("unknown init scheme '" + std::string(name) + "'");
}

void TrainConfig::validate() const {
  const auto fail = [](const std::string& msg) {
    throw std::invalid_argument("invalid train config: " + msg);
  };
  if (!(initial_lr > 0.0)) fail("initial_lr must be positive");
  if (!(min_lr > 0.0 && min_lr <= initial_lr)) fail("min_lr must be in (0, initial_lr]");
  if (!(lr_factor > 0.0 && lr_factor < 1.0)) fail("lr_factor must be in (0, 1)");
  if (patience < 1) fail("patience must be positive");
  if (!(plateau_threshold >= 0.0 && plateau_threshold < 1.0)) fail("plateau_threshold must be in [0, 1)");
  if (batch_size < 1) fail("batch_size must be positive");
  if (frame_length < 2) fail("frame_length must be at least 2");
  if (stride < 1) fail("stride must be positive");
  if (warmup_epochs < 1) fail("warmup_epochs must be positive");
  if (prune_rounds < 0) fail("prune_rounds must be >= 0");
  if (prune_rounds > 0 && epochs_per_prune < 1) fail("epochs_per_prune must be positive");
  if (!(prune_fraction > 0.0 && prune_fraction < 1.0)) fail("prune_fraction must be in (0, 1)");
  if (!(init_std >= 0.0)) fail("init_std must be >= 0");
  if (!(adam_beta1 >= 0.0 && adam_beta1 < 1.0 && adam_beta2 >= 0.0 && adam_beta2 < 1.0)) {
    fail("Adam betas must be in [0, 1)");
  }
  if (!(adam_eps > 0.0)) fail("adam_eps must be positive");
}

TrainConfig TrainConfig::preset(std::string_view name) {
  TrainConfig c;
  if (name == "full") return c;
  if (name == "ci") {
    c.batch_size = 16;
    c.frame_length = 200;
    c.stride = 200;
    c.warmup_epochs = 20;
    c.epochs_per_prune = 2;
    c.initial_lr = 3e-3;
    return c;
  }
  if (name == "acceptance") {
    c.batch_size = 8;
    c.frame_length = 250;
    c.stride = 125;
    c.warmup_epochs = 120;
    c.epochs_per_prune = 40;
    c.initial_lr = 3e-3;
    return c;
  }
  throw std::invalid_argument("unknown train preset '" + std::string(name) + "'");
}

std::vector<std::string> TrainConfig::preset_names() { return {"full", "ci", "acceptance"}; }

// ---------------------------------------------------------------------------

ParamGrads ParamGrads::zeros(const ModelConfig& cfg) {
  ParamGrads g;
  g.w_fc = RealMatrix(cfg.hidden_size, cfg.fc_input_width());
  g.b_fc.assign(static_cast<std::size_t>(cfg.hidden_size), 0.0);
  g.w_out = RealMatrix(2, cfg.out_input_width());
  g.b_out.assign(2, 0.0);
  return g;
}

void ParamGrads::scale(double s) {
  for (double& v : w_fc.data()) v *= s;
  for (double& v : w_out.data()) v *= s;
  for (double& v : b_fc) v *= s;
  for (double& v : b_out) v *= s;
}

void ParamGrads::add(const ParamGrads& o) {
  for (std::size_t i = 0; i < w_fc.size(); ++i) w_fc.data()[i] += o.w_fc.data()[i];
  for (std::size_t i = 0; i < w_out.size(); ++i) w_out.data()[i] += o.w_out.data()[i];
  for (std::size_t i = 0; i < b_fc.size(); ++i) b_fc[i] += o.b_fc[i];
  for (std::size_t i = 0; i < b_out.size(); ++i) b_out[i] += o.b_out[i];
}

double ParamGrads::max_abs() const {
  double m = 0.0;
  for (double v : w_fc.data()) m = std::max(m, std::abs(v));
  for (double v : w_out.data()) m = std::max(m, std::abs(v));
  for (double v : b_fc) m = std::max(m, std::abs(v));
  for (double v : b_out) m = std::max(m, std::abs(v));
  return m;
}

ModelParams init_params(const ModelConfig& cfg, InitScheme scheme, double init_std,
                        std::uint64_t seed) {
  cfg.validate();
  ModelParams p = ModelParams::zeros(cfg);
  Rng rng(seed);
  for (double& w : p.w_fc.data()) w = init_std * rng.normal();
  if (scheme == InitScheme::kRandom) {
    for (double& w : p.w_out.data()) w = init_std * rng.normal();
  } else {
    // After phase normalization the current sample is A_t + 0j, so routing A_t
    // to I_out and rotating back reproduces the input.
    p.w_out(0, 2 * cfg.memory_depth) = cfg.weight_format.max_value();
  }
  return p;
}

// ---------------------------------------------------------------------------

namespace {

void accumulate_backward(const EffectiveWeights& w, const FeatureStream& f, std::size_t row,
                         cd grad_u, const ModelConfig& cfg, bool quantize, NetworkTrace& trace,
                         ParamGrads& g) {
  const std::span<const double> x = f.row(row);
  network_forward(x, f.p[row], w, cfg, quantize, &trace);
  const double lo = cfg.act_format.min_value();
  const double hi = cfg.act_format.max_value();
  // u = o * conj(p)  =>  dL/do = dL/du * p
  const cd go = grad_u * f.p[row];
  const double gpre[2] = {
      trace.o_pre[0] >= lo && trace.o_pre[0] <= hi ? go.real() : 0.0,
      trace.o_pre[1] >= lo && trace.o_pre[1] <= hi ? go.imag() : 0.0,
  };
  const int nin = w.w_fc.cols();
  const int hidden = w.w_fc.rows();
  for (int r = 0; r < 2; ++r) {
    if (gpre[r] == 0.0) continue;
    g.b_out[static_cast<std::size_t>(r)] += gpre[r];
    double* gw = &g.w_out(r, 0);
    for (int c = 0; c < nin; ++c) gw[c] += gpre[r] * x[static_cast<std::size_t>(c)];
    for (int j = 0; j < hidden; ++j) {
      const double h = trace.h[static_cast<std::size_t>(j)];
      if (h > 0.0) gw[nin + j] += gpre[r] * h;
    }
  }
  for (int j = 0; j < hidden; ++j) {
    const double s = trace.h_pre[static_cast<std::size_t>(j)];
    if (!(s > 0.0 && s <= hi)) continue;
    const double dh = gpre[0] * w.w_out(0, nin + j) + gpre[1] * w.w_out(1, nin + j);
    if (dh == 0.0) continue;
    g.b_fc[static_cast<std::size_t>(j)] += dh;
    double* gw = &g.w_fc(j, 0);
    for (int c = 0; c < nin; ++c) gw[c] += dh * x[static_cast<std::size_t>(c)];
  }
}

// Zero the gradient of masked weights and, under quantization, of master
// values outside the representable range (straight-through estimator).
void finalize_grads(const ModelParams& params, const ModelConfig& cfg, bool quantize,
                    ParamGrads& g) {
  const double lo = cfg.weight_format.min_value();
  const double hi = cfg.weight_format.max_value();
  const auto in_range = [&](double v) { return !quantize || (v >= lo && v <= hi); };
  for (std::size_t i = 0; i < g.w_fc.size(); ++i) {
    if (params.mask_fc.data()[i] == 0 || !in_range(params.w_fc.data()[i])) g.w_fc.data()[i] = 0.0;
  }
  for (std::size_t i = 0; i < g.w_out.size(); ++i) {
    if (params.mask_out.data()[i] == 0 || !in_range(params.w_out.data()[i])) g.w_out.data()[i] = 0.0;
  }
  for (std::size_t i = 0; i < g.b_fc.size(); ++i) {
    if (!in_range(params.b_fc[i])) g.b_fc[i] = 0.0;
  }
  for (std::size_t i = 0; i < g.b_out.size(); ++i) {
    if (!in_range(params.b_out[i])) g.b_out[i] = 0.0;
  }
}

void forward_rows(const EffectiveWeights& w, const FeatureStream& f, std::size_t start,
                  std::size_t len, const ModelConfig& cfg, bool quantize, std::span<cd> out) {
  for (std::size_t i = 0; i < len; ++i) {
    out[i] = network_forward(f.row(start + i), f.p[start + i], w, cfg, quantize);
  }
}

}  // namespace

std::vector<cd> qat_forward(const ModelParams& params, const FeatureStream& features,
                            std::size_t start, std::size_t len, const ModelConfig& cfg,
                            bool quantize) {
  if (start + len > features.size()) throw std::out_of_range("qat_forward: rows out of range");
  const EffectiveWeights w = effective_weights(params, cfg, quantize);
  std::vector<cd> out(len);
  forward_rows(w, features, start, len, cfg, quantize, out);
  return out;
}

ParamGrads backward(const ModelParams& params, const FeatureStream& features, std::size_t start,
                    std::span<const cd> grad_u, const ModelConfig& cfg, bool quantize) {
  if (start + grad_u.size() > features.size()) {
    throw std::out_of_range("backward: rows out of range");
  }
  const EffectiveWeights w = effective_weights(params, cfg, quantize);
  ParamGrads g = ParamGrads::zeros(cfg);
  NetworkTrace trace;
  for (std::size_t i = 0; i < grad_u.size(); ++i) {
    if (grad_u[i] == cd{}) continue;
    accumulate_backward(w, features, start + i, grad_u[i], cfg, quantize, trace, g);
  }
  finalize_grads(params, cfg, quantize, g);
  return g;
}

double LossTerms::nmse_db() const {
  if (!(sum_sq_target > 0.0)) return 0.0;
  return to_db(sum_sq_error / sum_sq_target);
}

int frame_warmup(const ModelConfig& cfg, const PaCoeffs& pa) {
  return std::max(cfg.memory_depth, pa.memory());
}

LossTerms frame_loss(const ModelParams& params, const FeatureStream& features,
                     std::span<const cd> x, std::span<const std::size_t> frame_starts,
                     int frame_length, int warmup, const ModelConfig& cfg, const PaCoeffs& pa,
                     bool quantize, ParamGrads* grads) {
  if (warmup < 0 || warmup >= frame_length) {
    throw std::invalid_argument("frame_loss: warmup must be in [0, frame_length)");
  }
  const auto len = static_cast<std::size_t>(frame_length);
  const auto skip = static_cast<std::size_t>(warmup);
  const cd gain = pa.at(1, 0);
  const EffectiveWeights w = effective_weights(params, cfg, quantize);
  std::vector<cd> u(len);
  std::vector<cd> y(len);
  std::vector<cd> gy(len);
  std::vector<cd> gu(len);
  LossTerms terms;
  if (grads != nullptr) *grads = ParamGrads::zeros(cfg);
  NetworkTrace trace;
  for (std::size_t start : frame_starts) {
    if (start + len > features.size() || start + len > x.size()) {
      throw std::out_of_range("frame_loss: frame exceeds the stream");
    }
    forward_rows(w, features, start, len, cfg, quantize, u);
    pa_forward(u, y, pa);
    for (std::size_t i = 0; i < len; ++i) {
      if (i < skip) {
        gy[i] = cd{};
        continue;
      }
      const cd target = gain * x[start + i];
      const cd e = y[i] - target;
      terms.sum_sq_error += std::norm(e);
      terms.sum_sq_target += std::norm(target);
      ++terms.count;
      gy[i] = 2.0 * e;
    }
    if (grads == nullptr) continue;
    pa_backward(u, gy, gu, pa);
    for (std::size_t i = 0; i < len; ++i) {
      if (gu[i] == cd{}) continue;
      accumulate_backward(w, features, start + i, gu[i], cfg, quantize, trace, *grads);
    }
  }
  if (grads != nullptr) {
    if (terms.count > 0) grads->scale(1.0 / static_cast<double>(terms.count));
    finalize_grads(params, cfg, quantize, *grads);
  }
  return terms;
}

LossTerms evaluate_stream(const ModelParams& params, const FeatureStream& features,
                          std::span<const cd> x, std::size_t begin, std::size_t end, int warmup,
                          const ModelConfig& cfg, const PaCoeffs& pa, bool quantize) {
  if (begin > end || end > features.size() || end > x.size()) {
    throw std::out_of_range("evaluate_stream: range out of bounds");
  }
  const std::size_t len = end - begin;
  const std::vector<cd> u = qat_forward(params, features, begin, len, cfg, quantize);
  std::vector<cd> y(len);
  pa_forward(u, y, pa);
  const cd gain = pa.at(1, 0);
  LossTerms terms;
  for (std::size_t i = static_cast<std::size_t>(std::max(warmup, 0)); i < len; ++i) {
    const cd target = gain * x[begin + i];
    terms.sum_sq_error += std::norm(y[i] - target);
    terms.sum_sq_target += std::norm(target);
    ++terms.count;
  }
  return terms;
}

// ---------------------------------------------------------------------------

std::size_t prune_round(ModelParams& params, double fraction) {
  if (!(fraction > 0.0 && fraction < 1.0)) {
    throw std::invalid_argument("prune fraction must be in (0, 1)");
  }
  struct Candidate {
    double magnitude;
    int layer;
    int row;
    int col;
  };
  std::vector<Candidate> alive;
  const auto collect = [&alive](const RealMatrix& w, const MaskMatrix& m, int layer) {
    for (int r = 0; r < w.rows(); ++r) {
      for (int c = 0; c < w.cols(); ++c) {
        if (m(r, c) != 0) alive.push_back({std::abs(w(r, c)), layer, r, c});
      }
    }
  };
  collect(params.w_fc, params.mask_fc, 0);
  collect(params.w_out, params.mask_out, 1);
  const auto count = static_cast<std::size_t>(
      std::floor(fraction * static_cast<double>(alive.size())));
  if (count == 0) return 0;
  std::sort(alive.begin(), alive.end(), [](const Candidate& a, const Candidate& b) {
    return std::tie(a.magnitude, a.layer, a.row, a.col) <
           std::tie(b.magnitude, b.layer, b.row, b.col);
  });
  for (std::size_t i = 0; i < count; ++i) {
    const Candidate& c = alive[i];
    if (c.layer == 0) {
      params.mask_fc(c.row, c.col) = 0;
    } else {
      params.mask_out(c.row, c.col) = 0;
    }
  }
  params.apply_masks();
  return count;
}

PlateauScheduler::PlateauScheduler(const TrainConfig& cfg)
    : initial_(cfg.initial_lr),
      min_(cfg.min_lr),
      factor_(cfg.lr_factor),
      patience_(cfg.patience),
      threshold_(cfg.plateau_threshold),
      lr_(cfg.initial_lr),
      best_(std::numeric_limits<double>::infinity()) {}

bool PlateauScheduler::step(double val_loss) {
  if (val_loss < best_ * (1.0 - threshold_)) {
    best_ = val_loss;
    bad_ = 0;
    return false;
  }
  if (++bad_ <= patience_) return false;
  bad_ = 0;
  const double next = std::max(lr_ * factor_, min_);
  const bool reduced = next < lr_;
  lr_ = next;
  return reduced;
}

void PlateauScheduler::reset() {
  lr_ = initial_;
  best_ = std::numeric_limits<double>::infinity();
  bad_ = 0;
}

Adam::Adam(const ModelConfig& cfg, const TrainConfig& tc)
    : cfg_(cfg), b1_(tc.adam_beta1), b2_(tc.adam_beta2), eps_(tc.adam_eps) {
  reset();
}

void Adam::reset() {
  m_ = ParamGrads::zeros(cfg_);
  v_ = ParamGrads::zeros(cfg_);
  t_ = 0;
}

void Adam::step(ModelParams& params, const ParamGrads& g, double lr) {
  ++t_;
  const double c1 = 1.0 - std::pow(b1_, static_cast<double>(t_));
  const double c2 = 1.0 - std::pow(b2_, static_cast<double>(t_));
  const auto update = [&](double& w, double grad, double& m, double& v) {
    m = b1_ * m + (1.0 - b1_) * grad;
    v = b2_ * v + (1.0 - b2_) * grad * grad;
    w -= lr * (m / c1) / (std::sqrt(v / c2) + eps_);
  };
  for (std::size_t i = 0; i < params.w_fc.size(); ++i) {
    if (params.mask_fc.data()[i] == 0) continue;
    update(params.w_fc.data()[i], g.w_fc.data()[i], m_.w_fc.data()[i], v_.w_fc.data()[i]);
  }
  for (std::size_t i = 0; i < params.w_out.size(); ++i) {
    if (params.mask_out.data()[i] == 0) continue;
    update(params.w_out.data()[i], g.w_out.data()[i], m_.w_out.data()[i], v_.w_out.data()[i]);
  }
  for (std::size_t i = 0; i < params.b_fc.size(); ++i) update(params.b_fc[i], g.b_fc[i], m_.b_fc[i], v_.b_fc[i]);
  for (std::size_t i = 0; i < params.b_out.size(); ++i) {
    update(params.b_out[i], g.b_out[i], m_.b_out[i], v_.b_out[i]);
  }
  params.apply_masks();
}

DataSplit split_60_20_20(std::size_t n) {
  DataSplit s;
  s.train_end = n * 3 / 5;
  s.val_end = n * 4 / 5;
  return s;
}

// ---------------------------------------------------------------------------

TrainResult train_pipeline(std::span<const cd> x, DataSplit split, const ModelConfig& cfg,
                           const TrainConfig& tc, const PaCoeffs& pa,
                           const TrainCallbacks& callbacks) {
  cfg.validate();
  tc.validate();
  pa.validate();
  if (split.train_end > split.val_end || split.val_end > x.size()) {
    throw std::invalid_argument("train_pipeline: split boundaries out of order");
  }
  const int warmup = frame_warmup(cfg, pa);
  if (warmup >= tc.frame_length) {
    throw std::invalid_argument("train_pipeline: frame_length must exceed the warm-up length");
  }
  const auto len = static_cast<std::size_t>(tc.frame_length);
  std::vector<std::size_t> starts;
  for (std::size_t s = 0; s + len <= split.train_end; s += static_cast<std::size_t>(tc.stride)) {
    starts.push_back(s);
  }
  if (starts.size() < static_cast<std::size_t>(tc.batch_size)) {
    throw std::invalid_argument("train_pipeline: training split holds " +
                                std::to_string(starts.size()) + " frames, fewer than one batch of " +
                                std::to_string(tc.batch_size));
  }
  if (split.val_end - split.train_end < len) {
    throw std::invalid_argument("train_pipeline: validation split is shorter than one frame");
  }

  const FeatureStream features = compute_features(x, cfg, tc.feature_source);
  TrainResult result;
  ModelParams params = init_params(cfg, tc.init, tc.init_std, tc.seed);
  Rng rng(tc.seed ^ 0x9e3779b97f4a7c15ULL);
  PlateauScheduler sched(tc);
  Adam adam(cfg, tc);
  ParamGrads grads;
  int global_epoch = 0;

  const auto run_phase = [&](int round, int epochs) {
    sched.reset();
    adam.reset();
    double best_loss = std::numeric_limits<double>::infinity();
    double best_db = 0.0;
    ModelParams best = params;
    std::vector<std::size_t> order = starts;
    for (int e = 0; e < epochs; ++e) {
      for (std::size_t i = order.size(); i > 1; --i) {
        std::swap(order[i - 1], order[rng.uniform_index(i)]);
      }
      std::size_t used = order.size();
      if (tc.frames_per_epoch > 0) used = std::min(used, tc.frames_per_epoch);
      LossTerms train_terms;
      const double lr = sched.lr();
      for (std::size_t b = 0; b < used; b += static_cast<std::size_t>(tc.batch_size)) {
        const std::size_t nb = std::min(static_cast<std::size_t>(tc.batch_size), used - b);
        const LossTerms t =
            frame_loss(params, features, x, std::span<const std::size_t>(order.data() + b, nb),
                       tc.frame_length, warmup, cfg, pa, tc.qat, &grads);
        train_terms.sum_sq_error += t.sum_sq_error;
        train_terms.sum_sq_target += t.sum_sq_target;
        train_terms.count += t.count;
        adam.step(params, grads, lr);
      }
      const LossTerms val = evaluate_stream(params, features, x, split.train_end, split.val_end,
                                            warmup, cfg, pa, tc.qat);
      EpochRecord rec;
      rec.epoch = ++global_epoch;
      rec.round = round;
      rec.lr = lr;
      rec.train_nmse_db = train_terms.nmse_db();
      rec.val_loss = val.mse();
      rec.val_nmse_db = val.nmse_db();
      rec.sparsity = 1.0 - static_cast<double>(params.active_weights()) /
                               static_cast<double>(params.total_weights());
      result.history.push_back(rec);
      if (callbacks.on_epoch) callbacks.on_epoch(rec);
      if (val.mse() < best_loss) {
        best_loss = val.mse();
        best_db = val.nmse_db();
        best = params;
      }
      sched.step(val.mse());
    }
    params = best;
    RoundResult rr;
    rr.round = round;
    rr.params = params;
    rr.best_val_nmse_db = best_db;
    rr.active_weights = params.active_weights();
    rr.sparsity = 1.0 - static_cast<double>(rr.active_weights) /
                            static_cast<double>(params.total_weights());
    result.rounds.push_back(rr);
    if (callbacks.on_round) callbacks.on_round(rr);
  };

  run_phase(0, tc.warmup_epochs);
  for (int r = 1; r <= tc.prune_rounds; ++r) {
    prune_round(params, tc.prune_fraction);
    run_phase(r, tc.epochs_per_prune);
  }
  result.params = params;
  return result;
}

}  // namespace fxdpd
