// SPDX-FileCopyrightText: © 2026 The fxdpd Authors
//
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "fxdpd/model.hpp"
#include "fxdpd/pa.hpp"

namespace fxdpd {

enum class InitScheme {
  kIdentity,  // W_OUT routes A_t to I_out; the untrained model is a pass-through
  kRandom,
};
std::string to_string(InitScheme s);
InitScheme parse_init_scheme(std::string_view name);

struct TrainConfig {
  double initial_lr = 1e-3;
  double min_lr = 1e-6;
  double lr_factor = 0.5;
  int patience = 6;
  double plateau_threshold = 1e-4;  // relative
  int batch_size = 256;             // frames
  int frame_length = 500;
  int stride = 1;
  int warmup_epochs = 400;
  int epochs_per_prune = 200;
  int prune_rounds = 6;
  double prune_fraction = 0.20;
  std::size_t frames_per_epoch = 0;  // 0 = every frame; otherwise a fresh random subset
  std::uint64_t seed = 1;
  bool qat = true;
  FeatureSource feature_source = FeatureSource::kFixedPoint;
  InitScheme init = InitScheme::kIdentity;
  double init_std = 0.05;
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;
  double adam_eps = 1e-8;

  // Throws std::invalid_argument on the first violated constraint.
  void validate() const;

  // "full", "ci" or "acceptance".
  static TrainConfig preset(std::string_view name);
  static std::vector<std::string> preset_names();

  friend bool operator==(const TrainConfig&, const TrainConfig&) = default;
};

// Gradients shaped like ModelParams.
struct ParamGrads {
  RealMatrix w_fc;
  std::vector<double> b_fc;
  RealMatrix w_out;
  std::vector<double> b_out;

  static ParamGrads zeros(const ModelConfig& cfg);
  void scale(double s);
  void add(const ParamGrads& other);
  double max_abs() const;
};

ModelParams init_params(const ModelConfig& cfg, InitScheme scheme, double init_std,
                        std::uint64_t seed);

// Forward over rows [start, start + len) of a feature stream. With `quantize`
// set, weights are quantized into the weight format and every product is
// rounded onto the accumulator grid exactly where the fixed-point datapath
// rounds; the master params are never modified.
std::vector<cd> qat_forward(const ModelParams& params, const FeatureStream& features,
                            std::size_t start, std::size_t len, const ModelConfig& cfg,
                            bool quantize);

// Parameter gradients given dL/dRe(u) + j dL/dIm(u) for each DPD output u of
// the same rows. Quantizers use straight-through gradients: identity where
// the pre-quantization value is representable, zero outside. Masked weights
// receive exactly zero.
ParamGrads backward(const ModelParams& params, const FeatureStream& features, std::size_t start,
                    std::span<const cd> grad_u, const ModelConfig& cfg, bool quantize);

// Direct-learning loss through a frozen PA model. Each frame runs the DPD and
// the PA on its own (PA memory starts empty); the first `warmup` outputs of
// every frame are excluded. loss = mean over the kept samples of
// |PA(DPD(x))_t - g x_t|^2 with g = a[1][0]. When `grads` is non-null it is
// overwritten with the gradient of mse().
struct LossTerms {
  double sum_sq_error = 0.0;
  double sum_sq_target = 0.0;
  std::size_t count = 0;
  double mse() const { return count == 0 ? 0.0 : sum_sq_error / static_cast<double>(count); }
  double nmse_db() const;
};

LossTerms frame_loss(const ModelParams& params, const FeatureStream& features,
                     std::span<const cd> x, std::span<const std::size_t> frame_starts,
                     int frame_length, int warmup, const ModelConfig& cfg, const PaCoeffs& pa,
                     bool quantize, ParamGrads* grads);

// Masks the floor(fraction * remaining) smallest-magnitude unmasked weights,
// ranked globally over both layers; ties broken by (layer, row, column).
// Returns the number of newly masked weights.
std::size_t prune_round(ModelParams& params, double fraction);

// ReduceLROnPlateau with a relative improvement threshold.
class PlateauScheduler {
 public:
  explicit PlateauScheduler(const TrainConfig& cfg);
  // Returns true when the learning rate was reduced.
  bool step(double val_loss);
  void reset();  // lr back to initial, counters cleared
  double lr() const { return lr_; }
  double best() const { return best_; }
  int bad_epochs() const { return bad_; }

 private:
  double initial_;
  double min_;
  double factor_;
  int patience_;
  double threshold_;
  double lr_;
  double best_;
  int bad_ = 0;
};

class Adam {
 public:
  Adam(const ModelConfig& cfg, const TrainConfig& tc);
  // Updates unmasked weights and all biases, then re-applies the masks.
  void step(ModelParams& params, const ParamGrads& grads, double lr);
  void reset();

 private:
  ModelConfig cfg_;
  double b1_;
  double b2_;
  double eps_;
  ParamGrads m_;
  ParamGrads v_;
  long t_ = 0;
};

struct DataSplit {
  std::size_t train_end = 0;  // [0, train_end)
  std::size_t val_end = 0;    // [train_end, val_end); test is [val_end, n)
  friend bool operator==(const DataSplit&, const DataSplit&) = default;
};
DataSplit split_60_20_20(std::size_t n);

struct EpochRecord {
  int epoch = 0;  // global, 1-based
  int round = 0;  // 0 = pre-pruning phase
  double lr = 0.0;
  double train_nmse_db = 0.0;
  double val_nmse_db = 0.0;
  double val_loss = 0.0;
  double sparsity = 0.0;
};

struct RoundResult {
  int round = 0;
  ModelParams params;  // best on validation within the round
  double best_val_nmse_db = 0.0;
  double sparsity = 0.0;
  std::size_t active_weights = 0;
};

struct TrainResult {
  ModelParams params;
  std::vector<EpochRecord> history;
  std::vector<RoundResult> rounds;
};

struct TrainCallbacks {
  std::function<void(const EpochRecord&)> on_epoch;
  std::function<void(const RoundResult&)> on_round;
};

// Warm-up training, then prune_rounds x (prune, reset lr/optimizer, train).
// `x` is the ideal baseband of the whole dataset; the PA model supplies the
// loss. Throws std::invalid_argument if the training split cannot fill one
// batch or the validation split is shorter than one frame.
TrainResult train_pipeline(std::span<const cd> x, DataSplit split, const ModelConfig& cfg,
                           const TrainConfig& tc, const PaCoeffs& pa,
                           const TrainCallbacks& callbacks = {});

// Stream evaluation of the DPD+PA cascade on rows [begin, end) against g*x.
LossTerms evaluate_stream(const ModelParams& params, const FeatureStream& features,
                          std::span<const cd> x, std::size_t begin, std::size_t end, int warmup,
                          const ModelConfig& cfg, const PaCoeffs& pa, bool quantize);

int frame_warmup(const ModelConfig& cfg, const PaCoeffs& pa);

}  // namespace fxdpd
