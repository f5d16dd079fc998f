// SPDX-FileCopyrightText: © 2026 The fxdpd Authors
//
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "fxdpd/fxp.hpp"
#include "fxdpd/invsqrt.hpp"
#include "fxdpd/signal.hpp"

namespace fxdpd {

// Phase-normalized time-delay network predistorter.
//
// Per sample t the network sees
//   x_fc = [I_PN (n), Q_PN (n), A_t..A_{t-n}, A^3_t..A^3_{t-n}]      (4n+2)
// where I_PN + jQ_PN are the n previous inputs rotated by P = conj(x_t)/|x_t|.
// Two dense layers follow: h = clamp(W_fc x_fc + b_fc), then
// o = clamp(W_out [x_fc, relu(h)] + b_out), and the output o is rotated back
// by conj(P). Clamps saturate to the activation range [-1, 1).
struct ModelConfig {
  int memory_depth = 2;
  int hidden_size = 12;
  FxpFormat act_format = kQ1_13;
  FxpFormat weight_format = kQ1_13;
  FxpFormat accum_format = kQ2_13;
  FxpFormat out_format = kQ2_27;
  Rounding weight_rounding = Rounding::kNearestEven;
  Rounding datapath_rounding = Rounding::kTruncate;
  InvSqrtConfig invsqrt{};
  MultiplierModel multiplier{};

  int fc_input_width() const { return 4 * memory_depth + 2; }
  int out_input_width() const { return fc_input_width() + hidden_size; }

  // Throws std::invalid_argument for inconsistent shapes or formats.
  void validate() const;

  // Weights/activations at `bits` (Q1.(bits-1)), accumulator Q2.(bits-1) and
  // output Q2.(2*bits-1); the default config is with_precision(14).
  static ModelConfig with_precision(int bits, int memory_depth = 2, int hidden_size = 12);

  std::string canonical_string() const;
  std::uint64_t datapath_hash() const;  // FNV-1a of canonical_string()

  friend bool operator==(const ModelConfig&, const ModelConfig&) = default;
};

std::uint64_t fnv1a64(std::string_view bytes);

template <class T>
class Matrix {
 public:
  Matrix() = default;
  Matrix(int rows, int cols, T fill = T{})
      : rows_(rows), cols_(cols), data_(static_cast<std::size_t>(rows * cols), fill) {}

  int rows() const { return rows_; }
  int cols() const { return cols_; }
  std::size_t size() const { return data_.size(); }
  T& operator()(int r, int c) { return data_[static_cast<std::size_t>(r * cols_ + c)]; }
  const T& operator()(int r, int c) const { return data_[static_cast<std::size_t>(r * cols_ + c)]; }
  std::span<T> row(int r) { return {data_.data() + static_cast<std::size_t>(r * cols_), static_cast<std::size_t>(cols_)}; }
  std::span<const T> row(int r) const {
    return {data_.data() + static_cast<std::size_t>(r * cols_), static_cast<std::size_t>(cols_)};
  }
  std::vector<T>& data() { return data_; }
  const std::vector<T>& data() const { return data_; }

  friend bool operator==(const Matrix&, const Matrix&) = default;

 private:
  int rows_ = 0;
  int cols_ = 0;
  std::vector<T> data_;
};

using RealMatrix = Matrix<double>;
using MaskMatrix = Matrix<std::uint8_t>;  // 1 = active, 0 = pruned

struct ModelParams {
  RealMatrix w_fc;
  std::vector<double> b_fc;
  RealMatrix w_out;
  std::vector<double> b_out;
  MaskMatrix mask_fc;
  MaskMatrix mask_out;

  // All-zero weights with every mask entry active.
  static ModelParams zeros(const ModelConfig& cfg);

  void apply_masks();
  std::size_t total_weights() const { return w_fc.size() + w_out.size(); }
  std::size_t active_weights() const;
  std::size_t bias_count() const { return b_fc.size() + b_out.size(); }

  // Throws std::invalid_argument if shapes disagree with cfg.
  void check_shape(const ModelConfig& cfg) const;

  friend bool operator==(const ModelParams&, const ModelParams&) = default;
};

// Raw weight-format integers; pruned weights are stored as 0.
struct QuantizedParams {
  Matrix<std::int64_t> w_fc;
  std::vector<std::int64_t> b_fc;
  Matrix<std::int64_t> w_out;
  std::vector<std::int64_t> b_out;
  MaskMatrix mask_fc;
  MaskMatrix mask_out;
  FxpFormat format = kQ1_13;

  friend bool operator==(const QuantizedParams&, const QuantizedParams&) = default;
};

QuantizedParams quantize_params(const ModelParams& params, const ModelConfig& cfg);
std::uint64_t params_hash(const QuantizedParams& q);

// ---------------------------------------------------------------------------
// Delay line shared by both paths: index 0 is the most recent entry.
template <class T>
class DelayLine {
 public:
  explicit DelayLine(std::size_t length = 0, T fill = T{}) : buf_(length, fill), fill_(fill) {}
  void push(const T& v) {
    if (buf_.empty()) return;
    for (std::size_t i = buf_.size() - 1; i > 0; --i) buf_[i] = buf_[i - 1];
    buf_[0] = v;
  }
  void reset() { std::fill(buf_.begin(), buf_.end(), fill_); }
  const T& operator[](std::size_t i) const { return buf_[i]; }
  std::size_t size() const { return buf_.size(); }
  std::span<const T> view() const { return buf_; }

 private:
  std::vector<T> buf_;
  T fill_;
};

struct FxpComplex {
  FxpValue i;
  FxpValue q;
  friend bool operator==(const FxpComplex&, const FxpComplex&) = default;
};

namespace fixedpoint {

// P = (I - jQ)/A. For a zero input P is exactly 1 and both rotations are
// bypassed (`unit`).
struct Phasor {
  FxpValue p_i;
  FxpValue p_q;
  bool unit = false;
};

struct Features {
  Phasor p;
  FxpValue a;
  FxpValue a3;
};

Features feature_extract(FxpValue i, FxpValue q, const InvSqrtUnit& unit, const ModelConfig& cfg);

// K_i * P for each delayed input; 4 multiplies and 2 adds per element, exact
// before the final clamp into the activation format.
void phase_normalize(std::span<const FxpComplex> k, const Phasor& p, const ModelConfig& cfg,
                     std::span<FxpValue> i_pn, std::span<FxpValue> q_pn);

struct LayerOutput {
  std::vector<FxpValue> y;          // act format, clamped
  std::vector<std::uint8_t> overflow;  // accumulator saturated, per neuron
};

// Per neuron: unmasked products re-quantized to the accumulator format, summed
// with the bias exactly, saturated, then clamped to the activation range.
LayerOutput fc_forward(std::span<const FxpValue> x_fc, const QuantizedParams& params,
                       const ModelConfig& cfg);
// x_out must already hold [x_fc, relu(y_fc)].
LayerOutput out_forward(std::span<const FxpValue> x_out, const QuantizedParams& params,
                        const ModelConfig& cfg);

FxpValue relu(FxpValue v);

// (I_out + jQ_out) * conj(P), exact, expressed in the output format.
FxpComplex phase_denormalize(FxpValue i_out, FxpValue q_out, const Phasor& p,
                             const ModelConfig& cfg);

struct DelayState {
  DelayLine<FxpComplex> k;  // n previous inputs
  DelayLine<FxpValue> a;    // n + 1 amplitudes, index 0 = current
  DelayLine<FxpValue> a3;   // n + 1 cubed amplitudes

  explicit DelayState(const ModelConfig& cfg);
  void reset();
};

struct StepResult {
  FxpComplex y;
  int overflow_count = 0;  // neurons whose accumulator saturated
};

StepResult dpd_forward(const FxpComplex& sample, DelayState& state, const QuantizedParams& params,
                       const ModelConfig& cfg, const InvSqrtUnit& unit);

}  // namespace fixedpoint

namespace reference {

struct Features {
  cd p{1.0, 0.0};
  double a = 0.0;   // clamped to the activation range
  double a3 = 0.0;  // clamped to the activation range
};

Features feature_extract(cd x, const ModelConfig& cfg);
void phase_normalize(std::span<const cd> k, cd p, const ModelConfig& cfg, std::span<double> i_pn,
                     std::span<double> q_pn);
std::vector<double> fc_forward(std::span<const double> x_fc, const ModelParams& params,
                               const ModelConfig& cfg);
std::array<double, 2> out_forward(std::span<const double> x_out, const ModelParams& params,
                                  const ModelConfig& cfg);
cd phase_denormalize(double i_out, double q_out, cd p);

struct DelayState {
  DelayLine<cd> k;
  DelayLine<double> a;
  DelayLine<double> a3;

  explicit DelayState(const ModelConfig& cfg);
  void reset();
};

cd dpd_forward(cd sample, DelayState& state, const ModelParams& params, const ModelConfig& cfg);

}  // namespace reference

// ---------------------------------------------------------------------------
// Stream-level helpers.

enum class DpdPath { kReference, kFixedPoint };
std::string to_string(DpdPath path);
DpdPath parse_dpd_path(std::string_view name);

class FixedPointDpd {
 public:
  FixedPointDpd(const ModelConfig& cfg, const ModelParams& params);
  FixedPointDpd(const ModelConfig& cfg, QuantizedParams params);

  fixedpoint::StepResult process(const FxpComplex& sample);
  void reset();

  // Inputs are quantized to the activation format (nearest-even, saturating).
  std::vector<FxpComplex> run(std::span<const FxpComplex> x);
  std::vector<cd> run(std::span<const cd> x);

  const ModelConfig& config() const { return cfg_; }
  const QuantizedParams& params() const { return params_; }
  const InvSqrtUnit& invsqrt() const { return unit_; }
  std::uint64_t overflow_events() const { return overflow_events_; }

 private:
  ModelConfig cfg_;
  QuantizedParams params_;
  InvSqrtUnit unit_;
  fixedpoint::DelayState state_;
  std::uint64_t overflow_events_ = 0;
};

class ReferenceDpd {
 public:
  ReferenceDpd(const ModelConfig& cfg, ModelParams params);
  cd process(cd sample);
  void reset();
  std::vector<cd> run(std::span<const cd> x);

 private:
  ModelConfig cfg_;
  ModelParams params_;
  reference::DelayState state_;
};

// Cold-start run of either path over a whole stream.
std::vector<cd> run_dpd(std::span<const cd> x, const ModelParams& params, const ModelConfig& cfg,
                        DpdPath path);

std::vector<FxpComplex> quantize_stream(std::span<const cd> x, FxpFormat fmt);

// ---------------------------------------------------------------------------
// Network kernel on precomputed features, shared by the reference path and
// quantization-aware training. Features depend only on the input stream, so
// they are computed once per stream.

enum class FeatureSource { kReference, kFixedPoint };
std::string to_string(FeatureSource s);
FeatureSource parse_feature_source(std::string_view name);

struct FeatureStream {
  int width = 0;
  std::vector<double> x_fc;  // size() * width, row-major
  std::vector<cd> p;

  std::size_t size() const { return p.size(); }
  std::span<const double> row(std::size_t t) const {
    return {x_fc.data() + t * static_cast<std::size_t>(width), static_cast<std::size_t>(width)};
  }
};

// kFixedPoint quantizes the input to the activation format and uses the
// bit-exact feature datapath; kReference uses real arithmetic.
FeatureStream compute_features(std::span<const cd> x, const ModelConfig& cfg, FeatureSource source);

// Masked (and, for QAT, quantized) weights as real numbers.
struct EffectiveWeights {
  RealMatrix w_fc;
  std::vector<double> b_fc;
  RealMatrix w_out;
  std::vector<double> b_out;
};

EffectiveWeights effective_weights(const ModelParams& params, const ModelConfig& cfg, bool quantize);

struct NetworkTrace {
  std::vector<double> h_pre;  // before clamp
  std::vector<double> h;      // after clamp
  std::array<double, 2> o_pre{};
  std::array<double, 2> o{};
};

// One sample through both layers and the output rotation. With
// `quantize_products` each product is rounded onto the accumulator grid using
// cfg.datapath_rounding, which reproduces the fixed-point layers exactly when
// the weights and features are already on their grids.
cd network_forward(std::span<const double> x_fc, cd p, const EffectiveWeights& w,
                   const ModelConfig& cfg, bool quantize_products, NetworkTrace* trace = nullptr);

double clamp_activation(double v, const ModelConfig& cfg);

// ---------------------------------------------------------------------------

struct ParamOpsReport {
  std::size_t total_weights = 0;
  std::size_t active_weights = 0;
  std::size_t biases = 0;
  std::size_t param_count = 0;  // active weights + biases
  double sparsity = 0.0;        // 1 - active/total weights
  std::size_t fex_ops = 0;
  std::size_t phase_norm_ops = 0;
  std::size_t fc_ops = 0;
  std::size_t out_ops = 0;
  std::size_t phase_denorm_ops = 0;
  std::size_t network_ops = 0;     // fc + out
  std::size_t ops_per_sample = 0;  // whole datapath
  std::string convention;
};

ParamOpsReport count_params_ops(const ModelParams& params, const ModelConfig& cfg);

}  // namespace fxdpd
