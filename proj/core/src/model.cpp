// SPDX-FileCopyrightText: © 2026 The fxdpd Authors
//
// SPDX-License-Identifier: Apache-2.0

#include "fxdpd/model.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace fxdpd {

// ---------------------------------------------------------------------------
// Config

void ModelConfig::validate() const {
  const auto fail = [](const std::string& msg) {
    throw std::invalid_argument("invalid model config: " + msg);
  };
  if (memory_depth < 1) fail("memory_depth must be >= 1");
  if (hidden_size < 1) fail("hidden_size must be >= 1");
  act_format.validate();
  weight_format.validate();
  accum_format.validate();
  out_format.validate();
  if (act_format.int_bits != 1) fail("act_format must have exactly one integer bit");
  if (weight_format.int_bits != 1) fail("weight_format must have exactly one integer bit");
  if (accum_format.frac_bits != act_format.frac_bits) {
    fail("accum_format must share the activation fraction bits");
  }
  if (accum_format.int_bits < 2) fail("accum_format needs at least two integer bits");
  if (weight_format.frac_bits > accum_format.frac_bits) {
    fail("weight_format cannot carry more fraction bits than accum_format");
  }
  if (out_format.frac_bits < 2 * act_format.frac_bits) {
    fail("out_format must hold the exact denormalized product (2x activation fraction bits)");
  }
  if (out_format.int_bits < 2) fail("out_format needs at least two integer bits");
  invsqrt.validate();
  if (invsqrt.input_frac_bits != 2 * act_format.frac_bits) {
    fail("inverse-sqrt input fraction bits must be twice the activation fraction bits");
  }
  if (invsqrt.input_bits < 2 * act_format.width() - 1) {
    fail("inverse-sqrt input is narrower than I^2 + Q^2");
  }
  if (!multiplier.accepts(weight_format.width(), act_format.width())) {
    throw WidthError(weight_format.width(), act_format.width(), multiplier.wide_port,
                     multiplier.narrow_port);
  }
}

ModelConfig ModelConfig::with_precision(int bits, int memory_depth, int hidden_size) {
  if (bits < 4 || bits > 18) throw std::invalid_argument("precision must be in [4, 18] bits");
  ModelConfig cfg;
  cfg.memory_depth = memory_depth;
  cfg.hidden_size = hidden_size;
  cfg.act_format = {1, bits - 1};
  cfg.weight_format = {1, bits - 1};
  cfg.accum_format = {2, bits - 1};
  cfg.out_format = {2, 2 * (bits - 1) + 1};
  cfg.invsqrt = InvSqrtConfig::for_activation(cfg.act_format);
  return cfg;
}

std::string ModelConfig::canonical_string() const {
  std::ostringstream os;
  os << "n=" << memory_depth << ";hidden=" << hidden_size << ";act=" << act_format.to_string()
     << ";weight=" << weight_format.to_string() << ";accum=" << accum_format.to_string()
     << ";out=" << out_format.to_string() << ";weight_rounding=" << to_string(weight_rounding)
     << ";datapath_rounding=" << to_string(datapath_rounding) << ";invsqrt=" << invsqrt.window_bits
     << ',' << invsqrt.lut_addr_bits << ',' << invsqrt.seed_frac_bits << ',' << invsqrt.iter_count
     << ',' << invsqrt.input_bits << ',' << invsqrt.input_frac_bits
     << ";multiplier=" << multiplier.wide_port << 'x' << multiplier.narrow_port;
  return os.str();
}

std::uint64_t fnv1a64(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (char c : bytes) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::uint64_t ModelConfig::datapath_hash() const { return fnv1a64(canonical_string()); }

// ---------------------------------------------------------------------------
// Params

ModelParams ModelParams::zeros(const ModelConfig& cfg) {
  ModelParams p;
  p.w_fc = RealMatrix(cfg.hidden_size, cfg.fc_input_width());
  p.b_fc.assign(static_cast<std::size_t>(cfg.hidden_size), 0.0);
  p.w_out = RealMatrix(2, cfg.out_input_width());
  p.b_out.assign(2, 0.0);
  p.mask_fc = MaskMatrix(cfg.hidden_size, cfg.fc_input_width(), 1);
  p.mask_out = MaskMatrix(2, cfg.out_input_width(), 1);
  return p;
}

void ModelParams::apply_masks() {
  for (std::size_t i = 0; i < w_fc.size(); ++i) {
    if (mask_fc.data()[i] == 0) w_fc.data()[i] = 0.0;
  }
  for (std::size_t i = 0; i < w_out.size(); ++i) {
    if (mask_out.data()[i] == 0) w_out.data()[i] = 0.0;
  }
}

std::size_t ModelParams::active_weights() const {
  std::size_t n = 0;
  for (auto m : mask_fc.data()) n += m != 0;
  for (auto m : mask_out.data()) n += m != 0;
  return n;
}

void ModelParams::check_shape(const ModelConfig& cfg) const {
  const auto fail = [](const std::string& what) {
    throw std::invalid_argument("model params do not match config: " + what);
  };
  if (w_fc.rows() != cfg.hidden_size || w_fc.cols() != cfg.fc_input_width()) fail("W_FC shape");
  if (b_fc.size() != static_cast<std::size_t>(cfg.hidden_size)) fail("b_FC length");
  if (w_out.rows() != 2 || w_out.cols() != cfg.out_input_width()) fail("W_OUT shape");
  if (b_out.size() != 2) fail("b_OUT length");
  if (mask_fc.rows() != w_fc.rows() || mask_fc.cols() != w_fc.cols()) fail("mask_FC shape");
  if (mask_out.rows() != w_out.rows() || mask_out.cols() != w_out.cols()) fail("mask_OUT shape");
}

QuantizedParams quantize_params(const ModelParams& params, const ModelConfig& cfg) {
  params.check_shape(cfg);
  const FxpFormat f = cfg.weight_format;
  const Rounding r = cfg.weight_rounding;
  const auto q = [&](double v) { return quantize(v, f, r).value.raw; };
  QuantizedParams out;
  out.format = f;
  out.mask_fc = params.mask_fc;
  out.mask_out = params.mask_out;
  out.w_fc = Matrix<std::int64_t>(params.w_fc.rows(), params.w_fc.cols());
  for (std::size_t i = 0; i < params.w_fc.size(); ++i) {
    out.w_fc.data()[i] = params.mask_fc.data()[i] != 0 ? q(params.w_fc.data()[i]) : 0;
  }
  out.w_out = Matrix<std::int64_t>(params.w_out.rows(), params.w_out.cols());
  for (std::size_t i = 0; i < params.w_out.size(); ++i) {
    out.w_out.data()[i] = params.mask_out.data()[i] != 0 ? q(params.w_out.data()[i]) : 0;
  }
  for (double b : params.b_fc) out.b_fc.push_back(q(b));
  for (double b : params.b_out) out.b_out.push_back(q(b));
  return out;
}

std::uint64_t params_hash(const QuantizedParams& q) {
  std::ostringstream os;
  os << q.format.to_string();
  const auto put = [&os](char tag, const std::vector<std::int64_t>& v) {
    os << ';' << tag;
    for (auto x : v) os << ',' << x;
  };
  const auto put_mask = [&os](char tag, const MaskMatrix& m) {
    os << ';' << tag << m.rows() << 'x' << m.cols() << ':';
    for (auto x : m.data()) os << static_cast<int>(x);
  };
  put('W', q.w_fc.data());
  put('b', q.b_fc);
  put('O', q.w_out.data());
  put('c', q.b_out);
  put_mask('M', q.mask_fc);
  put_mask('N', q.mask_out);
  return fnv1a64(os.str());
}

// ---------------------------------------------------------------------------
// Fixed-point path

namespace fixedpoint {

namespace {

void check_act(FxpValue v, const ModelConfig& cfg, const char* what) {
  if (v.format != cfg.act_format) {
    throw std::invalid_argument(std::string(what) + " must be in " + cfg.act_format.to_string() +
                                ", got " + v.format.to_string());
  }
}

void check_mul(int wa, int wb, const MultiplierModel& m) {
  if (!m.accepts(wa, wb)) throw WidthError(wa, wb, m.wide_port, m.narrow_port);
}

LayerOutput dense(std::span<const FxpValue> x, const Matrix<std::int64_t>& w,
                  const std::vector<std::int64_t>& b, const MaskMatrix& mask, FxpFormat wf,
                  const ModelConfig& cfg) {
  if (x.size() != static_cast<std::size_t>(w.cols())) {
    throw std::invalid_argument("dense layer input width mismatch");
  }
  LayerOutput out;
  out.y.reserve(static_cast<std::size_t>(w.rows()));
  out.overflow.reserve(static_cast<std::size_t>(w.rows()));
  std::vector<FxpValue> terms;
  terms.reserve(x.size() + 1);
  for (int r = 0; r < w.rows(); ++r) {
    terms.clear();
    terms.push_back({b[static_cast<std::size_t>(r)], wf});
    for (int c = 0; c < w.cols(); ++c) {
      if (mask(r, c) == 0) continue;
      terms.push_back(fxp_mul({w(r, c), wf}, x[static_cast<std::size_t>(c)], cfg.accum_format,
                              cfg.datapath_rounding, cfg.multiplier)
                          .value);
    }
    const Accumulated acc = csa_accumulate(terms, cfg.accum_format);
    out.y.push_back(clamp_to_unit(acc.value, cfg.act_format.frac_bits, cfg.datapath_rounding));
    out.overflow.push_back(acc.overflow ? 1 : 0);
  }
  return out;
}

}  // namespace

Features feature_extract(FxpValue i, FxpValue q, const InvSqrtUnit& unit, const ModelConfig& cfg) {
  check_act(i, cfg, "I");
  check_act(q, cfg, "Q");
  const AmplitudeFeatures af =
      amplitude_features(i, q, unit, cfg.act_format, cfg.datapath_rounding, cfg.multiplier);
  Features f;
  f.a = af.a;
  f.a3 = af.a3;
  if (af.zero) {
    f.p = {FxpValue{cfg.act_format.max_raw(), cfg.act_format}, FxpValue::zero(cfg.act_format), true};
    return f;
  }
  check_mul(af.inv_a.format.width(), i.format.width() + 1, cfg.multiplier);
  const int frac = i.format.frac_bits + af.inv_a.format.frac_bits;
  const Int128 pi = Int128{i.raw} * Int128{af.inv_a.raw};
  const Int128 pq = -(Int128{q.raw} * Int128{af.inv_a.raw});
  f.p.p_i = requantize(pi, frac, cfg.act_format, cfg.datapath_rounding).value;
  f.p.p_q = requantize(pq, frac, cfg.act_format, cfg.datapath_rounding).value;
  return f;
}

void phase_normalize(std::span<const FxpComplex> k, const Phasor& p, const ModelConfig& cfg,
                     std::span<FxpValue> i_pn, std::span<FxpValue> q_pn) {
  if (i_pn.size() != k.size() || q_pn.size() != k.size()) {
    throw std::invalid_argument("phase_normalize: output size mismatch");
  }
  for (std::size_t n = 0; n < k.size(); ++n) {
    if (p.unit) {
      i_pn[n] = k[n].i;
      q_pn[n] = k[n].q;
      continue;
    }
    check_mul(k[n].i.format.width(), p.p_i.format.width(), cfg.multiplier);
    const int frac = k[n].i.format.frac_bits + p.p_i.format.frac_bits;
    const Int128 ii = Int128{k[n].i.raw} * p.p_i.raw;
    const Int128 qq = Int128{k[n].q.raw} * p.p_q.raw;
    const Int128 iq = Int128{k[n].i.raw} * p.p_q.raw;
    const Int128 qi = Int128{k[n].q.raw} * p.p_i.raw;
    i_pn[n] = requantize(ii - qq, frac, cfg.act_format, cfg.datapath_rounding).value;
    q_pn[n] = requantize(iq + qi, frac, cfg.act_format, cfg.datapath_rounding).value;
  }
}

LayerOutput fc_forward(std::span<const FxpValue> x_fc, const QuantizedParams& params,
                       const ModelConfig& cfg) {
  return dense(x_fc, params.w_fc, params.b_fc, params.mask_fc, params.format, cfg);
}

LayerOutput out_forward(std::span<const FxpValue> x_out, const QuantizedParams& params,
                        const ModelConfig& cfg) {
  return dense(x_out, params.w_out, params.b_out, params.mask_out, params.format, cfg);
}

FxpValue relu(FxpValue v) { return v.raw < 0 ? FxpValue::zero(v.format) : v; }

FxpComplex phase_denormalize(FxpValue i_out, FxpValue q_out, const Phasor& p,
                             const ModelConfig& cfg) {
  const Rounding r = cfg.datapath_rounding;
  if (p.unit) {
    return {convert(i_out, cfg.out_format, r).value, convert(q_out, cfg.out_format, r).value};
  }
  check_mul(i_out.format.width(), p.p_i.format.width(), cfg.multiplier);
  const int frac = i_out.format.frac_bits + p.p_i.format.frac_bits;
  const Int128 re = Int128{i_out.raw} * p.p_i.raw + Int128{q_out.raw} * p.p_q.raw;
  const Int128 im = Int128{q_out.raw} * p.p_i.raw - Int128{i_out.raw} * p.p_q.raw;
  return {requantize(re, frac, cfg.out_format, r).value,
          requantize(im, frac, cfg.out_format, r).value};
}

DelayState::DelayState(const ModelConfig& cfg)
    : k(static_cast<std::size_t>(cfg.memory_depth),
        FxpComplex{FxpValue::zero(cfg.act_format), FxpValue::zero(cfg.act_format)}),
      a(static_cast<std::size_t>(cfg.memory_depth + 1), FxpValue::zero(cfg.act_format)),
      a3(static_cast<std::size_t>(cfg.memory_depth + 1), FxpValue::zero(cfg.act_format)) {}

void DelayState::reset() {
  k.reset();
  a.reset();
  a3.reset();
}

namespace {

// Builds x_fc for the current sample and advances the amplitude lines. The
// input line is advanced by the caller once the sample is consumed.
void build_x_fc(const FxpComplex& sample, DelayState& state, const InvSqrtUnit& unit,
                const ModelConfig& cfg, Phasor& p, std::vector<FxpValue>& x) {
  const Features f = feature_extract(sample.i, sample.q, unit, cfg);
  p = f.p;
  state.a.push(f.a);
  state.a3.push(f.a3);
  const auto n = static_cast<std::size_t>(cfg.memory_depth);
  x.assign(static_cast<std::size_t>(cfg.fc_input_width()), FxpValue::zero(cfg.act_format));
  phase_normalize(state.k.view(), p, cfg, std::span<FxpValue>(x.data(), n),
                  std::span<FxpValue>(x.data() + n, n));
  for (std::size_t j = 0; j <= n; ++j) {
    x[2 * n + j] = state.a[j];
    x[3 * n + 1 + j] = state.a3[j];
  }
}

}  // namespace

StepResult dpd_forward(const FxpComplex& sample, DelayState& state, const QuantizedParams& params,
                       const ModelConfig& cfg, const InvSqrtUnit& unit) {
  Phasor p;
  std::vector<FxpValue> x;
  build_x_fc(sample, state, unit, cfg, p, x);
  state.k.push(sample);

  StepResult res;
  const LayerOutput h = fc_forward(x, params, cfg);
  for (FxpValue v : h.y) x.push_back(relu(v));
  const LayerOutput o = out_forward(x, params, cfg);
  for (auto f : h.overflow) res.overflow_count += f;
  for (auto f : o.overflow) res.overflow_count += f;
  res.y = phase_denormalize(o.y[0], o.y[1], p, cfg);
  return res;
}

}  // namespace fixedpoint

// ---------------------------------------------------------------------------
// Reference path

double clamp_activation(double v, const ModelConfig& cfg) {
  return std::clamp(v, cfg.act_format.min_value(), cfg.act_format.max_value());
}

namespace reference {

Features feature_extract(cd x, const ModelConfig& cfg) {
  Features f;
  const double a = std::abs(x);
  if (a == 0.0) return f;
  f.p = std::conj(x) / a;
  f.a = clamp_activation(a, cfg);
  f.a3 = clamp_activation(a * a * a, cfg);
  return f;
}

void phase_normalize(std::span<const cd> k, cd p, const ModelConfig& cfg, std::span<double> i_pn,
                     std::span<double> q_pn) {
  if (i_pn.size() != k.size() || q_pn.size() != k.size()) {
    throw std::invalid_argument("phase_normalize: output size mismatch");
  }
  for (std::size_t n = 0; n < k.size(); ++n) {
    const cd v = k[n] * p;
    i_pn[n] = clamp_activation(v.real(), cfg);
    q_pn[n] = clamp_activation(v.imag(), cfg);
  }
}

namespace {

std::vector<double> dense(std::span<const double> x, const RealMatrix& w,
                          const std::vector<double>& b, const MaskMatrix& mask,
                          const ModelConfig& cfg) {
  if (x.size() != static_cast<std::size_t>(w.cols())) {
    throw std::invalid_argument("dense layer input width mismatch");
  }
  std::vector<double> y(static_cast<std::size_t>(w.rows()));
  for (int r = 0; r < w.rows(); ++r) {
    double s = b[static_cast<std::size_t>(r)];
    for (int c = 0; c < w.cols(); ++c) {
      if (mask(r, c) != 0) s += w(r, c) * x[static_cast<std::size_t>(c)];
    }
    y[static_cast<std::size_t>(r)] = clamp_activation(s, cfg);
  }
  return y;
}

}  // namespace

std::vector<double> fc_forward(std::span<const double> x_fc, const ModelParams& params,
                               const ModelConfig& cfg) {
  return dense(x_fc, params.w_fc, params.b_fc, params.mask_fc, cfg);
}

std::array<double, 2> out_forward(std::span<const double> x_out, const ModelParams& params,
                                  const ModelConfig& cfg) {
  const std::vector<double> y = dense(x_out, params.w_out, params.b_out, params.mask_out, cfg);
  return {y[0], y[1]};
}

cd phase_denormalize(double i_out, double q_out, cd p) { return cd(i_out, q_out) * std::conj(p); }

DelayState::DelayState(const ModelConfig& cfg)
    : k(static_cast<std::size_t>(cfg.memory_depth)),
      a(static_cast<std::size_t>(cfg.memory_depth + 1)),
      a3(static_cast<std::size_t>(cfg.memory_depth + 1)) {}

void DelayState::reset() {
  k.reset();
  a.reset();
  a3.reset();
}

namespace {

cd build_x_fc(cd sample, DelayState& state, const ModelConfig& cfg, std::vector<double>& x) {
  const Features f = feature_extract(sample, cfg);
  state.a.push(f.a);
  state.a3.push(f.a3);
  const auto n = static_cast<std::size_t>(cfg.memory_depth);
  x.assign(static_cast<std::size_t>(cfg.fc_input_width()), 0.0);
  phase_normalize(state.k.view(), f.p, cfg, std::span<double>(x.data(), n),
                  std::span<double>(x.data() + n, n));
  for (std::size_t j = 0; j <= n; ++j) {
    x[2 * n + j] = state.a[j];
    x[3 * n + 1 + j] = state.a3[j];
  }
  return f.p;
}

}  // namespace

cd dpd_forward(cd sample, DelayState& state, const ModelParams& params, const ModelConfig& cfg) {
  std::vector<double> x;
  const cd p = build_x_fc(sample, state, cfg, x);
  state.k.push(sample);
  const std::vector<double> h = fc_forward(x, params, cfg);
  for (double v : h) x.push_back(std::max(v, 0.0));
  const std::array<double, 2> o = out_forward(x, params, cfg);
  return phase_denormalize(o[0], o[1], p);
}

}  // namespace reference

// ---------------------------------------------------------------------------
// Stream helpers

std::string to_string(DpdPath path) { return path == DpdPath::kReference ? "reference" : "fixed"; }

DpdPath parse_dpd_path(std::string_view name) {
  if (name == "reference" || name == "ref") return DpdPath::kReference;
  if (name == "fixed" || name == "fixedpoint" || name == "fixed-point") return DpdPath::kFixedPoint;
  throw std::invalid_argument("unknown DPD path '" + std::string(name) + "'");
}

std::vector<FxpComplex> quantize_stream(std::span<const cd> x, FxpFormat fmt) {
  std::vector<FxpComplex> out;
  out.reserve(x.size());
  for (const cd& v : x) {
    out.push_back({quantize(v.real(), fmt, Rounding::kNearestEven).value,
                   quantize(v.imag(), fmt, Rounding::kNearestEven).value});
  }
  return out;
}

FixedPointDpd::FixedPointDpd(const ModelConfig& cfg, const ModelParams& params)
    : FixedPointDpd(cfg, quantize_params(params, cfg)) {}

FixedPointDpd::FixedPointDpd(const ModelConfig& cfg, QuantizedParams params)
    : cfg_(cfg), params_(std::move(params)), unit_((cfg.validate(), cfg.invsqrt)), state_(cfg) {
  if (params_.format != cfg_.weight_format) {
    throw std::invalid_argument("quantized params format does not match the config");
  }
}

fixedpoint::StepResult FixedPointDpd::process(const FxpComplex& sample) {
  fixedpoint::StepResult r = fixedpoint::dpd_forward(sample, state_, params_, cfg_, unit_);
  overflow_events_ += static_cast<std::uint64_t>(r.overflow_count);
  return r;
}

void FixedPointDpd::reset() {
  state_.reset();
  overflow_events_ = 0;
}

std::vector<FxpComplex> FixedPointDpd::run(std::span<const FxpComplex> x) {
  std::vector<FxpComplex> y;
  y.reserve(x.size());
  for (const FxpComplex& s : x) y.push_back(process(s).y);
  return y;
}

std::vector<cd> FixedPointDpd::run(std::span<const cd> x) {
  const std::vector<FxpComplex> q = quantize_stream(x, cfg_.act_format);
  std::vector<cd> y;
  y.reserve(q.size());
  for (const FxpComplex& s : q) {
    const FxpComplex o = process(s).y;
    y.emplace_back(o.i.to_real(), o.q.to_real());
  }
  return y;
}

ReferenceDpd::ReferenceDpd(const ModelConfig& cfg, ModelParams params)
    : cfg_(cfg), params_(std::move(params)), state_(cfg) {
  cfg_.validate();
  params_.check_shape(cfg_);
}

cd ReferenceDpd::process(cd sample) { return reference::dpd_forward(sample, state_, params_, cfg_); }

void ReferenceDpd::reset() { state_.reset(); }

std::vector<cd> ReferenceDpd::run(std::span<const cd> x) {
  std::vector<cd> y;
  y.reserve(x.size());
  for (const cd& s : x) y.push_back(process(s));
  return y;
}

std::vector<cd> run_dpd(std::span<const cd> x, const ModelParams& params, const ModelConfig& cfg,
                        DpdPath path) {
  if (path == DpdPath::kReference) return ReferenceDpd(cfg, params).run(x);
  return FixedPointDpd(cfg, params).run(x);
}

// ---------------------------------------------------------------------------
// Feature streams and the shared network kernel

std::string to_string(FeatureSource s) {
  return s == FeatureSource::kReference ? "reference" : "fixed";
}

FeatureSource parse_feature_source(std::string_view name) {
  if (name == "reference" || name == "ref") return FeatureSource::kReference;
  if (name == "fixed" || name == "fixedpoint" || name == "fixed-point") {
    return FeatureSource::kFixedPoint;
  }
  throw std::invalid_argument("unknown feature source '" + std::string(name) + "'");
}

FeatureStream compute_features(std::span<const cd> x, const ModelConfig& cfg, FeatureSource source) {
  cfg.validate();
  FeatureStream fs;
  fs.width = cfg.fc_input_width();
  fs.x_fc.reserve(x.size() * static_cast<std::size_t>(fs.width));
  fs.p.reserve(x.size());
  if (source == FeatureSource::kReference) {
    reference::DelayState state(cfg);
    std::vector<double> row;
    for (const cd& s : x) {
      fs.p.push_back(reference::build_x_fc(s, state, cfg, row));
      state.k.push(s);
      fs.x_fc.insert(fs.x_fc.end(), row.begin(), row.end());
    }
    return fs;
  }
  const InvSqrtUnit unit(cfg.invsqrt);
  fixedpoint::DelayState state(cfg);
  std::vector<FxpValue> row;
  fixedpoint::Phasor p;
  for (const FxpComplex& s : quantize_stream(x, cfg.act_format)) {
    fixedpoint::build_x_fc(s, state, unit, cfg, p, row);
    state.k.push(s);
    fs.p.push_back(p.unit ? cd(1.0, 0.0) : cd(p.p_i.to_real(), p.p_q.to_real()));
    for (const FxpValue& v : row) fs.x_fc.push_back(v.to_real());
  }
  return fs;
}

EffectiveWeights effective_weights(const ModelParams& params, const ModelConfig& cfg, bool quant) {
  params.check_shape(cfg);
  const auto q = [&](double v) {
    return quant ? quantize(v, cfg.weight_format, cfg.weight_rounding).value.to_real() : v;
  };
  EffectiveWeights w;
  w.w_fc = RealMatrix(params.w_fc.rows(), params.w_fc.cols());
  for (std::size_t i = 0; i < w.w_fc.size(); ++i) {
    w.w_fc.data()[i] = params.mask_fc.data()[i] != 0 ? q(params.w_fc.data()[i]) : 0.0;
  }
  w.w_out = RealMatrix(params.w_out.rows(), params.w_out.cols());
  for (std::size_t i = 0; i < w.w_out.size(); ++i) {
    w.w_out.data()[i] = params.mask_out.data()[i] != 0 ? q(params.w_out.data()[i]) : 0.0;
  }
  for (double b : params.b_fc) w.b_fc.push_back(q(b));
  for (double b : params.b_out) w.b_out.push_back(q(b));
  return w;
}

namespace {

struct ProductQuantizer {
  bool enabled;
  bool truncate;
  double scale;
  double inv_scale;

  double operator()(double v) const {
    if (!enabled) return v;
    const double s = v * scale;
    return (truncate ? std::floor(s) : std::nearbyint(s)) * inv_scale;
  }
};

}  // namespace

cd network_forward(std::span<const double> x_fc, cd p, const EffectiveWeights& w,
                   const ModelConfig& cfg, bool quantize_products, NetworkTrace* trace) {
  const ProductQuantizer pq{quantize_products, cfg.datapath_rounding == Rounding::kTruncate,
                            std::ldexp(1.0, cfg.accum_format.frac_bits),
                            std::ldexp(1.0, -cfg.accum_format.frac_bits)};
  const int nin = w.w_fc.cols();
  const int hidden = w.w_fc.rows();
  double x_out[256];
  std::vector<double> x_out_heap;
  double* xo = x_out;
  if (w.w_out.cols() > 256) {
    x_out_heap.resize(static_cast<std::size_t>(w.w_out.cols()));
    xo = x_out_heap.data();
  }
  std::copy(x_fc.begin(), x_fc.end(), xo);
  if (trace != nullptr) {
    trace->h_pre.resize(static_cast<std::size_t>(hidden));
    trace->h.resize(static_cast<std::size_t>(hidden));
  }
  for (int r = 0; r < hidden; ++r) {
    const double* wr = &w.w_fc(r, 0);
    double s = w.b_fc[static_cast<std::size_t>(r)];
    for (int c = 0; c < nin; ++c) {
      if (wr[c] != 0.0) s += pq(wr[c] * xo[c]);
    }
    const double h = clamp_activation(s, cfg);
    if (trace != nullptr) {
      trace->h_pre[static_cast<std::size_t>(r)] = s;
      trace->h[static_cast<std::size_t>(r)] = h;
    }
    xo[nin + r] = h > 0.0 ? h : 0.0;
  }
  double o[2];
  const int nout = w.w_out.cols();
  for (int r = 0; r < 2; ++r) {
    const double* wr = &w.w_out(r, 0);
    double s = w.b_out[static_cast<std::size_t>(r)];
    for (int c = 0; c < nout; ++c) {
      if (wr[c] != 0.0) s += pq(wr[c] * xo[c]);
    }
    o[r] = clamp_activation(s, cfg);
    if (trace != nullptr) {
      trace->o_pre[static_cast<std::size_t>(r)] = s;
      trace->o[static_cast<std::size_t>(r)] = o[r];
    }
  }
  return cd(o[0], o[1]) * std::conj(p);
}

// ---------------------------------------------------------------------------

ParamOpsReport count_params_ops(const ModelParams& params, const ModelConfig& cfg) {
  params.check_shape(cfg);
  ParamOpsReport r;
  r.total_weights = params.total_weights();
  r.active_weights = params.active_weights();
  r.biases = params.bias_count();
  r.param_count = r.active_weights + r.biases;
  r.sparsity = r.total_weights == 0
                   ? 0.0
                   : 1.0 - static_cast<double>(r.active_weights) / static_cast<double>(r.total_weights);

  const auto n = static_cast<std::size_t>(cfg.memory_depth);
  const auto iters = static_cast<std::size_t>(cfg.invsqrt.iter_count);
  // I^2, Q^2, sum; folded first NR step (1 mul, 1 add); each further step
  // (3 mul, 1 add); A = u*x; A^3 = A*Z; P (2 mul).
  std::size_t fex_mul = 2 + 1 + 1 + 2;
  std::size_t fex_add = 1;
  if (iters > 0) {
    fex_mul += 1 + 3 * (iters - 1);
    fex_add += 1 + (iters - 1);
  }
  r.fex_ops = fex_mul + fex_add;
  r.phase_norm_ops = n * (4 + 2);
  const auto layer_ops = [](const MaskMatrix& m) {
    std::size_t ops = 0;
    for (int row = 0; row < m.rows(); ++row) {
      std::size_t k = 0;
      for (auto v : m.row(row)) k += v != 0;
      ops += 2 * k;  // k multiplies, k adds (k products + bias)
    }
    return ops;
  };
  r.fc_ops = layer_ops(params.mask_fc);
  r.out_ops = layer_ops(params.mask_out);
  r.phase_denorm_ops = 4 + 2;
  r.network_ops = r.fc_ops + r.out_ops;
  r.ops_per_sample = r.fex_ops + r.phase_norm_ops + r.network_ops + r.phase_denorm_ops;
  r.convention =
      "1 real multiply = 1 op, 1 real add = 1 op; a neuron with k unmasked weights costs k "
      "multiplies and k adds (k products plus bias); masked multiplies and their adder inputs are "
      "not counted; ReLU, clamps, shifts and table reads are free; params = unmasked weights + "
      "biases";
  return r;
}

}  // namespace fxdpd
