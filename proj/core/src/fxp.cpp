// SPDX-FileCopyrightText: © 2026 The fxdpd Authors
//
// SPDX-License-Identifier: Apache-2.0

#include "fxdpd/fxp.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>

namespace fxdpd {

namespace {

Int128 shift_right_rounded(Int128 v, int shift, Rounding mode) {
  if (shift <= 0) return v;
  if (shift >= 126) return v < 0 ? (mode == Rounding::kTruncate ? -1 : 0) : 0;
  const Int128 floor_q = v >> shift;  // arithmetic shift == floor division
  if (mode == Rounding::kTruncate) return floor_q;
  const Int128 rem = v - (floor_q << shift);
  const Int128 half = Int128{1} << (shift - 1);
  if (rem > half || (rem == half && (floor_q & 1) != 0)) return floor_q + 1;
  return floor_q;
}

Quantized saturate(Int128 v, FxpFormat out) {
  const Int128 hi = out.max_raw();
  const Int128 lo = out.min_raw();
  if (v > hi) return {{out.max_raw(), out}, true};
  if (v < lo) return {{out.min_raw(), out}, true};
  return {{static_cast<std::int64_t>(v), out}, false};
}

}  // namespace

std::string_view to_string(Rounding mode) {
  return mode == Rounding::kNearestEven ? "nearest-even" : "truncate";
}

Rounding parse_rounding(std::string_view name) {
  if (name == "nearest-even") return Rounding::kNearestEven;
  if (name == "truncate") return Rounding::kTruncate;
  throw std::invalid_argument("unknown rounding mode: " + std::string(name));
}

double FxpFormat::max_value() const {
  return std::ldexp(static_cast<double>(max_raw()), -frac_bits);
}
double FxpFormat::min_value() const {
  return std::ldexp(static_cast<double>(min_raw()), -frac_bits);
}
double FxpFormat::ulp() const { return std::ldexp(1.0, -frac_bits); }

bool FxpFormat::valid() const {
  return int_bits >= 1 && frac_bits >= 0 && width() >= 2 && width() <= 62;
}

void FxpFormat::validate() const {
  if (!valid()) throw std::invalid_argument("invalid fixed-point format " + to_string());
}

std::string FxpFormat::to_string() const {
  return "Q" + std::to_string(int_bits) + "." + std::to_string(frac_bits);
}

FxpFormat FxpFormat::parse(std::string_view text) {
  const auto fail = [&] {
    throw std::invalid_argument("cannot parse fixed-point format '" + std::string(text) + "'");
  };
  if (text.size() < 4 || text.front() != 'Q') fail();
  const auto dot = text.find('.');
  if (dot == std::string_view::npos) fail();
  FxpFormat f{};
  const char* b = text.data() + 1;
  const char* mid = text.data() + dot;
  const char* e = text.data() + text.size();
  if (std::from_chars(b, mid, f.int_bits).ptr != mid) fail();
  if (std::from_chars(mid + 1, e, f.frac_bits).ptr != e) fail();
  f.validate();
  return f;
}

FxpValue FxpValue::from_raw(std::int64_t raw, FxpFormat format) {
  format.validate();
  if (raw > format.max_raw() || raw < format.min_raw()) {
    throw std::out_of_range("raw value " + std::to_string(raw) + " does not fit " +
                            format.to_string());
  }
  return {raw, format};
}

double FxpValue::to_real() const {
  return std::ldexp(static_cast<double>(raw), -format.frac_bits);
}

WidthError::WidthError(int width_a, int width_b, int wide_port, int narrow_port)
    : std::invalid_argument("multiplier operands " + std::to_string(width_a) + "x" +
                            std::to_string(width_b) + " bits exceed the " +
                            std::to_string(wide_port) + "x" + std::to_string(narrow_port) +
                            " multiplier model"),
      width_a_(width_a),
      width_b_(width_b) {}

bool MultiplierModel::accepts(int width_a, int width_b) const {
  const int wide = std::max(width_a, width_b);
  const int narrow = std::min(width_a, width_b);
  return wide <= wide_port && narrow <= narrow_port;
}

Quantized requantize(Int128 raw, int from_frac, FxpFormat out, Rounding mode) {
  const int shift = from_frac - out.frac_bits;
  if (shift <= 0) {
    const int up = -shift;
    // Anything this large saturates regardless of the exact value.
    const Int128 limit = Int128{1} << std::max(0, 120 - up);
    if (raw >= limit) return {{out.max_raw(), out}, true};
    if (raw <= -limit) return {{out.min_raw(), out}, true};
    return saturate(raw * (Int128{1} << up), out);
  }
  return saturate(shift_right_rounded(raw, shift, mode), out);
}

Quantized quantize(double x, FxpFormat format, Rounding mode) {
  format.validate();
  if (std::isnan(x)) return {{0, format}, true};
  const double scaled = std::ldexp(x, format.frac_bits);
  const double r = mode == Rounding::kTruncate ? std::floor(scaled) : std::nearbyint(scaled);
  if (r > static_cast<double>(format.max_raw())) return {{format.max_raw(), format}, true};
  if (r < static_cast<double>(format.min_raw())) return {{format.min_raw(), format}, true};
  return {{static_cast<std::int64_t>(r), format}, false};
}

Quantized convert(FxpValue value, FxpFormat out, Rounding mode) {
  return requantize(value.raw, value.format.frac_bits, out, mode);
}

FxpValue exact_product(FxpValue a, FxpValue b) {
  const FxpFormat f{a.format.int_bits + b.format.int_bits,
                    a.format.frac_bits + b.format.frac_bits};
  if (f.width() > 62) {
    throw std::invalid_argument("exact product of " + a.format.to_string() + " and " +
                                b.format.to_string() + " exceeds 62 bits");
  }
  return {a.raw * b.raw, f};
}

Quantized fxp_mul(FxpValue a, FxpValue b, FxpFormat out_fmt, Rounding mode,
                  MultiplierModel model) {
  if (!model.accepts(a.format.width(), b.format.width())) {
    throw WidthError(a.format.width(), b.format.width(), model.wide_port, model.narrow_port);
  }
  const Int128 p = Int128{a.raw} * Int128{b.raw};
  return requantize(p, a.format.frac_bits + b.format.frac_bits, out_fmt, mode);
}

Accumulated csa_accumulate(std::span<const FxpValue> terms, FxpFormat out_fmt) {
  Int128 sum = 0;
  for (const FxpValue& t : terms) {
    if (t.format.frac_bits > out_fmt.frac_bits) {
      throw std::invalid_argument("csa_accumulate: term format " + t.format.to_string() +
                                  " has more fraction bits than " + out_fmt.to_string());
    }
    sum += Int128{t.raw} << (out_fmt.frac_bits - t.format.frac_bits);
  }
  const Quantized q = saturate(sum, out_fmt);
  return {q.value, q.saturated};
}

FxpValue clamp_to_unit(FxpValue a, int frac_bits, Rounding mode) {
  return convert(a, FxpFormat{1, frac_bits}, mode).value;
}

FxpValue negate_widened(FxpValue a) {
  const FxpFormat f{a.format.int_bits + 1, a.format.frac_bits};
  f.validate();
  return {-a.raw, f};
}

}  // namespace fxdpd
