// SPDX-FileCopyrightText: © 2026 The fxdpd Authors
//
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>

namespace fxdpd {

__extension__ typedef __int128 Int128;

enum class Rounding {
  kNearestEven,  // round half to even
  kTruncate,     // drop low bits (floor, two's complement)
};

std::string_view to_string(Rounding mode);
Rounding parse_rounding(std::string_view name);

// Signed two's-complement fixed-point format. "Q1.13" is 14 bits wide with
// the sign as its single integer bit; the representable range is
// [-2^(int_bits-1), 2^(int_bits-1) - 2^-frac_bits].
struct FxpFormat {
  int int_bits = 1;
  int frac_bits = 13;

  constexpr int width() const { return int_bits + frac_bits; }
  constexpr std::int64_t max_raw() const {
    return (std::int64_t{1} << (width() - 1)) - 1;
  }
  constexpr std::int64_t min_raw() const {
    return -(std::int64_t{1} << (width() - 1));
  }
  double max_value() const;
  double min_value() const;
  double ulp() const;

  bool valid() const;
  // Throws std::invalid_argument unless 2 <= width <= 62, int_bits >= 1 and
  // frac_bits >= 0.
  void validate() const;

  std::string to_string() const;
  static FxpFormat parse(std::string_view text);

  friend constexpr bool operator==(FxpFormat, FxpFormat) = default;
};

inline constexpr FxpFormat kQ1_13{1, 13};
inline constexpr FxpFormat kQ2_13{2, 13};
inline constexpr FxpFormat kQ2_27{2, 27};

struct FxpValue {
  std::int64_t raw = 0;
  FxpFormat format = kQ1_13;

  // Checked construction; throws std::out_of_range if raw does not fit.
  static FxpValue from_raw(std::int64_t raw, FxpFormat format);
  static FxpValue zero(FxpFormat format) { return {0, format}; }

  double to_real() const;

  friend constexpr bool operator==(const FxpValue&, const FxpValue&) = default;
};

// Result of any operation that may saturate.
struct Quantized {
  FxpValue value;
  bool saturated = false;
};

struct Accumulated {
  FxpValue value;
  bool overflow = false;
};

class WidthError : public std::invalid_argument {
 public:
  WidthError(int width_a, int width_b, int wide_port, int narrow_port);
  int width_a() const { return width_a_; }
  int width_b() const { return width_b_; }

 private:
  int width_a_;
  int width_b_;
};

// Operand-width model of one hardware multiplier (default: a 25x18 signed
// DSP slice). A product maps onto one multiplier when the wider operand fits
// the wide port and the narrower one fits the narrow port.
struct MultiplierModel {
  int wide_port = 25;
  int narrow_port = 18;

  bool accepts(int width_a, int width_b) const;
  friend constexpr bool operator==(MultiplierModel, MultiplierModel) = default;
};

// Shift a raw integer carrying `from_frac` fraction bits onto `out`, rounding
// dropped bits with `mode` and saturating to the output range.
Quantized requantize(Int128 raw, int from_frac, FxpFormat out, Rounding mode);

Quantized quantize(double x, FxpFormat format, Rounding mode);
Quantized convert(FxpValue value, FxpFormat out, Rounding mode);

// Exact product in format Q(a.int + b.int).(a.frac + b.frac). No multiplier
// width check; the result may be wider than any single DSP port.
FxpValue exact_product(FxpValue a, FxpValue b);

// Exact product re-quantized to out_fmt. Throws WidthError when the operands
// do not fit `model`.
Quantized fxp_mul(FxpValue a, FxpValue b, FxpFormat out_fmt, Rounding mode,
                  MultiplierModel model = {});

// Exact (unbounded) sum followed by one saturation to out_fmt. Every term must
// have frac_bits <= out_fmt.frac_bits so that alignment is lossless; otherwise
// std::invalid_argument is thrown.
Accumulated csa_accumulate(std::span<const FxpValue> terms, FxpFormat out_fmt);

// Saturate into [-1, 1 - 2^-frac_bits] expressed as Q1.<frac_bits>. Extra
// fraction bits of the input are dropped with `mode`.
FxpValue clamp_to_unit(FxpValue a, int frac_bits = 13,
                       Rounding mode = Rounding::kTruncate);

// Negation in a format one integer bit wider, so -min_raw never wraps.
FxpValue negate_widened(FxpValue a);

}  // namespace fxdpd
