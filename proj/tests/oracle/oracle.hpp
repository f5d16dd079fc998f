// SPDX-FileCopyrightText: © 2026 The fxdpd Authors
//
// SPDX-License-Identifier: Apache-2.0

// Independent reference implementations used only by tests. Nothing here
// calls into the fixed-point helpers of fxdpd_core; values are computed with
// arbitrary-precision rationals or with a flat integer interpreter.

#pragma once

#include <boost/multiprecision/cpp_int.hpp>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

namespace fxdpd::oracle {

using boost::multiprecision::cpp_int;
using boost::multiprecision::cpp_rational;

enum class Mode { kNearestEven, kFloor };

// raw / 2^frac as an exact rational.
cpp_rational exact(const cpp_int& raw, int frac);

// Round an exact rational to an integer.
cpp_int round_to_int(const cpp_rational& v, Mode mode);

struct Sat {
  std::int64_t raw = 0;
  bool saturated = false;
};

// Value v rounded onto 2^-frac and saturated into a signed width-bit word.
Sat to_format(const cpp_rational& v, int int_bits, int frac_bits, Mode mode);

// Double converted exactly to a rational.
cpp_rational from_double(double d);

// Brute-force dense layer: every column (masked weights forced to raw 0),
// products floored onto 2^-acc_frac, exact sum with the bias, saturation to
// Q2.acc_frac, clamp to Q1.acc_frac.
struct DenseResult {
  std::vector<std::int64_t> y;
  std::vector<bool> overflow;
};
DenseResult dense_layer(const std::vector<std::int64_t>& w, int rows, int cols,
                        const std::vector<std::uint8_t>& mask, const std::vector<std::int64_t>& b,
                        const std::vector<std::int64_t>& x, int w_frac, int x_frac, int acc_frac,
                        Mode mode);

// Straight-line integer interpreter of the default datapath (Q1.13 in,
// Q2.13 accumulators, Q2.27 out, truncating datapath, 25x18 multipliers),
// parameterised only by network shape and inverse-sqrt geometry. Rebuilds
// its own seed ROM with 50-digit arithmetic.
struct InterpreterConfig {
  int memory_depth = 2;
  int hidden_size = 12;
  int window_bits = 14;
  int lut_addr_bits = 7;
  int iter_count = 2;
};

struct InterpreterParams {
  std::vector<std::int64_t> w_fc;  // hidden x (4n+2), masked entries ignored
  std::vector<std::int64_t> b_fc;
  std::vector<std::int64_t> w_out;  // 2 x (4n+2+hidden)
  std::vector<std::int64_t> b_out;
  std::vector<std::uint8_t> mask_fc;
  std::vector<std::uint8_t> mask_out;
};

class StraightLineDpd {
 public:
  StraightLineDpd(InterpreterConfig cfg, InterpreterParams params);
  std::pair<std::int64_t, std::int64_t> step(std::int64_t i, std::int64_t q);

  const std::vector<std::pair<std::int64_t, std::int64_t>>& rom() const { return rom_; }

 private:
  InterpreterConfig cfg_;
  InterpreterParams p_;
  std::vector<std::pair<std::int64_t, std::int64_t>> rom_;  // (s1, s3), Q4.16
  std::vector<std::int64_t> x0_;
  std::vector<std::int64_t> ki_, kq_, a_, a3_;
};

// Data lines ("IIII QQQQ OOOOOOOO OOOOOOOO") for a cold-start run.
std::string interpret_lines(const InterpreterConfig& cfg, const InterpreterParams& params,
                            const std::vector<std::pair<std::int64_t, std::int64_t>>& input);

}  // namespace fxdpd::oracle
