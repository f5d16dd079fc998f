// SPDX-FileCopyrightText: © 2026 The fxdpd Authors
//
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <iosfwd>
#include <vector>

#include "fxdpd/fxp.hpp"

namespace fxdpd {

// Configuration of the hardware 1/sqrt(z) unit.
//
// The unsigned input z carries `input_frac_bits` fraction bits (26 for the
// squared magnitude of Q1.13 I/Q). It is shifted by an even amount until its
// most significant set bit lands in the top two positions of a
// `window_bits`-wide window; the window value u = z_norm * 2^-window_bits lies
// in [1/4, 1). The top `lut_addr_bits` of the window address a seed ROM
// holding 1.5*x0 and 0.5*x0^3, after which `iter_count` Newton-Raphson steps
// refine x ~ 1/sqrt(u). The first step is folded into the ROM pair.
struct InvSqrtConfig {
  int window_bits = 14;
  int lut_addr_bits = 7;
  int seed_frac_bits = 16;
  int iter_count = 2;
  int input_bits = 28;
  int input_frac_bits = 26;

  // Throws std::invalid_argument when the configuration cannot be built.
  void validate() const;

  // Input width/fraction matching I^2 + Q^2 for activations in `act`.
  static InvSqrtConfig for_activation(FxpFormat act);

  friend bool operator==(const InvSqrtConfig&, const InvSqrtConfig&) = default;
};

// Fixed formats of the unit's internal datapath.
inline constexpr FxpFormat kInvSqrtMantissa{3, 15};  // x ~ 1/sqrt(u) in (1, 2]
inline constexpr int kInvSqrtWorkFrac = 22;           // internal NR precision
inline constexpr FxpFormat kInvSqrtSquare{4, 20};     // x^2 re-quantized
inline constexpr FxpFormat kInvSqrtWork{3, kInvSqrtWorkFrac};

FxpFormat seed_format(const InvSqrtConfig& cfg);  // Q4.<seed_frac_bits>
FxpFormat window_format(const InvSqrtConfig& cfg);  // Q1.<window_bits>

struct SeedEntry {
  std::int64_t x0 = 0;  // 1/sqrt(cell midpoint), seed format
  std::int64_t s1 = 0;  // 1.5 * x0
  std::int64_t s3 = 0;  // 0.5 * x0^3
};

// Seed ROM with 2^lut_addr_bits entries. Addresses below 2^(lut_addr_bits-2)
// are unreachable for a normalized input and hold zeros.
class SeedTable {
 public:
  static SeedTable build(const InvSqrtConfig& cfg);

  const SeedEntry& entry(std::size_t addr) const { return entries_.at(addr); }
  std::size_t size() const { return entries_.size(); }
  FxpFormat format() const { return format_; }
  const std::vector<SeedEntry>& entries() const { return entries_; }

  // ROM initialization text: `//` comment header, then one "s1 s3" pair of
  // two's-complement hex words per line.
  void write_hex(std::ostream& os) const;

 private:
  FxpFormat format_{};
  int addr_bits_ = 0;
  std::vector<SeedEntry> entries_;
};

struct NormalizedInput {
  std::uint64_t z_norm = 0;
  int shift = 0;  // even; > 0 means right shift
};

// Throws std::invalid_argument for z == 0.
NormalizedInput normalize_shift(std::uint64_t z, const InvSqrtConfig& cfg);

// Folded first iteration x1 = s1 - s3*u, in kInvSqrtMantissa.
FxpValue nr_first_folded(const SeedEntry& seed, FxpValue u, const InvSqrtConfig& cfg);

// One literal Newton-Raphson step x' = 0.5*x*(3 - u*x^2). `x` in
// kInvSqrtMantissa, `u` in window_format(cfg); result in kInvSqrtMantissa.
FxpValue nr_iterate(FxpValue x, FxpValue u);

struct InvSqrtResult {
  // 1/sqrt(z_real) as mantissa * 2^exponent; `value` carries the exponent in
  // its format (Q(3+e).(15-e)), so value.raw == mantissa.raw.
  FxpValue value;
  FxpValue mantissa;
  int exponent = 0;
  NormalizedInput norm;
  FxpValue window;  // u in window_format
};

class InvSqrtUnit {
 public:
  explicit InvSqrtUnit(InvSqrtConfig cfg = {});

  const InvSqrtConfig& config() const { return cfg_; }
  const SeedTable& table() const { return table_; }

  // Throws std::invalid_argument for z == 0 or z >= 2^input_bits.
  InvSqrtResult inv_sqrt(std::uint64_t z) const;

 private:
  InvSqrtConfig cfg_;
  SeedTable table_;
};

struct CertifyResult {
  double eps_max = 0.0;
  std::uint64_t worst_z = 0;
  std::uint64_t checked = 0;
  std::uint64_t z_max = 0;
};

inline constexpr double kInvSqrtTarget = 1.0 / 4096.0;  // 2^-12 relative

// Sweeps every z in [1, z_max] against a long-double reference and returns
// the largest relative error. z_max defaults to the largest squared
// magnitude reachable from two Q1.(input_frac_bits/2) values, 2^(input_frac_bits+1).
CertifyResult certify_error(const InvSqrtConfig& cfg, std::uint64_t z_max = 0);

struct AmplitudeFeatures {
  bool zero = false;    // I == Q == 0; every field below is 0
  FxpValue inv_a;       // 1/A, exponent carried in the format
  FxpValue a;           // amplitude, act format, saturated
  FxpValue a3;          // A^3, act format, saturated
  std::uint64_t z = 0;  // I^2 + Q^2 raw
};

// A = u*x*2^-e re-uses the window value; A^3 = A * Z with Z truncated to
// Q2.16 so both products fit one multiplier.
AmplitudeFeatures amplitude_features(FxpValue i, FxpValue q, const InvSqrtUnit& unit,
                                     FxpFormat act, Rounding mode,
                                     MultiplierModel model = {});

inline constexpr FxpFormat kSquaredMagnitudeShort{2, 16};

}  // namespace fxdpd
