// SPDX-FileCopyrightText: © 2026 The fxdpd Authors
//
// SPDX-License-Identifier: Apache-2.0

#include "fxdpd/invsqrt.hpp"

#include <bit>
#include <cmath>
#include <iomanip>
#include <ostream>
#include <sstream>
#include <string>

namespace fxdpd {

namespace {

std::int64_t round_ld(long double v) { return static_cast<std::int64_t>(std::nearbyintl(v)); }

int even_floor(int v) { return v >= 0 ? (v & ~1) : -((-v + 1) & ~1); }

// Exponent e such that 1/sqrt(z_real) = (1/sqrt(u)) * 2^e.
int result_exponent(const InvSqrtConfig& cfg, int shift) {
  return (cfg.input_frac_bits - cfg.window_bits - shift) / 2;
}

std::string hex_word(std::int64_t raw, int width) {
  const std::uint64_t mask = width >= 64 ? ~0ULL : ((1ULL << width) - 1);
  std::ostringstream os;
  os << std::hex << std::setw((width + 3) / 4) << std::setfill('0')
     << (static_cast<std::uint64_t>(raw) & mask);
  return os.str();
}

}  // namespace

void InvSqrtConfig::validate() const {
  const auto fail = [](const std::string& msg) {
    throw std::invalid_argument("invalid inverse-sqrt config: " + msg);
  };
  if (window_bits < 4 || window_bits > 17) fail("window_bits must be in [4, 17]");
  if (window_bits % 2 != 0) fail("window_bits must be even");
  if (lut_addr_bits < 2 || lut_addr_bits > window_bits) fail("lut_addr_bits must be in [2, window_bits]");
  if (seed_frac_bits < 8 || seed_frac_bits > kInvSqrtWorkFrac) fail("seed_frac_bits must be in [8, 22]");
  if (iter_count < 0 || iter_count > 4) fail("iter_count must be in [0, 4]");
  if (input_bits < 2 || input_bits > 62) fail("input_bits must be in [2, 62]");
  if (input_frac_bits % 2 != 0) fail("input_frac_bits must be even");
  const int top = input_bits - 1;
  const int e_min = result_exponent(*this, even_floor(top - (window_bits - 2)));
  const int e_max = result_exponent(*this, even_floor(0 - (window_bits - 2)));
  if (3 + e_min < 1 || 15 - e_max < 0) fail("input range cannot be expressed by the result format");
}

InvSqrtConfig InvSqrtConfig::for_activation(FxpFormat act) {
  InvSqrtConfig cfg;
  cfg.input_frac_bits = 2 * act.frac_bits;
  cfg.input_bits = 2 * act.width();
  return cfg;
}

FxpFormat seed_format(const InvSqrtConfig& cfg) { return {4, cfg.seed_frac_bits}; }
FxpFormat window_format(const InvSqrtConfig& cfg) { return {1, cfg.window_bits}; }

SeedTable SeedTable::build(const InvSqrtConfig& cfg) {
  cfg.validate();
  SeedTable t;
  t.format_ = seed_format(cfg);
  t.addr_bits_ = cfg.lut_addr_bits;
  const std::size_t n = std::size_t{1} << cfg.lut_addr_bits;
  t.entries_.resize(n);
  const long double scale = std::ldexp(1.0L, cfg.seed_frac_bits);
  for (std::size_t k = n / 4; k < n; ++k) {
    const long double mid = (static_cast<long double>(k) + 0.5L) / static_cast<long double>(n);
    SeedEntry& e = t.entries_[k];
    e.x0 = round_ld(scale / std::sqrt(mid));
    const long double x0 = static_cast<long double>(e.x0) / scale;
    e.s1 = round_ld(1.5L * x0 * scale);
    e.s3 = round_ld(0.5L * x0 * x0 * x0 * scale);
  }
  return t;
}

void SeedTable::write_hex(std::ostream& os) const {
  os << "// inverse-sqrt seed ROM: " << entries_.size() << " entries, address bits "
     << addr_bits_ << "\n";
  os << "// columns: s1=1.5*x0 s3=0.5*x0^3, format " << format_.to_string() << "\n";
  for (const SeedEntry& e : entries_) {
    os << hex_word(e.s1, format_.width()) << ' ' << hex_word(e.s3, format_.width()) << '\n';
  }
}

NormalizedInput normalize_shift(std::uint64_t z, const InvSqrtConfig& cfg) {
  if (z == 0) throw std::invalid_argument("normalize_shift: zero input");
  const int msb = 63 - std::countl_zero(z);
  const int shift = even_floor(msb - (cfg.window_bits - 2));
  NormalizedInput out;
  out.shift = shift;
  out.z_norm = shift >= 0 ? (z >> shift) : (z << -shift);
  return out;
}

FxpValue nr_first_folded(const SeedEntry& seed, FxpValue u, const InvSqrtConfig& cfg) {
  const FxpFormat sf = seed_format(cfg);
  const FxpValue s3{seed.s3, sf};
  const FxpValue s1{seed.s1, sf};
  const FxpValue t = fxp_mul(s3, u, kInvSqrtWork, Rounding::kTruncate).value;
  const FxpValue terms[] = {s1, negate_widened(t)};
  const FxpValue x1 = csa_accumulate(terms, kInvSqrtWork).value;
  return convert(x1, kInvSqrtMantissa, Rounding::kNearestEven).value;
}

FxpValue nr_iterate(FxpValue x, FxpValue u) {
  const FxpValue sq = fxp_mul(x, x, kInvSqrtSquare, Rounding::kTruncate).value;
  const FxpValue t = fxp_mul(sq, u, kInvSqrtWork, Rounding::kTruncate).value;
  const FxpValue terms[] = {FxpValue{std::int64_t{3} << kInvSqrtWorkFrac, kInvSqrtWork},
                            negate_widened(t)};
  const FxpValue three_minus = csa_accumulate(terms, kInvSqrtWork).value;
  const MultiplierModel dsp{};
  if (!dsp.accepts(x.format.width(), three_minus.format.width())) {
    throw WidthError(x.format.width(), three_minus.format.width(), dsp.wide_port,
                     dsp.narrow_port);
  }
  const Int128 p = Int128{x.raw} * Int128{three_minus.raw};
  // The factor 0.5 is one extra fraction bit.
  return requantize(p, x.format.frac_bits + three_minus.format.frac_bits + 1, kInvSqrtMantissa,
                    Rounding::kNearestEven)
      .value;
}

InvSqrtUnit::InvSqrtUnit(InvSqrtConfig cfg) : cfg_(cfg), table_(SeedTable::build(cfg)) {}

InvSqrtResult InvSqrtUnit::inv_sqrt(std::uint64_t z) const {
  if (z == 0) throw std::invalid_argument("inv_sqrt: zero input");
  if (cfg_.input_bits < 64 && (z >> cfg_.input_bits) != 0) {
    throw std::invalid_argument("inv_sqrt: input exceeds " + std::to_string(cfg_.input_bits) +
                                " bits");
  }
  InvSqrtResult r;
  r.norm = normalize_shift(z, cfg_);
  r.window = FxpValue{static_cast<std::int64_t>(r.norm.z_norm), window_format(cfg_)};
  const SeedEntry& seed = table_.entry(r.norm.z_norm >> (cfg_.window_bits - cfg_.lut_addr_bits));
  FxpValue x;
  if (cfg_.iter_count == 0) {
    x = convert({seed.x0, table_.format()}, kInvSqrtMantissa, Rounding::kNearestEven).value;
  } else {
    x = nr_first_folded(seed, r.window, cfg_);
    for (int i = 1; i < cfg_.iter_count; ++i) x = nr_iterate(x, r.window);
  }
  r.mantissa = x;
  r.exponent = result_exponent(cfg_, r.norm.shift);
  r.value = FxpValue{x.raw, {kInvSqrtMantissa.int_bits + r.exponent,
                             kInvSqrtMantissa.frac_bits - r.exponent}};
  return r;
}

CertifyResult certify_error(const InvSqrtConfig& cfg, std::uint64_t z_max) {
  const InvSqrtUnit unit(cfg);
  CertifyResult res;
  res.z_max = z_max != 0 ? z_max : (std::uint64_t{1} << (cfg.input_frac_bits + 1));
  if (cfg.input_bits < 64) {
    res.z_max = std::min<std::uint64_t>(res.z_max, (std::uint64_t{1} << cfg.input_bits) - 1);
  }
  for (std::uint64_t z = 1; z <= res.z_max; ++z) {
    const InvSqrtResult r = unit.inv_sqrt(z);
    const long double got = std::ldexp(static_cast<long double>(r.value.raw),
                                       -r.value.format.frac_bits);
    const long double zr = std::ldexp(static_cast<long double>(z), -cfg.input_frac_bits);
    const long double ref = 1.0L / std::sqrt(zr);
    const double err = static_cast<double>(std::fabs(got - ref) / ref);
    if (err > res.eps_max) {
      res.eps_max = err;
      res.worst_z = z;
    }
  }
  res.checked = res.z_max;
  return res;
}

AmplitudeFeatures amplitude_features(FxpValue i, FxpValue q, const InvSqrtUnit& unit,
                                     FxpFormat act, Rounding mode, MultiplierModel model) {
  AmplitudeFeatures f;
  f.z = static_cast<std::uint64_t>(i.raw * i.raw + q.raw * q.raw);
  if (f.z == 0) {
    f.zero = true;
    f.inv_a = FxpValue::zero(kInvSqrtMantissa);
    f.a = FxpValue::zero(act);
    f.a3 = FxpValue::zero(act);
    return f;
  }
  const InvSqrtResult r = unit.inv_sqrt(f.z);
  f.inv_a = r.value;

  if (!model.accepts(r.window.format.width(), r.mantissa.format.width())) {
    throw WidthError(r.window.format.width(), r.mantissa.format.width(), model.wide_port,
                     model.narrow_port);
  }
  const Int128 ua = Int128{r.window.raw} * Int128{r.mantissa.raw};
  const int ua_frac = r.window.format.frac_bits + r.mantissa.format.frac_bits + r.exponent;
  f.a = requantize(ua, ua_frac, act, mode).value;

  const int z_frac = i.format.frac_bits + q.format.frac_bits;
  const FxpValue z_short =
      requantize(static_cast<Int128>(f.z), z_frac, kSquaredMagnitudeShort, Rounding::kTruncate)
          .value;
  f.a3 = fxp_mul(f.a, z_short, act, mode, model).value;
  return f;
}

}  // namespace fxdpd
