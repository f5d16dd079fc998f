// SPDX-FileCopyrightText: © 2026 The fxdpd Authors
//
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <cmath>
#include <sstream>
#include <string>

#include "fxdpd/invsqrt.hpp"
#include "fxdpd/rng.hpp"
#include "oracle.hpp"

namespace fxdpd {
namespace {

double real_of(FxpValue v) { return std::ldexp(static_cast<double>(v.raw), -v.format.frac_bits); }

TEST(InvSqrtConfig, Validation) {
  EXPECT_NO_THROW(InvSqrtConfig{}.validate());
  InvSqrtConfig odd;
  odd.window_bits = 13;
  EXPECT_THROW(odd.validate(), std::invalid_argument);
  InvSqrtConfig lut;
  lut.lut_addr_bits = 15;
  EXPECT_THROW(lut.validate(), std::invalid_argument);
  InvSqrtConfig iters;
  iters.iter_count = -1;
  EXPECT_THROW(iters.validate(), std::invalid_argument);
  EXPECT_EQ(InvSqrtConfig::for_activation(kQ1_13), InvSqrtConfig{});
}

TEST(NormalizeShift, Examples) {
  const InvSqrtConfig cfg;
  const std::uint64_t z0 = 0x2345;  // MSB at bit 13, inside the window
  const NormalizedInput a = normalize_shift(z0, cfg);
  EXPECT_EQ(a.z_norm, z0);
  EXPECT_EQ(a.shift, 0);
  const NormalizedInput b = normalize_shift(4 * z0, cfg);
  EXPECT_EQ(b.z_norm, z0);
  EXPECT_EQ(b.shift, 2);
  EXPECT_THROW(normalize_shift(0, cfg), std::invalid_argument);
}

TEST(NormalizeShift, EveryBitPositionLandsInWindow) {
  const InvSqrtConfig cfg;
  Rng rng(3);
  for (int msb = 0; msb < cfg.input_bits; ++msb) {
    for (int k = 0; k < 64; ++k) {
      const std::uint64_t low = msb == 0 ? 0 : rng.next_u64() & ((std::uint64_t{1} << msb) - 1);
      const std::uint64_t z = (std::uint64_t{1} << msb) | low;
      const NormalizedInput n = normalize_shift(z, cfg);
      ASSERT_EQ(n.shift % 2, 0);
      ASSERT_GE(n.z_norm, std::uint64_t{1} << (cfg.window_bits - 2));
      ASSERT_LT(n.z_norm, std::uint64_t{1} << cfg.window_bits);
      ASSERT_EQ(n.shift >= 0 ? (z >> n.shift) : (z << -n.shift), n.z_norm);
    }
  }
}

TEST(SeedTable, MatchesIndependentRom) {
  const oracle::InterpreterConfig icfg;
  oracle::InterpreterParams ip;
  ip.w_fc.assign(12 * 10, 0);
  ip.b_fc.assign(12, 0);
  ip.w_out.assign(2 * 22, 0);
  ip.b_out.assign(2, 0);
  ip.mask_fc.assign(12 * 10, 1);
  ip.mask_out.assign(2 * 22, 1);
  const oracle::StraightLineDpd interp(icfg, ip);
  const SeedTable t = SeedTable::build(InvSqrtConfig{});
  ASSERT_EQ(t.size(), interp.rom().size());
  for (std::size_t k = 0; k < t.size(); ++k) {
    EXPECT_EQ(t.entry(k).s1, interp.rom()[k].first) << k;
    EXPECT_EQ(t.entry(k).s3, interp.rom()[k].second) << k;
  }
}

TEST(SeedTable, HexDump) {
  const SeedTable t = SeedTable::build(InvSqrtConfig{});
  std::ostringstream os;
  t.write_hex(os);
  std::istringstream is(os.str());
  std::string line;
  std::size_t data = 0;
  while (std::getline(is, line)) {
    if (line.rfind("//", 0) == 0) continue;
    ASSERT_EQ(line.size(), 5u + 1u + 5u) << line;
    ++data;
  }
  EXPECT_EQ(data, t.size());
}

TEST(NrIterate, FixedPointOfIteration) {
  const FxpValue u{std::int64_t{1} << 12, window_format(InvSqrtConfig{})};  // 0.25
  const FxpValue x{std::int64_t{2} << kInvSqrtMantissa.frac_bits, kInvSqrtMantissa};
  const FxpValue y = nr_iterate(x, u);
  EXPECT_LE(std::llabs(y.raw - x.raw), 1);
}

TEST(NrIterate, QuadraticConvergence) {
  Rng rng(4);
  const FxpFormat wf = window_format(InvSqrtConfig{});
  for (int k = 0; k < 200; ++k) {
    const auto raw = static_cast<std::int64_t>(4096 + rng.uniform_index(16384 - 4096));
    const FxpValue u{raw, wf};
    const double exact = 1.0 / std::sqrt(real_of(u));
    const double eps = 0.1;
    const FxpValue x0 = quantize(exact * (1.0 + eps), kInvSqrtMantissa, Rounding::kNearestEven).value;
    const double e0 = real_of(x0) / exact - 1.0;
    const double e1 = std::fabs(real_of(nr_iterate(x0, u)) / exact - 1.0);
    const double predicted = 1.5 * e0 * e0 + 0.5 * e0 * e0 * e0;
    EXPECT_NEAR(e1, predicted, 2e-4) << raw;
  }
}

TEST(NrIterate, TwoIterationsEveryLutCell) {
  const InvSqrtConfig cfg;
  const InvSqrtUnit unit(cfg);
  const int cell_bits = cfg.window_bits - cfg.lut_addr_bits;
  double worst = 0.0;
  for (std::uint64_t cell = 1u << (cfg.lut_addr_bits - 2); cell < (1u << cfg.lut_addr_bits); ++cell) {
    for (std::uint64_t off : {std::uint64_t{0}, std::uint64_t{1} << (cell_bits - 1),
                              (std::uint64_t{1} << cell_bits) - 1}) {
      const std::uint64_t zn = (cell << cell_bits) | off;
      // No shift: z_norm == z and the exact reference is 1/sqrt(zn * 2^-26).
      const InvSqrtResult r = unit.inv_sqrt(zn);
      ASSERT_EQ(r.norm.shift, 0);
      const double ref = 1.0 / std::sqrt(std::ldexp(static_cast<double>(zn), -26));
      worst = std::max(worst, std::fabs(real_of(r.value) - ref) / ref);
    }
  }
  RecordProperty("eps_lut_cells", std::to_string(worst));
  EXPECT_LT(worst, kInvSqrtTarget);
}

TEST(InvSqrt, SpecExamples) {
  const InvSqrtUnit unit;
  const double one = real_of(unit.inv_sqrt(std::uint64_t{1} << 26).value);
  EXPECT_NEAR(one, 1.0, kInvSqrtTarget);
  const double two = real_of(unit.inv_sqrt(std::uint64_t{1} << 24).value);
  EXPECT_NEAR(two, 2.0, 2.0 * kInvSqrtTarget);
  EXPECT_THROW(unit.inv_sqrt(0), std::invalid_argument);
  EXPECT_THROW(unit.inv_sqrt(std::uint64_t{1} << 28), std::invalid_argument);
}

TEST(InvSqrt, ScaleByFourHalvesResult) {
  const InvSqrtUnit unit;
  Rng rng(5);
  for (int k = 0; k < 2000; ++k) {
    const std::uint64_t z = (std::uint64_t{1} << 13) + rng.uniform_index((std::uint64_t{1} << 25) - (1u << 13));
    const InvSqrtResult a = unit.inv_sqrt(z);
    const InvSqrtResult b = unit.inv_sqrt(4 * z);
    ASSERT_EQ(a.mantissa, b.mantissa);
    ASSERT_EQ(a.exponent, b.exponent + 1);
  }
}

TEST(InvSqrt, MonotoneNonIncreasing) {
  const InvSqrtUnit unit;
  double prev = real_of(unit.inv_sqrt(1).value);
  for (std::uint64_t z = 2; z < (std::uint64_t{1} << 18); ++z) {
    const double v = real_of(unit.inv_sqrt(z).value);
    ASSERT_LE(v, prev * (1.0 + 2.0 * kInvSqrtTarget)) << z;
    prev = std::min(prev, v);
  }
}

TEST(CertifyError, IterationsOnTruncationFreeRange) {
  // z < 2^window_bits reaches the datapath without dropping bits, so the
  // measured error is the seed and Newton-Raphson arithmetic alone.
  const std::uint64_t z_max = (std::uint64_t{1} << InvSqrtConfig{}.window_bits) - 1;
  double prev = 1.0;
  for (int iters = 0; iters <= 2; ++iters) {
    InvSqrtConfig c;
    c.iter_count = iters;
    const double eps = certify_error(c, z_max).eps_max;
    EXPECT_LT(eps, prev) << iters;
    prev = eps;
  }
}

TEST(CertifyError, TargetAndWindowOnSubset) {
  // Every value with MSB below bit 20: all LUT cells, all shifts up to 20 and
  // up to 8 bits of window truncation. Beyond one iteration the error is
  // bounded by the window truncation, not by the iteration count.
  const std::uint64_t z_max = (std::uint64_t{1} << 20) - 1;
  InvSqrtConfig c2;
  InvSqrtConfig c0;
  c0.iter_count = 0;
  InvSqrtConfig wide;
  wide.window_bits = 16;
  const CertifyResult r2 = certify_error(c2, z_max);
  const CertifyResult r0 = certify_error(c0, z_max);
  const CertifyResult rw = certify_error(wide, z_max);
  EXPECT_EQ(r2.checked, z_max);
  EXPECT_LE(r2.eps_max, kInvSqrtTarget);
  EXPECT_GT(r0.eps_max, r2.eps_max);
  EXPECT_GT(r0.eps_max, kInvSqrtTarget);
  EXPECT_LE(rw.eps_max, r2.eps_max);
  EXPECT_EQ(certify_error(c2, z_max).worst_z, r2.worst_z);  // deterministic
}

TEST(AmplitudeFeatures, SpecExamples) {
  const InvSqrtUnit unit;
  const auto q13 = [](double v) { return quantize(v, kQ1_13, Rounding::kNearestEven).value; };
  const AmplitudeFeatures big = amplitude_features(q13(0.6), q13(0.8), unit, kQ1_13, Rounding::kTruncate);
  EXPECT_GE(big.a.raw, kQ1_13.max_raw() - 2);
  EXPECT_GE(big.a3.raw, kQ1_13.max_raw() - 6);

  const AmplitudeFeatures mid = amplitude_features(q13(0.3), q13(0.4), unit, kQ1_13, Rounding::kTruncate);
  EXPECT_NEAR(real_of(mid.a), 0.5, 3.0 * kQ1_13.ulp());
  EXPECT_NEAR(real_of(mid.a3), 0.125, 3.0 * kQ1_13.ulp());

  const AmplitudeFeatures zero = amplitude_features(q13(0.0), q13(0.0), unit, kQ1_13, Rounding::kTruncate);
  EXPECT_TRUE(zero.zero);
  EXPECT_EQ(zero.a.raw, 0);
  EXPECT_EQ(zero.a3.raw, 0);
}

TEST(AmplitudeFeatures, RandomPairsWithinCertifiedBound) {
  const InvSqrtUnit unit;
  Rng rng(6);
  const double ulp = kQ1_13.ulp();
  for (int k = 0; k < 20000; ++k) {
    const auto i = static_cast<std::int64_t>(rng.uniform_index(16384)) - 8192;
    const auto q = static_cast<std::int64_t>(rng.uniform_index(16384)) - 8192;
    if (i == 0 && q == 0) continue;
    const AmplitudeFeatures f = amplitude_features({i, kQ1_13}, {q, kQ1_13}, unit, kQ1_13, Rounding::kTruncate);
    const double a_true = std::hypot(static_cast<double>(i), static_cast<double>(q)) * ulp;
    const double a_clamped = std::min(a_true, kQ1_13.max_value());
    ASSERT_LE(std::fabs(real_of(f.a) - a_clamped), kInvSqrtTarget * a_true + ulp) << i << " " << q;
    const double a3_true = std::min(a_true * a_true * a_true, kQ1_13.max_value());
    ASSERT_LE(std::fabs(real_of(f.a3) - a3_true), 3.0 * kInvSqrtTarget * a3_true + 3.0 * ulp);
  }
}

TEST(AmplitudeFeatures, RotationByQuarterTurnIsExact) {
  const InvSqrtUnit unit;
  Rng rng(7);
  for (int k = 0; k < 2000; ++k) {
    const auto i = static_cast<std::int64_t>(rng.uniform_index(16383)) - 8191;
    const auto q = static_cast<std::int64_t>(rng.uniform_index(16383)) - 8191;
    if (i == 0 && q == 0) continue;
    const AmplitudeFeatures a = amplitude_features({i, kQ1_13}, {q, kQ1_13}, unit, kQ1_13, Rounding::kTruncate);
    const AmplitudeFeatures b = amplitude_features({-q, kQ1_13}, {i, kQ1_13}, unit, kQ1_13, Rounding::kTruncate);
    ASSERT_EQ(a.a, b.a);
    ASSERT_EQ(a.a3, b.a3);
  }
}

}  // namespace
}  // namespace fxdpd
