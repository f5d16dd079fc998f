// SPDX-FileCopyrightText: © 2026 The fxdpd Authors
//
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numbers>

#include "fxdpd/metrics.hpp"
#include "fxdpd/pa.hpp"
#include "fxdpd/rng.hpp"
#include "waveform.hpp"

namespace fxdpd {
namespace {

constexpr double kFs = 170e6;
constexpr double kBw = 20e6;

std::vector<cd> noise(std::size_t n, double power, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<cd> x(n);
  const double s = std::sqrt(power / 2.0);
  for (cd& v : x) v = s * cd(rng.normal(), rng.normal());
  return x;
}

double mean_power(std::span<const cd> x) {
  double p = 0.0;
  for (const cd& v : x) p += std::norm(v);
  return p / static_cast<double>(x.size());
}

// Tones on the 4096-point grid inside |f| < bw/2 with random phases: a
// band-limited signal with no energy outside the band.
std::vector<cd> multitone(std::size_t n, double bw, std::uint64_t seed) {
  Rng rng(seed);
  const double df = kFs / 4096.0;
  const int kmax = static_cast<int>((bw / 2.0) / df) - 1;
  std::vector<cd> x(n);
  for (int k = -kmax; k <= kmax; ++k) {
    const double phase = 2.0 * std::numbers::pi * rng.uniform01();
    const double w = 2.0 * std::numbers::pi * k / 4096.0;
    for (std::size_t t = 0; t < n; ++t) x[t] += std::polar(1.0, w * static_cast<double>(t % 4096) + phase);
  }
  return x;
}

TEST(Nmse, ReportingFloorAndGainAlignment) {
  const std::vector<cd> ref = noise(4000, 1.0, 1);
  EXPECT_EQ(nmse(ref, ref).db, kDbFloor);
  std::vector<cd> y(ref);
  for (cd& v : y) v *= 1.01;
  const NmseResult r = nmse(y, ref);
  EXPECT_LE(r.db, -200.0 + 1e-9);
  EXPECT_NEAR(std::abs(r.gain - 1.0 / 1.01), 0.0, 1e-12);
}

TEST(Nmse, ConstructedNoiseLevel) {
  const std::vector<cd> ref = noise(200000, 1.0, 2);
  const std::vector<cd> e = noise(200000, 1e-3, 3);
  std::vector<cd> y(ref.size());
  for (std::size_t i = 0; i < y.size(); ++i) y[i] = ref[i] + e[i];
  EXPECT_NEAR(nmse(y, ref).db, -30.0, 0.5);
}

TEST(Nmse, ComplexScaleInvariant) {
  const std::vector<cd> ref = noise(5000, 1.0, 4);
  const std::vector<cd> e = noise(5000, 0.01, 5);
  std::vector<cd> y(ref.size());
  for (std::size_t i = 0; i < y.size(); ++i) y[i] = ref[i] + e[i];
  const double base = nmse(y, ref).db;
  Rng rng(6);
  for (int k = 0; k < 10; ++k) {
    const cd g(rng.uniform(-3, 3), rng.uniform(-3, 3));
    std::vector<cd> yg(y);
    for (cd& v : yg) v *= g;
    EXPECT_NEAR(nmse(yg, ref).db, base, 1e-9);
  }
}

TEST(Nmse, Errors) {
  const std::vector<cd> a(10, cd(1, 0));
  EXPECT_THROW(nmse(a, std::vector<cd>(9)), std::invalid_argument);
  EXPECT_THROW(nmse(a, std::vector<cd>(10)), std::invalid_argument);
}

TEST(PsdWelch, TonePeaksAtItsBin) {
  const double f0 = 37.0 * kFs / 4096.0;
  std::vector<cd> x(32768);
  for (std::size_t t = 0; t < x.size(); ++t) x[t] = std::polar(1.0, 2.0 * std::numbers::pi * f0 * t / kFs);
  const PsdEstimate psd = psd_welch(x, kFs);
  const auto peak = std::max_element(psd.density.begin(), psd.density.end()) - psd.density.begin();
  EXPECT_NEAR(psd.freq_hz[static_cast<std::size_t>(peak)], f0, 1e-6);
  EXPECT_EQ(psd.segment_length, 4096);
  EXPECT_EQ(psd.overlap, 2048);
  EXPECT_EQ(psd.segments, 15);
  EXPECT_EQ(psd.density.size(), 4096u);
}

TEST(PsdWelch, WhiteNoiseIsFlat) {
  const std::vector<cd> x = noise(1 << 20, 1.0, 7);
  const PsdEstimate psd = psd_welch(x, kFs);
  const double expected = 1.0 / kFs;
  // ~511 averaged segments: per-bin relative spread about 1/sqrt(511) ~ 4.4%;
  // averaging 64 bins tightens that to well under 1%.
  for (std::size_t b = 0; b < psd.density.size(); b += 64) {
    double s = 0.0;
    for (std::size_t i = b; i < b + 64; ++i) s += psd.density[i];
    EXPECT_NEAR(s / 64.0 / expected, 1.0, 0.03) << b;
  }
}

TEST(PsdWelch, Parseval) {
  for (std::uint64_t seed : {8u, 9u}) {
    const std::vector<cd> x = noise(65536, 0.37, seed);
    const PsdEstimate psd = psd_welch(x, kFs);
    EXPECT_NEAR(psd.total_power() / mean_power(x), 1.0, 0.01);
  }
  SignalSpec spec;
  spec.num_samples = 65536;
  const Baseband bb = gen_baseband(spec);
  const PsdEstimate psd = psd_welch(bb.signal.samples, kFs);
  EXPECT_NEAR(psd.total_power() / mean_power(bb.signal.samples), 1.0, 0.01);
}

TEST(PsdWelch, Errors) {
  const std::vector<cd> x(100);
  EXPECT_THROW(psd_welch(x, kFs), std::invalid_argument);
  EXPECT_THROW(psd_welch(x, kFs, 64, 64), std::invalid_argument);
}

TEST(Acpr, BandLimitedSignalHitsEstimatorFloor) {
  const std::vector<cd> x = multitone(32768, kBw, 10);
  const AcprResult a = acpr(x, kFs, kBw);
  EXPECT_LT(a.lower_dbc, -80.0);
  EXPECT_LT(a.upper_dbc, -80.0);
}

TEST(Acpr, AdjacentToneAtMinus40) {
  std::vector<cd> x = multitone(32768, kBw, 11);
  const double p = mean_power(x);
  const double f1 = std::round(kBw / (kFs / 4096.0)) * kFs / 4096.0;  // on-grid, inside upper channel
  const double amp = std::sqrt(1e-4 * p);
  for (std::size_t t = 0; t < x.size(); ++t) x[t] += std::polar(amp, 2.0 * std::numbers::pi * f1 * t / kFs);
  const AcprResult a = acpr(x, kFs, kBw);
  EXPECT_NEAR(a.upper_dbc, -40.0, 1.0);
  EXPECT_LT(a.lower_dbc, -80.0);
  EXPECT_EQ(a.worst(), a.upper_dbc);
  EXPECT_NEAR(a.mean(), 0.5 * (a.lower_dbc + a.upper_dbc), 1e-12);
}

TEST(Acpr, ScaleInvariance) {
  SignalSpec spec;
  spec.num_samples = 32768;
  const SignalBuffer y = pa_forward(gen_baseband(spec).signal, default_pa());
  const AcprResult base = acpr(y.samples, kFs, kBw);
  EXPECT_LE(base.lower_dbc, 0.0);
  EXPECT_LE(base.upper_dbc, 0.0);
  // Power-of-two scaling is exact in floating point, so the result is too.
  std::vector<cd> y4(y.samples);
  for (cd& v : y4) v *= 4.0;
  const AcprResult a4 = acpr(y4, kFs, kBw);
  EXPECT_EQ(a4.lower_dbc, base.lower_dbc);
  EXPECT_EQ(a4.upper_dbc, base.upper_dbc);
  Rng rng(12);
  for (int k = 0; k < 5; ++k) {
    const cd g(rng.uniform(-2, 2), rng.uniform(-2, 2));
    std::vector<cd> yg(y.samples);
    for (cd& v : yg) v *= g;
    const AcprResult ag = acpr(yg, kFs, kBw);
    EXPECT_NEAR(ag.lower_dbc, base.lower_dbc, 1e-9);
    EXPECT_NEAR(ag.upper_dbc, base.upper_dbc, 1e-9);
  }
}

TEST(Acpr, BeyondNyquistRejected) {
  const std::vector<cd> x = noise(8192, 1.0, 13);
  EXPECT_THROW(acpr(x, 50e6, kBw), std::invalid_argument);
  EXPECT_NO_THROW(acpr(x, 60e6, kBw));
}

class EvmTest : public ::testing::Test {
 protected:
  void SetUp() override {
    spec_.num_samples = 20000;
    bb_ = gen_baseband(spec_);
  }
  std::vector<cd> synthesize(const std::vector<cd>& symbols) const {
    return testing::synthesize(spec_, symbols);
  }
  SignalSpec spec_;
  Baseband bb_;
};

TEST_F(EvmTest, LoopbackIsAtNumericalFloor) {
  const EvmResult r = evm(bb_.signal.samples, 0, bb_.symbols, spec_);
  EXPECT_LT(r.db, -60.0);
  EXPECT_GT(r.symbols_used, 1000u);
  // A window into the middle of the buffer sees the same symbols.
  const std::span<const cd> part = std::span<const cd>(bb_.signal.samples).subspan(3000, 12000);
  EXPECT_LT(evm(part, 3000, bb_.symbols, spec_).db, -60.0);
}

TEST_F(EvmTest, SymbolDomainNoiseLevel) {
  std::vector<cd> noisy(bb_.symbols);
  const std::vector<cd> e = noise(noisy.size(), 1e-4, 14);
  for (std::size_t k = 0; k < noisy.size(); ++k) noisy[k] += e[k];
  const EvmResult r = evm(synthesize(noisy), 0, bb_.symbols, spec_);
  // Empirical noise power of the symbols actually measured.
  const std::size_t first = static_cast<std::size_t>(2 * spec_.rrc_span);
  double ep = 0.0;
  double sp = 0.0;
  for (std::size_t k = first; k < first + r.symbols_used; ++k) {
    ep += std::norm(e[k]);
    sp += std::norm(bb_.symbols[k]);
  }
  EXPECT_NEAR(r.db, -40.0, 0.5);
  EXPECT_NEAR(r.db, 10.0 * std::log10(ep / sp), 0.5);
}

TEST_F(EvmTest, ComplexScaleInvariant) {
  std::vector<cd> noisy(bb_.symbols);
  const std::vector<cd> e = noise(noisy.size(), 1e-3, 15);
  for (std::size_t k = 0; k < noisy.size(); ++k) noisy[k] += e[k];
  const std::vector<cd> y = synthesize(noisy);
  const double base = evm(y, 0, bb_.symbols, spec_).db;
  for (const cd g : {std::polar(1.0, 0.7), cd(-0.3, 2.2), cd(5.0, 0.0)}) {
    std::vector<cd> yg(y);
    for (cd& v : yg) v *= g;
    EXPECT_NEAR(evm(yg, 0, bb_.symbols, spec_).db, base, 1e-9);
  }
}

TEST_F(EvmTest, TooShortBufferRejected) {
  const std::span<const cd> tiny = std::span<const cd>(bb_.signal.samples).first(50);
  EXPECT_THROW(evm(tiny, 0, bb_.symbols, spec_), std::invalid_argument);
}

TEST(ToDb, Floor) {
  EXPECT_EQ(to_db(0.0), kDbFloor);
  EXPECT_EQ(to_db(1e-30), kDbFloor);
  EXPECT_NEAR(to_db(0.001), -30.0, 1e-12);
}

}  // namespace
}  // namespace fxdpd
