// SPDX-FileCopyrightText: © 2026 The fxdpd Authors
//
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <nlohmann/json.hpp>
#include <set>
#include <utility>

#include "fxdpd/metrics.hpp"
#include "fxdpd/pa.hpp"
#include "fxdpd/rng.hpp"

namespace fxdpd {
namespace {

std::vector<cd> random_signal(std::size_t n, double amp, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<cd> x(n);
  for (cd& v : x) v = amp * cd(rng.normal(), rng.normal()) / std::sqrt(2.0);
  return x;
}

PaCoeffs random_coeffs(int order, int memory, std::uint64_t seed) {
  Rng rng(seed);
  PaCoeffs c(order, memory);
  for (cd& v : c.flat()) v = 0.3 * cd(rng.normal(), rng.normal());
  c.at(1, 0) = 1.0;
  return c;
}

// Direct evaluation of y_t = sum_k sum_m a[k][m] x_{t-m} |x_{t-m}|^{k-1}.
std::vector<cd> brute_force_pa(const std::vector<cd>& x, const PaCoeffs& c) {
  std::vector<cd> y(x.size());
  for (std::size_t t = 0; t < x.size(); ++t) {
    for (int k = 1; k <= c.order(); k += 2) {
      for (int m = 0; m <= c.memory(); ++m) {
        if (static_cast<std::size_t>(m) > t) continue;
        const cd v = x[t - m];
        y[t] += c.at(k, m) * v * std::pow(std::abs(v), k - 1);
      }
    }
  }
  return y;
}

TEST(GenBaseband, ConstellationIs64QamGrid) {
  std::set<std::pair<int, int>> pts;
  double power = 0.0;
  for (unsigned k = 0; k < 64; ++k) {
    const cd p = qam64_point(k);
    power += std::norm(p);
    // Unit average power: levels are odd multiples of 1/sqrt(42).
    const double li = p.real() * std::sqrt(42.0);
    const double lq = p.imag() * std::sqrt(42.0);
    ASSERT_NEAR(li, std::round(li), 1e-12);
    ASSERT_NEAR(lq, std::round(lq), 1e-12);
    ASSERT_EQ(std::abs(static_cast<int>(std::round(li))) % 2, 1);
    pts.insert({static_cast<int>(std::round(li)), static_cast<int>(std::round(lq))});
  }
  EXPECT_EQ(pts.size(), 64u);
  EXPECT_NEAR(power / 64.0, 1.0, 1e-12);

  SignalSpec spec;
  spec.num_samples = 8192;
  const Baseband bb = gen_baseband(spec);
  std::set<std::pair<long, long>> used;
  for (const cd& s : bb.symbols) used.insert({std::lround(s.real() * 1e6), std::lround(s.imag() * 1e6)});
  EXPECT_EQ(used.size(), 64u);
}

TEST(GenBaseband, DeterministicAndPeakScaled) {
  SignalSpec spec;
  spec.num_samples = 4096;
  const Baseband a = gen_baseband(spec);
  const Baseband b = gen_baseband(spec);
  EXPECT_EQ(a.signal.samples, b.signal.samples);
  EXPECT_EQ(a.signal.size(), 4096u);
  double peak = 0.0;
  for (const cd& v : a.signal.samples) peak = std::max(peak, std::abs(v));
  EXPECT_NEAR(peak, spec.peak_amplitude, 1e-12);
  spec.seed = 2;
  EXPECT_NE(gen_baseband(spec).signal.samples, a.signal.samples);
}

TEST(GenBaseband, OccupiedBandwidthMatchesSpec) {
  SignalSpec spec;
  spec.num_samples = 65536;
  const Baseband bb = gen_baseband(spec);
  const PsdEstimate psd = psd_welch(bb.signal.samples, spec.sample_rate);
  const double total = psd.total_power();
  // Narrowest symmetric band holding 99.9% of the power: the RRC support,
  // symbol_rate * (1 + rolloff), which is the nominal bandwidth.
  double occupied = 0.0;
  for (double half = psd.bin_width_hz; half < spec.sample_rate / 2.0; half += psd.bin_width_hz) {
    if (psd.band_power(-half, half) >= 0.999 * total) {
      occupied = 2.0 * half;
      break;
    }
  }
  EXPECT_NEAR(occupied, spec.bandwidth, 0.1 * spec.bandwidth);
  // The -3 dB width of an RRC spectrum is the symbol rate.
  double peak = 0.0;
  for (double d : psd.density) peak = std::max(peak, d);
  double lo = 0.0;
  double hi = 0.0;
  for (std::size_t i = 0; i < psd.density.size(); ++i) {
    if (psd.density[i] >= 0.5 * peak) {
      lo = std::min(lo, psd.freq_hz[i]);
      hi = std::max(hi, psd.freq_hz[i]);
    }
  }
  EXPECT_NEAR(hi - lo, spec.symbol_rate(), 0.1 * spec.symbol_rate());
}

TEST(GenBaseband, RejectsInvalidSpec) {
  SignalSpec s;
  s.bandwidth = s.sample_rate * 2.0;
  EXPECT_THROW(s.validate(), std::invalid_argument);
  SignalSpec p;
  p.peak_amplitude = 1.0;
  EXPECT_THROW(p.validate(), std::invalid_argument);
}

TEST(PaForward, IdentityCoefficients) {
  const std::vector<cd> x = random_signal(500, 0.5, 1);
  EXPECT_EQ(pa_forward(SignalBuffer{x, 1.0}, PaCoeffs::identity()).samples, x);
}

TEST(PaForward, PureThirdOrderScalesAsCube) {
  PaCoeffs c(3, 0);
  c.at(1, 0) = 1e-9;  // keeps validate() happy, negligible
  c.at(3, 0) = cd(0.7, -0.2);
  for (double r : {0.1, 0.3, 0.6}) {
    const std::vector<cd> x(16, std::polar(r, 0.4));
    const SignalBuffer y = pa_forward(SignalBuffer{x, 1.0}, c);
    EXPECT_NEAR(std::abs(y.samples.back()), std::abs(c.at(3, 0)) * r * r * r, 1e-9);
  }
}

TEST(PaForward, MatchesBruteForce) {
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const PaCoeffs c = random_coeffs(7, 3, seed);
    const std::vector<cd> x = random_signal(300, 0.4, seed + 10);
    const std::vector<cd> want = brute_force_pa(x, c);
    const std::vector<cd> got = pa_forward(SignalBuffer{x, 1.0}, c).samples;
    for (std::size_t t = 0; t < x.size(); ++t) ASSERT_NEAR(std::abs(got[t] - want[t]), 0.0, 1e-12);
  }
}

TEST(PaForward, TimeInvariant) {
  const PaCoeffs c = default_pa();
  const std::vector<cd> x = random_signal(400, 0.3, 2);
  const int d = 17;
  std::vector<cd> shifted(d, cd{});
  shifted.insert(shifted.end(), x.begin(), x.end());
  const std::vector<cd> y = pa_forward(SignalBuffer{x, 1.0}, c).samples;
  const std::vector<cd> ys = pa_forward(SignalBuffer{shifted, 1.0}, c).samples;
  for (std::size_t t = 0; t < x.size(); ++t) ASSERT_EQ(ys[t + d], y[t]);
}

TEST(PaForward, HomogeneousPerOrder) {
  const std::vector<cd> x = random_signal(200, 0.3, 3);
  for (int k = 1; k <= 7; k += 2) {
    PaCoeffs c(7, 2);
    c.at(1, 0) = k == 1 ? cd(0.9, 0.1) : cd(1e-300, 0.0);
    if (k != 1) {
      c.at(k, 0) = cd(0.5, -0.3);
      c.at(k, 2) = cd(-0.1, 0.2);
    }
    const double g = 1.7;
    std::vector<cd> xs(x);
    for (cd& v : xs) v *= g;
    const std::vector<cd> y = pa_forward(SignalBuffer{x, 1.0}, c).samples;
    const std::vector<cd> ysc = pa_forward(SignalBuffer{xs, 1.0}, c).samples;
    for (std::size_t t = 0; t < x.size(); ++t) {
      ASSERT_NEAR(std::abs(ysc[t] - std::pow(g, k) * y[t]), 0.0, 1e-12 * (1.0 + std::abs(ysc[t])));
    }
  }
}

TEST(PaBackward, AdjointMatchesFiniteDifferences) {
  const PaCoeffs c = random_coeffs(7, 3, 9);
  const std::vector<cd> x = random_signal(60, 0.4, 4);
  const std::vector<cd> gy = random_signal(60, 1.0, 5);
  // L = sum Re(conj(gy) * y); dL/dRe(x) + j dL/dIm(x) is what pa_backward returns.
  const auto loss = [&](const std::vector<cd>& in) {
    std::vector<cd> y(in.size());
    pa_forward(in, y, c);
    double l = 0.0;
    for (std::size_t t = 0; t < y.size(); ++t) l += (std::conj(gy[t]) * y[t]).real();
    return l;
  };
  std::vector<cd> gx(x.size());
  pa_backward(x, gy, gx, c);
  const double h = 1e-6;
  for (std::size_t t = 0; t < x.size(); t += 7) {
    for (const cd dir : {cd(1, 0), cd(0, 1)}) {
      std::vector<cd> xp(x), xm(x);
      xp[t] += h * dir;
      xm[t] -= h * dir;
      const double fd = (loss(xp) - loss(xm)) / (2.0 * h);
      const double an = dir.real() != 0.0 ? gx[t].real() : gx[t].imag();
      ASSERT_NEAR(an, fd, 1e-6 * (1.0 + std::fabs(fd)));
    }
  }
}

TEST(DefaultPa, GoldenMetrics) {
  std::ifstream is(std::string(FXDPD_GOLDEN_DIR) + "/default_pa.json");
  ASSERT_TRUE(is.good());
  const nlohmann::json golden = nlohmann::json::parse(is);
  const double tol = golden.at("tolerance_db").get<double>();
  const PaCoeffs pa = default_pa();
  for (const auto& c : golden.at("cases")) {
    SignalSpec spec;
    spec.num_samples = c.at("num_samples").get<std::size_t>();
    const Baseband bb = gen_baseband(spec);
    const SignalBuffer y = pa_forward(bb.signal, pa);
    const AcprResult a = acpr(y.samples, spec.sample_rate, spec.bandwidth);
    std::vector<cd> ref(bb.signal.samples);
    for (cd& v : ref) v *= pa.at(1, 0);
    const std::span<const cd> ys(y.samples);
    const std::span<const cd> rs(ref);
    const double n = nmse(ys.subspan(3), rs.subspan(3)).db;
    const double e = evm(y.samples, 0, bb.symbols, spec).db;
    EXPECT_NEAR(a.lower_dbc, c.at("acpr_lower_dbc").get<double>(), tol);
    EXPECT_NEAR(a.upper_dbc, c.at("acpr_upper_dbc").get<double>(), tol);
    EXPECT_NEAR(n, c.at("nmse_db").get<double>(), tol);
    EXPECT_NEAR(e, c.at("evm_db").get<double>(), tol);
    // Calibration window for the stand-in PA.
    EXPECT_GE(a.worst(), -35.0);
    EXPECT_LE(a.worst(), -28.0);
    EXPECT_GE(n, -25.0);
    EXPECT_LE(n, -15.0);
  }
}

TEST(DefaultPa, SmallSignalGainAndCompression) {
  const PaCoeffs pa = default_pa();
  EXPECT_NO_THROW(pa.validate());
  EXPECT_EQ(pa.order(), 7);
  EXPECT_EQ(pa.memory(), 3);
  // Constant-envelope input: after M samples every tap sees the same value.
  const auto gain = [&](double r) {
    const std::vector<cd> x(8, cd(r, 0.0));
    return std::abs(pa_forward(SignalBuffer{x, 1.0}, pa).samples.back()) / r;
  };
  cd linear{};
  for (int m = 0; m <= pa.memory(); ++m) linear += pa.at(1, m);
  EXPECT_NEAR(gain(1e-6), std::abs(linear), 1e-9);
  double prev = gain(0.01);
  for (double r = 0.02; r <= 1.0 + 1e-12; r += 0.01) {
    const double g = gain(r);
    EXPECT_LT(g, prev) << r;
    prev = g;
  }
}

TEST(FitPa, RecoversKnownCoefficients) {
  const PaCoeffs c = random_coeffs(7, 3, 21);
  SignalSpec spec;
  spec.num_samples = 6000;
  const Baseband bb = gen_baseband(spec);
  const SignalBuffer y = pa_forward(bb.signal, c);
  const PaFit fit = fit_pa(bb.signal.samples, y.samples, 7, 3);
  for (std::size_t i = 0; i < c.flat().size(); ++i) {
    EXPECT_LE(std::abs(fit.coeffs.flat()[i] - c.flat()[i]), 1e-6 * std::max(1.0, std::abs(c.flat()[i])))
        << i;
  }
  EXPECT_LT(fit.residual_nmse_db, -150.0);
}

TEST(FitPa, IdentityAndWhiteNoise) {
  const std::vector<cd> x = random_signal(5000, 0.4, 30);
  const PaFit id = fit_pa(x, x, 5, 2);
  EXPECT_NEAR(std::abs(id.coeffs.at(1, 0) - 1.0), 0.0, 1e-9);
  for (std::size_t i = 1; i < id.coeffs.flat().size(); ++i) {
    EXPECT_LT(std::abs(id.coeffs.flat()[i]), 1e-9);
  }
  const std::vector<cd> noise = random_signal(5000, 1.0, 31);
  const PaFit nf = fit_pa(x, noise, 5, 2);
  EXPECT_NEAR(nf.residual_nmse_db, 0.0, 0.1);
}

TEST(FitPa, Errors) {
  const std::vector<cd> x = random_signal(100, 0.4, 40);
  EXPECT_THROW(fit_pa(x, std::vector<cd>(99), 3, 1), std::invalid_argument);
  EXPECT_THROW(fit_pa(std::span<const cd>(x).first(10), std::span<const cd>(x).first(10), 7, 3),
               std::invalid_argument);
  const std::vector<cd> flat(400, cd(0.3, 0.1));  // constant envelope: x and x|x|^2 are collinear
  try {
    fit_pa(flat, flat, 3, 0);
    FAIL() << "expected RankDeficientError";
  } catch (const RankDeficientError& e) {
    EXPECT_GT(e.condition_number(), 1e12);
  }
}

}  // namespace
}  // namespace fxdpd
