// SPDX-FileCopyrightText: © 2026 The fxdpd Authors
//
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <span>
#include <string>
#include <vector>

#include "fxdpd/signal.hpp"

namespace fxdpd {

// Every dB figure reported by this module is floored here so results stay
// finite and serializable.
inline constexpr double kDbFloor = -200.0;

double to_db(double power_ratio);

enum class Window { kHann, kRectangular };
std::string to_string(Window w);

struct PsdEstimate {
  std::vector<double> freq_hz;  // ascending, -fs/2 .. fs/2 - df
  std::vector<double> density;  // linear power per Hz
  double bin_width_hz = 0.0;
  int segment_length = 0;
  int overlap = 0;
  int segments = 0;
  Window window = Window::kHann;

  // Integrated power over bins whose centre lies in [lo_hz, hi_hz].
  double band_power(double lo_hz, double hi_hz) const;
  double total_power() const;
};

// Averaged modified periodograms. Throws std::invalid_argument when
// segment_len exceeds the signal length or overlap >= segment_len.
PsdEstimate psd_welch(std::span<const cd> x, double sample_rate, int segment_len = 4096,
                      int overlap = 2048, Window window = Window::kHann);

struct NmseResult {
  double db = 0.0;
  cd gain{1.0, 0.0};  // least-squares complex gain applied to y before the ratio
};

// 10 log10(sum |g y - ref|^2 / sum |ref|^2) with g the least-squares gain.
// Throws std::invalid_argument on length mismatch or zero reference power.
NmseResult nmse(std::span<const cd> y, std::span<const cd> ref);

struct AcprResult {
  double lower_dbc = 0.0;
  double upper_dbc = 0.0;
  double worst() const { return lower_dbc > upper_dbc ? lower_dbc : upper_dbc; }
  double mean() const { return 0.5 * (lower_dbc + upper_dbc); }
};

// Adjacent-channel power ratio from a Welch PSD. channel_offset <= 0 means
// "equal to bandwidth". Throws std::invalid_argument when the adjacent
// channels extend past Nyquist.
AcprResult acpr(std::span<const cd> x, double sample_rate, double bandwidth,
                double channel_offset = 0.0, int segment_len = 4096, int overlap = 2048);

struct EvmResult {
  double db = 0.0;
  cd gain{1.0, 0.0};
  std::size_t symbols_used = 0;
};

// Matched-filters y (which holds samples [first_sample, first_sample + size)
// of the waveform described by spec) at the known symbol instants, aligns the
// result to `symbols` with a least-squares complex gain and returns the rms
// error-vector ratio in dB. Only symbols whose whole pulse support lies inside
// y are used. Throws std::invalid_argument if no symbol qualifies.
EvmResult evm(std::span<const cd> y, std::size_t first_sample, std::span<const cd> symbols,
              const SignalSpec& spec);

}  // namespace fxdpd
