// SPDX-FileCopyrightText: © 2026 The fxdpd Authors
//
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <complex>
#include <cstddef>
#include <cstdint>
#include <vector>

namespace fxdpd {

using cd = std::complex<double>;

struct SignalBuffer {
  std::vector<cd> samples;
  double sample_rate = 170e6;

  std::size_t size() const { return samples.size(); }
};

// Oversampled 64-QAM baseband description. The root-raised-cosine pulse
// confines the spectrum to +-bandwidth/2, so the symbol rate is
// bandwidth / (1 + rolloff).
struct SignalSpec {
  double sample_rate = 170e6;
  double bandwidth = 20e6;
  double rolloff = 0.22;
  std::size_t num_samples = 172035;
  int rrc_span = 32;            // pulse half-length in symbols
  double peak_amplitude = 0.7;  // peak |x| after scaling, below 1 - 2^-13
  std::uint64_t seed = 1;

  double symbol_rate() const { return bandwidth / (1.0 + rolloff); }
  double samples_per_symbol() const { return sample_rate / symbol_rate(); }
  // Symbol k is centred at this time (seconds) relative to sample 0; the
  // first rrc_span symbols lie before the buffer so it starts in steady state.
  double symbol_time(std::size_t k) const {
    return (static_cast<double>(k) - rrc_span) / symbol_rate();
  }
  std::size_t symbol_count() const;

  // Throws std::invalid_argument when the spec cannot be synthesised.
  void validate() const;
};

}  // namespace fxdpd
