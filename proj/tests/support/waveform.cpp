// SPDX-FileCopyrightText: © 2026 The fxdpd Authors
//
// SPDX-License-Identifier: Apache-2.0

#include "waveform.hpp"

#include <algorithm>
#include <cmath>

#include "fxdpd/pa.hpp"

namespace fxdpd::testing {

std::vector<cd> synthesize(const SignalSpec& spec, const std::vector<cd>& symbols) {
  const double period = 1.0 / spec.symbol_rate();
  const double half = spec.rrc_span * period;
  std::vector<cd> x(spec.num_samples);
  for (std::size_t k = 0; k < symbols.size(); ++k) {
    const double tk = spec.symbol_time(k);
    const auto lo = static_cast<long>(std::ceil((tk - half) * spec.sample_rate));
    const auto hi = static_cast<long>(std::floor((tk + half) * spec.sample_rate));
    for (long i = std::max(0L, lo); i <= hi && i < static_cast<long>(x.size()); ++i) {
      x[static_cast<std::size_t>(i)] +=
          symbols[k] * rrc_pulse(static_cast<double>(i) / spec.sample_rate - tk, period, spec.rolloff);
    }
  }
  return x;
}

}  // namespace fxdpd::testing
