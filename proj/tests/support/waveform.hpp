// SPDX-FileCopyrightText: © 2026 The fxdpd Authors
//
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <vector>

#include "fxdpd/signal.hpp"

namespace fxdpd::testing {

// Waveform of `symbols` through the generator's pulse chain, unscaled.
std::vector<cd> synthesize(const SignalSpec& spec, const std::vector<cd>& symbols);

}  // namespace fxdpd::testing
