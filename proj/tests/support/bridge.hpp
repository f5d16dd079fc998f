// SPDX-FileCopyrightText: © 2026 The fxdpd Authors
//
// SPDX-License-Identifier: Apache-2.0

// Conversions from core types into the straight-line interpreter's inputs.

#pragma once

#include <span>
#include <utility>
#include <vector>

#include "fxdpd/model.hpp"
#include "oracle.hpp"

namespace fxdpd::testing {

oracle::InterpreterConfig interpreter_config(const ModelConfig& cfg);
oracle::InterpreterParams interpreter_params(const QuantizedParams& q);
std::vector<std::pair<std::int64_t, std::int64_t>> raw_pairs(std::span<const FxpComplex> x);

// Random masked network whose raw weights cover the whole Q1.13 range.
QuantizedParams random_quantized(const ModelConfig& cfg, std::uint64_t seed, double keep = 0.75);

}  // namespace fxdpd::testing
