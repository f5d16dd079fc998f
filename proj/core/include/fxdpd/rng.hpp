// SPDX-FileCopyrightText: © 2026 The fxdpd Authors
//
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <random>

namespace fxdpd {

// Portable random source. std::mt19937_64's output sequence is fixed by the
// standard, but the <random> distributions are not, so the few distributions
// needed here are derived directly from the raw 64-bit stream.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }
  double uniform01();                       // [0, 1), 53-bit resolution
  double uniform(double lo, double hi);     // [lo, hi)
  std::uint64_t uniform_index(std::uint64_t n);  // [0, n), unbiased
  double normal();                          // standard normal, Box-Muller

 private:
  std::mt19937_64 engine_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace fxdpd
