// SPDX-FileCopyrightText: © 2026 The fxdpd Authors
//
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <span>
#include <stdexcept>
#include <vector>

#include "fxdpd/signal.hpp"

namespace fxdpd {

struct Baseband {
  SignalBuffer signal;
  std::vector<cd> symbols;  // unit average power constellation points
  double scale = 1.0;       // waveform = scale * sum_k symbols[k] * rrc(t - t_k)
};

// Random 64-QAM symbols shaped by a root-raised-cosine pulse, synthesised
// directly at the (possibly fractional) oversampling ratio and scaled so the
// peak magnitude equals spec.peak_amplitude.
Baseband gen_baseband(const SignalSpec& spec);

// Unit-energy-at-zero RRC impulse response, t in seconds.
double rrc_pulse(double t, double symbol_period, double rolloff);

// 64-QAM constellation point for a 6-bit index, unit average power.
cd qam64_point(unsigned index);

// Memory polynomial y_t = sum_k sum_m a[k][m] x_{t-m} |x_{t-m}|^(k-1) over odd
// orders k = 1..order and taps m = 0..memory.
class PaCoeffs {
 public:
  PaCoeffs() = default;
  PaCoeffs(int order, int memory);

  int order() const { return order_; }
  int memory() const { return memory_; }
  int num_orders() const { return (order_ + 1) / 2; }

  cd& at(int k, int m);
  cd at(int k, int m) const;
  const std::vector<cd>& flat() const { return coeffs_; }
  std::vector<cd>& flat() { return coeffs_; }

  // Throws std::invalid_argument for a[1][0] == 0 or malformed dimensions.
  void validate() const;

  static PaCoeffs identity(int order = 7, int memory = 3);

 private:
  int order_ = 1;
  int memory_ = 0;
  std::vector<cd> coeffs_;  // [(k-1)/2][m]
};

void pa_forward(std::span<const cd> x, std::span<cd> y, const PaCoeffs& coeffs);
SignalBuffer pa_forward(const SignalBuffer& x, const PaCoeffs& coeffs);

// Adjoint of pa_forward: given dL/dRe(y) + j dL/dIm(y) per sample, returns
// dL/dRe(x) + j dL/dIm(x).
void pa_backward(std::span<const cd> x, std::span<const cd> grad_y, std::span<cd> grad_x,
                 const PaCoeffs& coeffs);

// Built-in K=7, M=3 stand-in for a compressive GaN amplifier with strong
// AM/PM and memory.
PaCoeffs default_pa();

class RankDeficientError : public std::runtime_error {
 public:
  explicit RankDeficientError(double condition_number);
  double condition_number() const { return condition_number_; }

 private:
  double condition_number_;
};

struct PaFit {
  PaCoeffs coeffs;
  double residual_nmse_db = 0.0;
  double condition_number = 0.0;
};

// Least-squares memory-polynomial fit. Throws std::invalid_argument on length
// mismatch or too few samples, RankDeficientError when the basis is
// numerically singular.
PaFit fit_pa(std::span<const cd> x, std::span<const cd> y, int order, int memory);

}  // namespace fxdpd
