// SPDX-FileCopyrightText: © 2026 The fxdpd Authors
//
// SPDX-License-Identifier: Apache-2.0

#include "fxdpd/metrics.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <memory>
#include <numbers>
#include <stdexcept>

#include "fxdpd/pa.hpp"

namespace fxdpd {

double to_db(double power_ratio) {
  if (!(power_ratio > 0.0)) return kDbFloor;
  return std::max(kDbFloor, 10.0 * std::log10(power_ratio));
}

std::string to_string(Window w) { return w == Window::kHann ? "hann" : "rectangular"; }

double PsdEstimate::band_power(double lo_hz, double hi_hz) const {
  double p = 0.0;
  for (std::size_t k = 0; k < freq_hz.size(); ++k) {
    if (freq_hz[k] >= lo_hz && freq_hz[k] <= hi_hz) p += density[k];
  }
  return p * bin_width_hz;
}

double PsdEstimate::total_power() const {
  double p = 0.0;
  for (double d : density) p += d;
  return p * bin_width_hz;
}

namespace {

struct FftwPlan {
  fftw_complex* buf = nullptr;
  fftw_plan plan = nullptr;
  explicit FftwPlan(int n) {
    buf = static_cast<fftw_complex*>(fftw_malloc(sizeof(fftw_complex) * static_cast<std::size_t>(n)));
    plan = fftw_plan_dft_1d(n, buf, buf, FFTW_FORWARD, FFTW_ESTIMATE);
  }
  ~FftwPlan() {
    fftw_destroy_plan(plan);
    fftw_free(buf);
  }
  FftwPlan(const FftwPlan&) = delete;
  FftwPlan& operator=(const FftwPlan&) = delete;
};

}  // namespace

PsdEstimate psd_welch(std::span<const cd> x, double sample_rate, int segment_len, int overlap,
                      Window window) {
  if (segment_len < 2 || static_cast<std::size_t>(segment_len) > x.size()) {
    throw std::invalid_argument("psd_welch: segment length must be in [2, signal length]");
  }
  if (overlap < 0 || overlap >= segment_len) {
    throw std::invalid_argument("psd_welch: overlap must be in [0, segment length)");
  }
  const auto n = static_cast<std::size_t>(segment_len);
  std::vector<double> w(n, 1.0);
  if (window == Window::kHann) {
    for (std::size_t i = 0; i < n; ++i) {
      w[i] = 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * static_cast<double>(i) / static_cast<double>(n));
    }
  }
  double wpow = 0.0;
  for (double v : w) wpow += v * v;

  const std::size_t step = n - static_cast<std::size_t>(overlap);
  const std::size_t segs = (x.size() - n) / step + 1;
  std::vector<double> acc(n, 0.0);
  FftwPlan fft(segment_len);
  for (std::size_t s = 0; s < segs; ++s) {
    const cd* src = x.data() + s * step;
    for (std::size_t i = 0; i < n; ++i) {
      fft.buf[i][0] = src[i].real() * w[i];
      fft.buf[i][1] = src[i].imag() * w[i];
    }
    fftw_execute(fft.plan);
    for (std::size_t i = 0; i < n; ++i) acc[i] += fft.buf[i][0] * fft.buf[i][0] + fft.buf[i][1] * fft.buf[i][1];
  }

  PsdEstimate est;
  est.segment_length = segment_len;
  est.overlap = overlap;
  est.segments = static_cast<int>(segs);
  est.window = window;
  est.bin_width_hz = sample_rate / static_cast<double>(n);
  est.freq_hz.resize(n);
  est.density.resize(n);
  const double norm = 1.0 / (static_cast<double>(segs) * sample_rate * wpow);
  const std::size_t half = n / 2;
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t src = (i + half) % n;  // fftshift
    const double k = static_cast<double>(src) - (src >= (n + 1) / 2 ? static_cast<double>(n) : 0.0);
    est.freq_hz[i] = k * est.bin_width_hz;
    est.density[i] = acc[src] * norm;
  }
  return est;
}

NmseResult nmse(std::span<const cd> y, std::span<const cd> ref) {
  if (y.size() != ref.size()) throw std::invalid_argument("nmse: length mismatch");
  double ref_pow = 0.0;
  double y_pow = 0.0;
  cd cross{};
  for (std::size_t i = 0; i < y.size(); ++i) {
    ref_pow += std::norm(ref[i]);
    y_pow += std::norm(y[i]);
    cross += std::conj(y[i]) * ref[i];
  }
  if (!(ref_pow > 0.0)) throw std::invalid_argument("nmse: reference has zero power");
  NmseResult r;
  r.gain = y_pow > 0.0 ? cross / y_pow : cd{};
  double err = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i) err += std::norm(r.gain * y[i] - ref[i]);
  r.db = to_db(err / ref_pow);
  return r;
}

AcprResult acpr(std::span<const cd> x, double sample_rate, double bandwidth, double channel_offset,
                int segment_len, int overlap) {
  const double off = channel_offset > 0.0 ? channel_offset : bandwidth;
  if (sample_rate < 2.0 * (off + bandwidth / 2.0)) {
    throw std::invalid_argument("acpr: adjacent channel extends beyond Nyquist");
  }
  const PsdEstimate psd = psd_welch(x, sample_rate, segment_len, overlap, Window::kHann);
  const double main = psd.band_power(-bandwidth / 2.0, bandwidth / 2.0);
  if (!(main > 0.0)) throw std::invalid_argument("acpr: no power in the main channel");
  const double lower = psd.band_power(-off - bandwidth / 2.0, -off + bandwidth / 2.0);
  const double upper = psd.band_power(off - bandwidth / 2.0, off + bandwidth / 2.0);
  return {to_db(lower / main), to_db(upper / main)};
}

EvmResult evm(std::span<const cd> y, std::size_t first_sample, std::span<const cd> symbols,
              const SignalSpec& spec) {
  const double fs = spec.sample_rate;
  const double period = 1.0 / spec.symbol_rate();
  const double half = spec.rrc_span * period;
  const double t_begin = static_cast<double>(first_sample) / fs;
  const double t_end = static_cast<double>(first_sample + y.size() - 1) / fs;

  std::vector<cd> rx;
  std::vector<cd> ref;
  for (std::size_t k = 0; k < symbols.size(); ++k) {
    const double tk = spec.symbol_time(k);
    if (tk - half < t_begin || tk + half > t_end) continue;
    const auto lo = static_cast<std::size_t>(std::ceil((tk - half) * fs)) - first_sample;
    const auto hi = static_cast<std::size_t>(std::floor((tk + half) * fs)) - first_sample;
    cd acc{};
    for (std::size_t i = lo; i <= hi; ++i) {
      const double t = static_cast<double>(i + first_sample) / fs;
      acc += y[i] * rrc_pulse(tk - t, period, spec.rolloff);
    }
    rx.push_back(acc);
    ref.push_back(symbols[k]);
  }
  if (rx.empty()) throw std::invalid_argument("evm: no complete symbol inside the buffer");

  double rx_pow = 0.0;
  double ref_pow = 0.0;
  cd cross{};
  for (std::size_t i = 0; i < rx.size(); ++i) {
    rx_pow += std::norm(rx[i]);
    ref_pow += std::norm(ref[i]);
    cross += std::conj(rx[i]) * ref[i];
  }
  EvmResult r;
  r.symbols_used = rx.size();
  r.gain = rx_pow > 0.0 ? cross / rx_pow : cd{};
  double err = 0.0;
  for (std::size_t i = 0; i < rx.size(); ++i) err += std::norm(r.gain * rx[i] - ref[i]);
  r.db = to_db(err / ref_pow);
  return r;
}

}  // namespace fxdpd
