// SPDX-FileCopyrightText: © 2026 The fxdpd Authors
//
// SPDX-License-Identifier: Apache-2.0

#include "fxdpd/pa.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "fxdpd/rng.hpp"

namespace fxdpd {

std::size_t SignalSpec::symbol_count() const {
  const double duration_symbols = static_cast<double>(num_samples) / samples_per_symbol();
  return static_cast<std::size_t>(std::ceil(duration_symbols)) + 2 * rrc_span + 1;
}

void SignalSpec::validate() const {
  const auto fail = [](const std::string& msg) {
    throw std::invalid_argument("invalid signal spec: " + msg);
  };
  if (!(bandwidth > 0.0)) fail("bandwidth must be positive");
  if (!(sample_rate > bandwidth)) fail("sample_rate must exceed bandwidth");
  if (!(rolloff > 0.0 && rolloff <= 1.0)) fail("rolloff must be in (0, 1]");
  if (num_samples == 0) fail("num_samples must be positive");
  if (rrc_span < 1) fail("rrc_span must be at least 1");
  if (!(peak_amplitude > 0.0 && peak_amplitude <= 1.0 - 0x1.0p-13)) {
    fail("peak_amplitude must be in (0, 1 - 2^-13]");
  }
}

double rrc_pulse(double t, double symbol_period, double rolloff) {
  const double x = t / symbol_period;
  const double a = rolloff;
  const double pi = std::numbers::pi;
  if (std::abs(x) < 1e-12) return 1.0 - a + 4.0 * a / pi;
  if (std::abs(std::abs(x) - 1.0 / (4.0 * a)) < 1e-9) {
    return a / std::numbers::sqrt2 *
           ((1.0 + 2.0 / pi) * std::sin(pi / (4.0 * a)) + (1.0 - 2.0 / pi) * std::cos(pi / (4.0 * a)));
  }
  const double num = std::sin(pi * x * (1.0 - a)) + 4.0 * a * x * std::cos(pi * x * (1.0 + a));
  const double den = pi * x * (1.0 - (4.0 * a * x) * (4.0 * a * x));
  return num / den;
}

cd qam64_point(unsigned index) {
  const double norm = 1.0 / std::sqrt(42.0);
  const int i = static_cast<int>(index & 7u);
  const int q = static_cast<int>((index >> 3) & 7u);
  return {(2 * i - 7) * norm, (2 * q - 7) * norm};
}

Baseband gen_baseband(const SignalSpec& spec) {
  spec.validate();
  Baseband out;
  Rng rng(spec.seed);
  const std::size_t nsym = spec.symbol_count();
  out.symbols.resize(nsym);
  for (cd& s : out.symbols) s = qam64_point(static_cast<unsigned>(rng.uniform_index(64)));

  const std::size_t n = spec.num_samples;
  const double fs = spec.sample_rate;
  const double period = 1.0 / spec.symbol_rate();
  const double half = spec.rrc_span * period;
  std::vector<cd> x(n);
  for (std::size_t k = 0; k < nsym; ++k) {
    const double tk = spec.symbol_time(k);
    const double lo_t = std::max(0.0, std::ceil((tk - half) * fs));
    const double hi_t = std::min(static_cast<double>(n) - 1.0, std::floor((tk + half) * fs));
    if (hi_t < lo_t) continue;
    for (auto i = static_cast<std::size_t>(lo_t); i <= static_cast<std::size_t>(hi_t); ++i) {
      x[i] += out.symbols[k] * rrc_pulse(static_cast<double>(i) / fs - tk, period, spec.rolloff);
    }
  }
  double peak = 0.0;
  for (const cd& v : x) peak = std::max(peak, std::abs(v));
  out.scale = peak > 0.0 ? spec.peak_amplitude / peak : 1.0;
  for (cd& v : x) v *= out.scale;
  out.signal.samples = std::move(x);
  out.signal.sample_rate = fs;
  return out;
}

PaCoeffs::PaCoeffs(int order, int memory)
    : order_(order), memory_(memory) {
  if (order < 1 || order % 2 == 0) throw std::invalid_argument("PA order must be odd and >= 1");
  if (memory < 0) throw std::invalid_argument("PA memory depth must be >= 0");
  coeffs_.assign(static_cast<std::size_t>(num_orders() * (memory_ + 1)), cd{});
}

cd& PaCoeffs::at(int k, int m) {
  return coeffs_.at(static_cast<std::size_t>(((k - 1) / 2) * (memory_ + 1) + m));
}

cd PaCoeffs::at(int k, int m) const {
  return coeffs_.at(static_cast<std::size_t>(((k - 1) / 2) * (memory_ + 1) + m));
}

void PaCoeffs::validate() const {
  if (order_ < 1 || order_ % 2 == 0 || memory_ < 0 ||
      coeffs_.size() != static_cast<std::size_t>(num_orders() * (memory_ + 1))) {
    throw std::invalid_argument("malformed PA coefficient table");
  }
  if (at(1, 0) == cd{}) throw std::invalid_argument("PA linear gain a[1][0] must be nonzero");
}

PaCoeffs PaCoeffs::identity(int order, int memory) {
  PaCoeffs c(order, memory);
  c.at(1, 0) = 1.0;
  return c;
}

namespace {

// basis[t * nk + kk] = x_t |x_t|^(2kk)
void build_basis(std::span<const cd> x, int nk, std::vector<cd>& basis) {
  basis.resize(x.size() * static_cast<std::size_t>(nk));
  for (std::size_t t = 0; t < x.size(); ++t) {
    const double r2 = std::norm(x[t]);
    double p = 1.0;
    for (int kk = 0; kk < nk; ++kk) {
      basis[t * nk + kk] = x[t] * p;
      p *= r2;
    }
  }
}

}  // namespace

void pa_forward(std::span<const cd> x, std::span<cd> y, const PaCoeffs& coeffs) {
  if (x.size() != y.size()) throw std::invalid_argument("pa_forward: size mismatch");
  const int nk = coeffs.num_orders();
  const int nm = coeffs.memory() + 1;
  std::vector<cd> basis;
  build_basis(x, nk, basis);
  const std::vector<cd>& a = coeffs.flat();
  for (std::size_t t = 0; t < x.size(); ++t) {
    cd acc{};
    for (int m = 0; m < nm && static_cast<std::size_t>(m) <= t; ++m) {
      const cd* b = &basis[(t - m) * nk];
      for (int kk = 0; kk < nk; ++kk) acc += a[kk * nm + m] * b[kk];
    }
    y[t] = acc;
  }
}

SignalBuffer pa_forward(const SignalBuffer& x, const PaCoeffs& coeffs) {
  SignalBuffer y;
  y.sample_rate = x.sample_rate;
  y.samples.resize(x.size());
  pa_forward(x.samples, y.samples, coeffs);
  return y;
}

void pa_backward(std::span<const cd> x, std::span<const cd> grad_y, std::span<cd> grad_x,
                 const PaCoeffs& coeffs) {
  if (x.size() != grad_y.size() || x.size() != grad_x.size()) {
    throw std::invalid_argument("pa_backward: size mismatch");
  }
  const int nk = coeffs.num_orders();
  const int nm = coeffs.memory() + 1;
  const std::vector<cd>& a = coeffs.flat();
  const std::size_t n = x.size();
  for (std::size_t s = 0; s < n; ++s) {
    const double ur = x[s].real();
    const double ui = x[s].imag();
    const double r2 = ur * ur + ui * ui;
    double gr = 0.0;
    double gi = 0.0;
    double rho = 1.0;       // r^(k-1)
    double rho_prev = 0.0;  // r^(k-3), defined for k >= 3
    for (int kk = 0; kk < nk; ++kk) {
      const int k = 2 * kk + 1;
      // G = sum_m conj(g_{s+m}) a[k][m]
      cd g{};
      for (int m = 0; m < nm && s + m < n; ++m) g += std::conj(grad_y[s + m]) * a[kk * nm + m];
      const double dk = (k - 1) * rho_prev;
      const cd dphi_dr = cd(rho, 0.0) + x[s] * (dk * ur);
      const cd dphi_di = cd(0.0, rho) + x[s] * (dk * ui);
      gr += (g * dphi_dr).real();
      gi += (g * dphi_di).real();
      rho_prev = rho;
      rho *= r2;
    }
    grad_x[s] = {gr, gi};
  }
}

PaCoeffs default_pa() {
  PaCoeffs c(7, 3);
  using namespace std::complex_literals;
  c.at(1, 0) = 1.0;
  c.at(1, 1) = 0.08 - 0.04i;
  c.at(1, 2) = -0.02 + 0.012i;
  c.at(1, 3) = 0.005i;
  c.at(3, 0) = -0.6 - 0.9i;
  c.at(3, 1) = 0.12 - 0.08i;
  c.at(3, 2) = -0.05 + 0.03i;
  c.at(3, 3) = 0.012;
  c.at(5, 0) = 0.25 + 0.55i;
  c.at(5, 1) = -0.05 + 0.03i;
  c.at(5, 2) = 0.015;
  c.at(7, 0) = -0.08 - 0.15i;
  return c;
}

RankDeficientError::RankDeficientError(double condition_number)
    : std::runtime_error("memory-polynomial basis is rank deficient (condition number " +
                         std::to_string(condition_number) + ")"),
      condition_number_(condition_number) {}

PaFit fit_pa(std::span<const cd> x, std::span<const cd> y, int order, int memory) {
  if (x.size() != y.size()) throw std::invalid_argument("fit_pa: x and y lengths differ");
  PaCoeffs coeffs(order, memory);
  const int nk = coeffs.num_orders();
  const int nm = memory + 1;
  const auto ncols = static_cast<Eigen::Index>(nk * nm);
  const auto nrows = static_cast<Eigen::Index>(x.size());
  if (nrows < 4 * ncols) {
    throw std::invalid_argument("fit_pa: need at least " + std::to_string(4 * ncols) +
                                " samples for " + std::to_string(ncols) + " coefficients");
  }
  std::vector<cd> basis;
  build_basis(x, nk, basis);
  Eigen::MatrixXcd phi = Eigen::MatrixXcd::Zero(nrows, ncols);
  Eigen::VectorXcd rhs(nrows);
  for (Eigen::Index t = 0; t < nrows; ++t) {
    rhs(t) = y[static_cast<std::size_t>(t)];
    for (int m = 0; m < nm && m <= t; ++m) {
      for (int kk = 0; kk < nk; ++kk) {
        phi(t, kk * nm + m) = basis[static_cast<std::size_t>(t - m) * nk + kk];
      }
    }
  }
  // Column scaling keeps the condition number meaningful across orders.
  Eigen::VectorXd col_norm = phi.colwise().norm().transpose();
  for (Eigen::Index c = 0; c < ncols; ++c) {
    if (col_norm(c) == 0.0) throw RankDeficientError(std::numeric_limits<double>::infinity());
    phi.col(c) /= col_norm(c);
  }
  Eigen::BDCSVD<Eigen::MatrixXcd> svd(phi, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const Eigen::VectorXd& sv = svd.singularValues();
  const double cond = sv(0) / sv(sv.size() - 1);
  if (!std::isfinite(cond) || cond > 1e12) throw RankDeficientError(cond);
  Eigen::VectorXcd sol = svd.solve(rhs);
  for (Eigen::Index c = 0; c < ncols; ++c) coeffs.flat()[static_cast<std::size_t>(c)] = sol(c) / col_norm(c);

  const Eigen::VectorXcd resid = rhs - phi * sol;
  const double den = rhs.squaredNorm();
  PaFit fit;
  fit.coeffs = std::move(coeffs);
  fit.condition_number = cond;
  fit.residual_nmse_db = den > 0.0 ? 10.0 * std::log10(std::max(resid.squaredNorm() / den, 1e-20))
                                   : 0.0;
  return fit;
}

}  // namespace fxdpd
