// SPDX-FileCopyrightText: © 2026 The fxdpd Authors
//
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <CLI11.hpp>
#include <cstdint>
#include <string>

namespace fxdpd::cli {

struct GenOptions {
  double bw = 20e6;
  double fs = 170e6;
  double rolloff = 0.22;
  double peak = 0.7;
  std::size_t symbols = 0;  // 0 = use --samples
  std::size_t samples = 172035;
  std::uint64_t seed = 1;
  std::string pa;
  std::string out;
  std::string summary;
};

struct TrainOptions {
  std::string data;
  std::string config = "full";
  std::string model_config;
  int precision = 0;
  std::string pa;
  std::string out_dir;
  std::int64_t seed = -1;  // -1 keeps the config's seed
  bool quiet = false;
};

struct EvalOptions {
  std::string data;
  std::string checkpoint;
  std::string path = "fixedpoint";
  std::string split = "test";
  std::string model_config;
  int precision = 0;
  std::string pa;
  std::string out_dir = ".";
};

struct CertifyOptions {
  std::string config;
  int iters = -1;
  int window = 0;
  int lut_bits = 0;
  std::uint64_t z_max = 0;
  std::string summary = "certify_invsqrt.json";
};

struct ExportOptions {
  std::string data;
  std::string checkpoint;
  std::size_t count = 1000;
  std::size_t offset = 0;
  std::string model_config;
  int precision = 0;
  std::string out;
  std::string summary;
};

int run_gen(const GenOptions& o);
int run_train(const TrainOptions& o);
int run_eval(const EvalOptions& o);
int run_certify(const CertifyOptions& o);
int run_export(const ExportOptions& o);

}  // namespace fxdpd::cli
