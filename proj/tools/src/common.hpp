// SPDX-FileCopyrightText: © 2026 The fxdpd Authors
//
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <filesystem>
#include <nlohmann/json.hpp>
#include <optional>
#include <stdexcept>
#include <string>

#include "fxdpd/io.hpp"
#include "fxdpd/model.hpp"
#include "fxdpd/pa.hpp"
#include "fxdpd/signal.hpp"
#include "fxdpd/train.hpp"

namespace fxdpd::cli {

// Exit codes.
inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;        // bad flags or configuration
inline constexpr int kExitCertifyFail = 2;  // certification ran and failed
inline constexpr int kExitHashMismatch = 3;
inline constexpr int kExitIo = 4;  // unreadable or malformed files
inline constexpr int kExitInternal = 5;

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class HashMismatchError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

nlohmann::json read_json_file(const std::filesystem::path& path);
void write_json_file(const std::filesystem::path& path, const nlohmann::json& j);

// A preset name or a JSON file (which may itself name a "preset").
TrainConfig load_train_config(const std::string& name_or_path);

// Model config from an optional JSON file, then an optional precision
// override (bits > 0 selects ModelConfig::with_precision keeping the shape).
ModelConfig load_model_config(const std::string& path, int precision_bits);

struct PaChoice {
  PaCoeffs coeffs;
  std::string source;  // "file:<path>", "dataset metadata" or "fit"
  std::optional<double> fit_residual_db;
};

// --pa file, else the coefficients recorded by `gen`, else a K=7, M=3
// least-squares fit to the dataset's input/output pair.
PaChoice resolve_pa(const Dataset& ds, const std::string& pa_path);

// Signal spec recorded by `gen`, when it reproduces the dataset length.
std::optional<SignalSpec> dataset_signal_spec(const Dataset& ds);

// Refuses when a datapath config was supplied and its hash differs from the
// checkpoint's.
void check_datapath(const Checkpoint& ck, const std::string& model_config_path,
                    int precision_bits);

std::string fmt_db(double v);

}  // namespace fxdpd::cli
