// SPDX-FileCopyrightText: © 2026 The fxdpd Authors
//
// SPDX-License-Identifier: Apache-2.0

#include "common.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>

namespace fxdpd::cli {

namespace fs = std::filesystem;
using nlohmann::json;

json read_json_file(const fs::path& path) {
  std::ifstream is(path);
  if (!is) throw IoError("cannot open " + path.string());
  try {
    return json::parse(is);
  } catch (const json::exception& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
}

void write_json_file(const fs::path& path, const json& j) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream os(path);
  if (!os) throw IoError("cannot write " + path.string());
  os << j.dump(2) << '\n';
}

TrainConfig load_train_config(const std::string& name_or_path) {
  const auto names = TrainConfig::preset_names();
  if (std::find(names.begin(), names.end(), name_or_path) != names.end()) {
    return TrainConfig::preset(name_or_path);
  }
  if (!fs::exists(name_or_path)) {
    std::string list;
    for (const auto& n : names) list += (list.empty() ? "" : ", ") + n;
    throw UsageError("--config '" + name_or_path + "' is neither a preset (" + list +
                     ") nor a file");
  }
  try {
    return train_config_from_json(read_json_file(name_or_path));
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  } catch (const FormatError& e) {
    throw UsageError(e.what());
  }
}

ModelConfig load_model_config(const std::string& path, int precision_bits) {
  ModelConfig c;
  try {
    if (!path.empty()) c = model_config_from_json(read_json_file(path));
    if (precision_bits > 0) {
      c = ModelConfig::with_precision(precision_bits, c.memory_depth, c.hidden_size);
    }
    c.validate();
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
  return c;
}

PaChoice resolve_pa(const Dataset& ds, const std::string& pa_path) {
  PaChoice out;
  if (!pa_path.empty()) {
    out.coeffs = pa_coeffs_from_json(read_json_file(pa_path));
    out.source = "file:" + pa_path;
    return out;
  }
  if (ds.metadata.contains("pa")) {
    out.coeffs = pa_coeffs_from_json(ds.metadata.at("pa"));
    out.source = "dataset metadata";
    return out;
  }
  const auto x = ds.input_signal();
  const auto y = ds.output_signal();
  const PaFit fit = fit_pa(x, y, 7, 3);
  out.coeffs = fit.coeffs;
  out.source = "fit";
  out.fit_residual_db = fit.residual_nmse_db;
  return out;
}

std::optional<SignalSpec> dataset_signal_spec(const Dataset& ds) {
  if (!ds.metadata.contains("signal_spec")) return std::nullopt;
  const SignalSpec s = signal_spec_from_json(ds.metadata.at("signal_spec"));
  if (s.num_samples != ds.size()) return std::nullopt;
  return s;
}

void check_datapath(const Checkpoint& ck, const std::string& model_config_path,
                    int precision_bits) {
  if (model_config_path.empty() && precision_bits <= 0) return;
  const ModelConfig want = load_model_config(model_config_path, precision_bits);
  if (want.datapath_hash() != ck.model.datapath_hash()) {
    throw HashMismatchError("datapath hash mismatch: checkpoint " +
                            hex64(ck.model.datapath_hash()) + " (" +
                            ck.model.canonical_string() + "), requested " +
                            hex64(want.datapath_hash()) + " (" + want.canonical_string() + ")");
  }
}

std::string fmt_db(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

}  // namespace fxdpd::cli
