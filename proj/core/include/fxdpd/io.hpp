// SPDX-FileCopyrightText: © 2026 The fxdpd Authors
//
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <nlohmann/json.hpp>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "fxdpd/fxp.hpp"
#include "fxdpd/metrics.hpp"
#include "fxdpd/model.hpp"
#include "fxdpd/pa.hpp"
#include "fxdpd/signal.hpp"
#include "fxdpd/train.hpp"

namespace fxdpd {

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class BadMagicError : public IoError {
 public:
  using IoError::IoError;
};

class VersionError : public IoError {
 public:
  VersionError(std::uint32_t found, std::uint32_t supported);
  std::uint32_t found() const { return found_; }

 private:
  std::uint32_t found_;
};

class TruncatedError : public IoError {
 public:
  TruncatedError(std::uint64_t offset, std::uint64_t needed);
  std::uint64_t offset() const { return offset_; }

 private:
  std::uint64_t offset_;
};

class FormatError : public IoError {
 public:
  using IoError::IoError;
};

// ---------------------------------------------------------------------------
// Dataset
//
// Binary layout, all integers little-endian:
//   magic "FXDPDSET" | u32 version | u64 count | f64 sample_rate |
//   u8 in_int, in_frac, in_bytes | u8 out_int, out_frac, out_bytes |
//   u64 train_end | u64 val_end | u32 meta_len | meta (JSON text) |
//   count x (I, Q) input raws | count x (I, Q) output raws
// Raws are signed two's complement, in_bytes / out_bytes wide.

inline constexpr std::uint32_t kDatasetVersion = 1;
inline constexpr FxpFormat kDatasetOutputFormat{4, 27};

struct Dataset {
  double sample_rate = 170e6;
  FxpFormat input_format = kQ1_13;
  FxpFormat output_format = kDatasetOutputFormat;
  std::vector<std::int64_t> input;   // interleaved I, Q
  std::vector<std::int64_t> output;  // interleaved I, Q
  DataSplit split;
  nlohmann::json metadata = nlohmann::json::object();

  std::size_t size() const { return input.size() / 2; }
  std::vector<cd> input_signal() const;
  std::vector<cd> output_signal() const;

  // Throws FormatError when lengths, formats or split boundaries disagree.
  void validate() const;

  friend bool operator==(const Dataset&, const Dataset&) = default;
};

struct QuantizeReport {
  std::vector<std::int64_t> raw;  // interleaved I, Q
  std::size_t saturated = 0;      // components clipped to the format range
};

QuantizeReport quantize_iq(std::span<const cd> x, FxpFormat fmt);

// Splits 60/20/20 and quantizes both buffers (nearest-even, saturating).
Dataset make_dataset(std::span<const cd> input, std::span<const cd> output, double sample_rate,
                     nlohmann::json metadata = nlohmann::json::object());

void write_dataset(std::ostream& os, const Dataset& ds);
void write_dataset(const std::filesystem::path& path, const Dataset& ds);
Dataset read_dataset(std::istream& is);
Dataset read_dataset(const std::filesystem::path& path);

// One "I,Q" pair of reals per line. Blank lines, lines starting with '#' and
// a leading non-numeric header line are skipped.
struct CsvImport {
  std::vector<cd> samples;
  std::size_t lines = 0;
};
CsvImport read_iq_csv(std::istream& is);
CsvImport read_iq_csv(const std::filesystem::path& path);

void write_iq_csv(std::ostream& os, std::span<const cd> x);
// "frequency_hz,psd_db" with the density in dB/Hz.
void write_psd_csv(std::ostream& os, const PsdEstimate& psd);
void write_history_csv(std::ostream& os, std::span<const EpochRecord> history);

// ---------------------------------------------------------------------------
// JSON encodings

nlohmann::json to_json(const ModelConfig& cfg);
ModelConfig model_config_from_json(const nlohmann::json& j);
nlohmann::json to_json(const TrainConfig& cfg);
TrainConfig train_config_from_json(const nlohmann::json& j, const TrainConfig& base = {});
nlohmann::json to_json(const SignalSpec& spec);
SignalSpec signal_spec_from_json(const nlohmann::json& j);
nlohmann::json to_json(const PaCoeffs& pa);
PaCoeffs pa_coeffs_from_json(const nlohmann::json& j);
nlohmann::json to_json(const InvSqrtConfig& cfg);
InvSqrtConfig invsqrt_config_from_json(const nlohmann::json& j, const InvSqrtConfig& base = {});

std::string hex64(std::uint64_t v);

// ---------------------------------------------------------------------------
// Checkpoint (JSON text)

inline constexpr int kCheckpointVersion = 1;

struct Checkpoint {
  ModelConfig model;
  ModelParams params;
  std::optional<TrainConfig> train;
  int round = 0;
  nlohmann::json metrics = nlohmann::json::object();
};

nlohmann::json checkpoint_to_json(const Checkpoint& ckpt);
// Throws FormatError on version mismatch, inconsistent shapes, a stale
// datapath hash, or quantized integers that do not regenerate from the
// master params under the recorded rounding mode.
Checkpoint checkpoint_from_json(const nlohmann::json& j);
void write_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt);
Checkpoint read_checkpoint(const std::filesystem::path& path);

// ---------------------------------------------------------------------------
// Hardware test vectors
//
// `//` comment header (formats, datapath and params hashes, sample count),
// then one line per input sample: "IIII QQQQ OOOOOOOO OOOOOOOO" with
// two's-complement fields of ceil(width/4) hex digits. Outputs are those of
// the fixed-point path fed the whole input stream from a cold start.

std::string hex_field(std::int64_t raw, int width);
std::string test_vector_header(const ModelConfig& cfg, const QuantizedParams& params,
                               std::size_t count);
void export_test_vectors(std::ostream& os, std::span<const FxpComplex> input,
                         const ModelConfig& cfg, const QuantizedParams& params);
void export_test_vectors(const std::filesystem::path& path, std::span<const FxpComplex> input,
                         const ModelConfig& cfg, const QuantizedParams& params);

// Dataset input samples [begin, begin + count) as activation-format values.
std::vector<FxpComplex> dataset_inputs(const Dataset& ds, std::size_t begin, std::size_t count);

}  // namespace fxdpd
