// SPDX-FileCopyrightText: © 2026 The fxdpd Authors
//
// SPDX-License-Identifier: Apache-2.0

#include "fxdpd/io.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstring>
#include <fstream>
#include <initializer_list>
#include <iomanip>
#include <sstream>
#include <string_view>

namespace fxdpd {

using nlohmann::json;

VersionError::VersionError(std::uint32_t found, std::uint32_t supported)
    : IoError("unsupported format version " + std::to_string(found) + " (supported: " +
              std::to_string(supported) + ")"),
      found_(found) {}

TruncatedError::TruncatedError(std::uint64_t offset, std::uint64_t needed)
    : IoError("truncated file: needed " + std::to_string(needed) + " more bytes at offset " +
              std::to_string(offset)),
      offset_(offset) {}

namespace {

constexpr std::array<char, 8> kMagic = {'F', 'X', 'D', 'P', 'D', 'S', 'E', 'T'};

int bytes_for(FxpFormat f) {
  if (f.width() <= 8) return 1;
  if (f.width() <= 16) return 2;
  if (f.width() <= 32) return 4;
  return 8;
}

class Writer {
 public:
  explicit Writer(std::ostream& os) : os_(os) {}
  void bytes(const void* p, std::size_t n) { os_.write(static_cast<const char*>(p), static_cast<std::streamsize>(n)); }
  void uint(std::uint64_t v, int n) {
    char b[8];
    for (int i = 0; i < n; ++i) b[i] = static_cast<char>((v >> (8 * i)) & 0xff);
    bytes(b, static_cast<std::size_t>(n));
  }
  void f64(double d) {
    std::uint64_t v;
    std::memcpy(&v, &d, sizeof v);
    uint(v, 8);
  }

 private:
  std::ostream& os_;
};

class Reader {
 public:
  explicit Reader(std::istream& is) : is_(is) {}
  void bytes(void* p, std::size_t n) {
    is_.read(static_cast<char*>(p), static_cast<std::streamsize>(n));
    const auto got = static_cast<std::uint64_t>(is_.gcount());
    if (got != n) throw TruncatedError(offset_ + got, n - got);
    offset_ += n;
  }
  std::uint64_t uint(int n) {
    unsigned char b[8];
    bytes(b, static_cast<std::size_t>(n));
    std::uint64_t v = 0;
    for (int i = 0; i < n; ++i) v |= static_cast<std::uint64_t>(b[i]) << (8 * i);
    return v;
  }
  std::int64_t sint(int n) {
    const std::uint64_t v = uint(n);
    if (n == 8) return static_cast<std::int64_t>(v);
    const std::uint64_t sign = std::uint64_t{1} << (8 * n - 1);
    return static_cast<std::int64_t>((v ^ sign) - sign);
  }
  double f64() {
    const std::uint64_t v = uint(8);
    double d;
    std::memcpy(&d, &v, sizeof d);
    return d;
  }
  std::uint64_t offset() const { return offset_; }

 private:
  std::istream& is_;
  std::uint64_t offset_ = 0;
};

std::vector<cd> to_signal(const std::vector<std::int64_t>& raw, FxpFormat f) {
  std::vector<cd> x(raw.size() / 2);
  for (std::size_t i = 0; i < x.size(); ++i) {
    x[i] = {FxpValue{raw[2 * i], f}.to_real(), FxpValue{raw[2 * i + 1], f}.to_real()};
  }
  return x;
}

FxpFormat read_format(Reader& r, int& bytes) {
  FxpFormat f;
  f.int_bits = static_cast<int>(r.uint(1));
  f.frac_bits = static_cast<int>(r.uint(1));
  bytes = static_cast<int>(r.uint(1));
  if (!f.valid()) throw FormatError("dataset declares an invalid fixed-point format");
  if (bytes != bytes_for(f)) throw FormatError("dataset element size does not match its format");
  return f;
}

std::ofstream open_out(const std::filesystem::path& path, bool binary) {
  std::ofstream os(path, binary ? std::ios::binary : std::ios::out);
  if (!os) throw IoError("cannot open '" + path.string() + "' for writing");
  return os;
}

std::ifstream open_in(const std::filesystem::path& path, bool binary) {
  std::ifstream is(path, binary ? std::ios::binary : std::ios::in);
  if (!is) throw IoError("cannot open '" + path.string() + "' for reading");
  return is;
}

}  // namespace

// ---------------------------------------------------------------------------

std::vector<cd> Dataset::input_signal() const { return to_signal(input, input_format); }
std::vector<cd> Dataset::output_signal() const { return to_signal(output, output_format); }

void Dataset::validate() const {
  if (!input_format.valid() || !output_format.valid()) throw FormatError("invalid sample format");
  if (input.size() % 2 != 0 || output.size() != input.size()) {
    throw FormatError("input and output buffers must hold the same number of I/Q pairs");
  }
  if (split.train_end > split.val_end || split.val_end > size()) {
    throw FormatError("split boundaries out of range");
  }
  if (!(sample_rate > 0.0)) throw FormatError("sample rate must be positive");
  const auto check = [](const std::vector<std::int64_t>& v, FxpFormat f) {
    for (auto r : v) {
      if (r < f.min_raw() || r > f.max_raw()) throw FormatError("sample outside its format range");
    }
  };
  check(input, input_format);
  check(output, output_format);
}

QuantizeReport quantize_iq(std::span<const cd> x, FxpFormat fmt) {
  QuantizeReport rep;
  rep.raw.reserve(2 * x.size());
  for (const cd& v : x) {
    for (double c : {v.real(), v.imag()}) {
      const Quantized q = quantize(c, fmt, Rounding::kNearestEven);
      rep.raw.push_back(q.value.raw);
      rep.saturated += q.saturated ? 1 : 0;
    }
  }
  return rep;
}

Dataset make_dataset(std::span<const cd> input, std::span<const cd> output, double sample_rate,
                     json metadata) {
  if (input.size() != output.size()) throw std::invalid_argument("input/output length mismatch");
  Dataset ds;
  ds.sample_rate = sample_rate;
  const QuantizeReport in = quantize_iq(input, ds.input_format);
  const QuantizeReport out = quantize_iq(output, ds.output_format);
  ds.input = in.raw;
  ds.output = out.raw;
  ds.split = split_60_20_20(input.size());
  metadata["input_saturated"] = in.saturated;
  metadata["output_saturated"] = out.saturated;
  ds.metadata = std::move(metadata);
  return ds;
}

void write_dataset(std::ostream& os, const Dataset& ds) {
  ds.validate();
  Writer w(os);
  w.bytes(kMagic.data(), kMagic.size());
  w.uint(kDatasetVersion, 4);
  w.uint(ds.size(), 8);
  w.f64(ds.sample_rate);
  const int ib = bytes_for(ds.input_format);
  const int ob = bytes_for(ds.output_format);
  w.uint(static_cast<std::uint64_t>(ds.input_format.int_bits), 1);
  w.uint(static_cast<std::uint64_t>(ds.input_format.frac_bits), 1);
  w.uint(static_cast<std::uint64_t>(ib), 1);
  w.uint(static_cast<std::uint64_t>(ds.output_format.int_bits), 1);
  w.uint(static_cast<std::uint64_t>(ds.output_format.frac_bits), 1);
  w.uint(static_cast<std::uint64_t>(ob), 1);
  w.uint(ds.split.train_end, 8);
  w.uint(ds.split.val_end, 8);
  const std::string meta = ds.metadata.dump();
  w.uint(meta.size(), 4);
  w.bytes(meta.data(), meta.size());
  for (auto v : ds.input) w.uint(static_cast<std::uint64_t>(v), ib);
  for (auto v : ds.output) w.uint(static_cast<std::uint64_t>(v), ob);
  if (!os) throw IoError("write failed");
}

void write_dataset(const std::filesystem::path& path, const Dataset& ds) {
  std::ofstream os = open_out(path, true);
  write_dataset(os, ds);
}

Dataset read_dataset(std::istream& is) {
  Reader r(is);
  std::array<char, 8> magic{};
  r.bytes(magic.data(), magic.size());
  if (magic != kMagic) throw BadMagicError("not a dataset file (bad magic)");
  const auto version = static_cast<std::uint32_t>(r.uint(4));
  if (version != kDatasetVersion) throw VersionError(version, kDatasetVersion);
  Dataset ds;
  const std::uint64_t count = r.uint(8);
  ds.sample_rate = r.f64();
  int ib = 0;
  int ob = 0;
  ds.input_format = read_format(r, ib);
  ds.output_format = read_format(r, ob);
  ds.split.train_end = r.uint(8);
  ds.split.val_end = r.uint(8);
  const std::uint64_t meta_len = r.uint(4);
  std::string meta(meta_len, '\0');
  r.bytes(meta.data(), meta.size());
  try {
    ds.metadata = json::parse(meta);
  } catch (const json::exception& e) {
    throw FormatError(std::string("dataset metadata is not valid JSON: ") + e.what());
  }
  ds.input.resize(2 * count);
  for (auto& v : ds.input) v = r.sint(ib);
  ds.output.resize(2 * count);
  for (auto& v : ds.output) v = r.sint(ob);
  ds.validate();
  return ds;
}

Dataset read_dataset(const std::filesystem::path& path) {
  std::ifstream is = open_in(path, true);
  return read_dataset(is);
}

CsvImport read_iq_csv(std::istream& is) {
  CsvImport out;
  std::string line;
  std::size_t lineno = 0;
  bool first_data = true;
  while (std::getline(is, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const auto begin = line.find_first_not_of(" \t");
    if (begin == std::string::npos || line[begin] == '#') continue;
    const auto comma = line.find(',');
    double vi = 0.0;
    double vq = 0.0;
    bool ok = comma != std::string::npos;
    if (ok) {
      std::istringstream si(line.substr(0, comma));
      std::istringstream sq(line.substr(comma + 1));
      ok = static_cast<bool>(si >> vi) && static_cast<bool>(sq >> vq);
      std::string rest;
      if (ok && (si >> rest || sq >> rest)) ok = false;
    }
    if (!ok) {
      if (first_data) {
        first_data = false;
        continue;
      }
      throw FormatError("CSV line " + std::to_string(lineno) + ": expected \"I,Q\"");
    }
    if (!std::isfinite(vi) || !std::isfinite(vq)) {
      throw FormatError("CSV line " + std::to_string(lineno) + ": non-finite sample");
    }
    first_data = false;
    out.samples.emplace_back(vi, vq);
    ++out.lines;
  }
  return out;
}

CsvImport read_iq_csv(const std::filesystem::path& path) {
  std::ifstream is = open_in(path, false);
  return read_iq_csv(is);
}

void write_iq_csv(std::ostream& os, std::span<const cd> x) {
  os << "I,Q\n" << std::setprecision(17);
  for (const cd& v : x) os << v.real() << ',' << v.imag() << '\n';
}

void write_psd_csv(std::ostream& os, const PsdEstimate& psd) {
  os << "frequency_hz,psd_db\n" << std::setprecision(10);
  for (std::size_t k = 0; k < psd.freq_hz.size(); ++k) {
    os << psd.freq_hz[k] << ',' << to_db(psd.density[k]) << '\n';
  }
}

void write_history_csv(std::ostream& os, std::span<const EpochRecord> history) {
  os << "epoch,round,lr,train_nmse_db,val_nmse_db,sparsity\n" << std::setprecision(10);
  for (const EpochRecord& r : history) {
    os << r.epoch << ',' << r.round << ',' << r.lr << ',' << r.train_nmse_db << ','
       << r.val_nmse_db << ',' << r.sparsity << '\n';
  }
}

// ---------------------------------------------------------------------------
// JSON

std::string hex64(std::uint64_t v) {
  std::ostringstream os;
  os << "0x" << std::hex << std::setw(16) << std::setfill('0') << v;
  return os.str();
}

namespace {

template <class T>
void get_opt(const json& j, const char* key, T& out) {
  if (j.contains(key)) out = j.at(key).get<T>();
}

// Config files are echoed in full; a key the reader does not know is a typo.
void check_keys(const json& j, std::initializer_list<std::string_view> known, const char* what) {
  if (!j.is_object()) throw FormatError(std::string(what) + ": expected a JSON object");
  for (const auto& item : j.items()) {
    if (std::find(known.begin(), known.end(), item.key()) == known.end()) {
      throw FormatError(std::string(what) + ": unknown key '" + item.key() + "'");
    }
  }
}

FxpFormat format_opt(const json& j, const char* key, FxpFormat def) {
  return j.contains(key) ? FxpFormat::parse(j.at(key).get<std::string>()) : def;
}

json matrix_json(const RealMatrix& m) {
  json rows = json::array();
  for (int r = 0; r < m.rows(); ++r) rows.push_back(std::vector<double>(m.row(r).begin(), m.row(r).end()));
  return rows;
}

template <class T>
json int_matrix_json(const Matrix<T>& m) {
  json rows = json::array();
  for (int r = 0; r < m.rows(); ++r) {
    std::vector<std::int64_t> v;
    for (auto x : m.row(r)) v.push_back(static_cast<std::int64_t>(x));
    rows.push_back(v);
  }
  return rows;
}

template <class T>
Matrix<T> matrix_from_json(const json& j, const char* what) {
  if (!j.is_array() || j.empty()) throw FormatError(std::string(what) + ": expected a non-empty matrix");
  const auto rows = static_cast<int>(j.size());
  const auto cols = static_cast<int>(j.at(0).size());
  Matrix<T> m(rows, cols);
  for (int r = 0; r < rows; ++r) {
    const json& row = j.at(static_cast<std::size_t>(r));
    if (!row.is_array() || static_cast<int>(row.size()) != cols) {
      throw FormatError(std::string(what) + ": ragged matrix");
    }
    for (int c = 0; c < cols; ++c) m(r, c) = row.at(static_cast<std::size_t>(c)).get<T>();
  }
  return m;
}

}  // namespace

json to_json(const InvSqrtConfig& c) {
  return {{"window_bits", c.window_bits},   {"lut_addr_bits", c.lut_addr_bits},
          {"seed_frac_bits", c.seed_frac_bits}, {"iter_count", c.iter_count},
          {"input_bits", c.input_bits},     {"input_frac_bits", c.input_frac_bits}};
}

InvSqrtConfig invsqrt_config_from_json(const json& j, const InvSqrtConfig& base) {
  check_keys(j, {"window_bits", "lut_addr_bits", "seed_frac_bits", "iter_count", "input_bits",
                 "input_frac_bits"},
             "invsqrt config");
  InvSqrtConfig c = base;
  get_opt(j, "window_bits", c.window_bits);
  get_opt(j, "lut_addr_bits", c.lut_addr_bits);
  get_opt(j, "seed_frac_bits", c.seed_frac_bits);
  get_opt(j, "iter_count", c.iter_count);
  get_opt(j, "input_bits", c.input_bits);
  get_opt(j, "input_frac_bits", c.input_frac_bits);
  return c;
}

json to_json(const ModelConfig& c) {
  return {{"memory_depth", c.memory_depth},
          {"hidden_size", c.hidden_size},
          {"act_format", c.act_format.to_string()},
          {"weight_format", c.weight_format.to_string()},
          {"accum_format", c.accum_format.to_string()},
          {"out_format", c.out_format.to_string()},
          {"weight_rounding", std::string(to_string(c.weight_rounding))},
          {"datapath_rounding", std::string(to_string(c.datapath_rounding))},
          {"invsqrt", to_json(c.invsqrt)},
          {"multiplier", {c.multiplier.wide_port, c.multiplier.narrow_port}}};
}

ModelConfig model_config_from_json(const json& j) {
  check_keys(j, {"precision_bits", "memory_depth", "hidden_size", "act_format", "weight_format",
                 "accum_format", "out_format", "weight_rounding", "datapath_rounding", "invsqrt",
                 "multiplier"},
             "model config");
  ModelConfig c;
  if (j.contains("precision_bits")) {
    c = ModelConfig::with_precision(j.at("precision_bits").get<int>());
  }
  get_opt(j, "memory_depth", c.memory_depth);
  get_opt(j, "hidden_size", c.hidden_size);
  c.act_format = format_opt(j, "act_format", c.act_format);
  c.weight_format = format_opt(j, "weight_format", c.weight_format);
  c.accum_format = format_opt(j, "accum_format", c.accum_format);
  c.out_format = format_opt(j, "out_format", c.out_format);
  if (j.contains("weight_rounding")) {
    c.weight_rounding = parse_rounding(j.at("weight_rounding").get<std::string>());
  }
  if (j.contains("datapath_rounding")) {
    c.datapath_rounding = parse_rounding(j.at("datapath_rounding").get<std::string>());
  }
  if (j.contains("invsqrt")) c.invsqrt = invsqrt_config_from_json(j.at("invsqrt"), c.invsqrt);
  if (j.contains("multiplier")) {
    const auto m = j.at("multiplier").get<std::vector<int>>();
    if (m.size() != 2) throw FormatError("multiplier must be [wide, narrow]");
    c.multiplier = {m[0], m[1]};
  }
  c.validate();
  return c;
}

json to_json(const TrainConfig& c) {
  return {{"initial_lr", c.initial_lr},
          {"min_lr", c.min_lr},
          {"lr_factor", c.lr_factor},
          {"patience", c.patience},
          {"plateau_threshold", c.plateau_threshold},
          {"batch_size", c.batch_size},
          {"frame_length", c.frame_length},
          {"stride", c.stride},
          {"warmup_epochs", c.warmup_epochs},
          {"epochs_per_prune", c.epochs_per_prune},
          {"prune_rounds", c.prune_rounds},
          {"prune_fraction", c.prune_fraction},
          {"frames_per_epoch", c.frames_per_epoch},
          {"seed", c.seed},
          {"qat", c.qat},
          {"feature_source", to_string(c.feature_source)},
          {"init", to_string(c.init)},
          {"init_std", c.init_std},
          {"optimizer", {{"name", "adam"}, {"beta1", c.adam_beta1}, {"beta2", c.adam_beta2}, {"eps", c.adam_eps}}},
          {"loss", "mse of PA(DPD(x)) against a[1][0]*x, frozen PA model"}};
}

TrainConfig train_config_from_json(const json& j, const TrainConfig& base) {
  check_keys(j, {"preset", "initial_lr", "min_lr", "lr_factor", "patience", "plateau_threshold",
                 "batch_size", "frame_length", "stride", "warmup_epochs", "epochs_per_prune",
                 "prune_rounds", "prune_fraction", "frames_per_epoch", "seed", "qat", "init_std",
                 "feature_source", "init", "optimizer", "loss"},
             "train config");
  TrainConfig c = base;
  if (j.contains("preset")) c = TrainConfig::preset(j.at("preset").get<std::string>());
  get_opt(j, "initial_lr", c.initial_lr);
  get_opt(j, "min_lr", c.min_lr);
  get_opt(j, "lr_factor", c.lr_factor);
  get_opt(j, "patience", c.patience);
  get_opt(j, "plateau_threshold", c.plateau_threshold);
  get_opt(j, "batch_size", c.batch_size);
  get_opt(j, "frame_length", c.frame_length);
  get_opt(j, "stride", c.stride);
  get_opt(j, "warmup_epochs", c.warmup_epochs);
  get_opt(j, "epochs_per_prune", c.epochs_per_prune);
  get_opt(j, "prune_rounds", c.prune_rounds);
  get_opt(j, "prune_fraction", c.prune_fraction);
  get_opt(j, "frames_per_epoch", c.frames_per_epoch);
  get_opt(j, "seed", c.seed);
  get_opt(j, "qat", c.qat);
  get_opt(j, "init_std", c.init_std);
  if (j.contains("feature_source")) {
    c.feature_source = parse_feature_source(j.at("feature_source").get<std::string>());
  }
  if (j.contains("init")) c.init = parse_init_scheme(j.at("init").get<std::string>());
  if (j.contains("optimizer")) {
    const json& o = j.at("optimizer");
    check_keys(o, {"name", "beta1", "beta2", "eps"}, "optimizer");
    if (o.value("name", std::string("adam")) != "adam") {
      throw FormatError("only the adam optimizer is supported");
    }
    get_opt(o, "beta1", c.adam_beta1);
    get_opt(o, "beta2", c.adam_beta2);
    get_opt(o, "eps", c.adam_eps);
  }
  c.validate();
  return c;
}

json to_json(const SignalSpec& s) {
  return {{"sample_rate", s.sample_rate}, {"bandwidth", s.bandwidth},
          {"rolloff", s.rolloff},         {"num_samples", s.num_samples},
          {"rrc_span", s.rrc_span},       {"peak_amplitude", s.peak_amplitude},
          {"seed", s.seed},               {"modulation", "64-QAM"}};
}

SignalSpec signal_spec_from_json(const json& j) {
  check_keys(j, {"sample_rate", "bandwidth", "rolloff", "num_samples", "rrc_span", "peak_amplitude",
                 "seed", "modulation"},
             "signal spec");
  if (j.value("modulation", std::string("64-QAM")) != "64-QAM") {
    throw FormatError("only 64-QAM is supported");
  }
  SignalSpec s;
  get_opt(j, "sample_rate", s.sample_rate);
  get_opt(j, "bandwidth", s.bandwidth);
  get_opt(j, "rolloff", s.rolloff);
  get_opt(j, "num_samples", s.num_samples);
  get_opt(j, "rrc_span", s.rrc_span);
  get_opt(j, "peak_amplitude", s.peak_amplitude);
  get_opt(j, "seed", s.seed);
  s.validate();
  return s;
}

json to_json(const PaCoeffs& pa) {
  json terms = json::array();
  for (int k = 1; k <= pa.order(); k += 2) {
    for (int m = 0; m <= pa.memory(); ++m) {
      const cd a = pa.at(k, m);
      terms.push_back({{"k", k}, {"m", m}, {"re", a.real()}, {"im", a.imag()}});
    }
  }
  return {{"order", pa.order()}, {"memory", pa.memory()}, {"coeffs", terms}};
}

PaCoeffs pa_coeffs_from_json(const json& j) {
  PaCoeffs pa(j.at("order").get<int>(), j.at("memory").get<int>());
  for (const json& t : j.at("coeffs")) {
    const int k = t.at("k").get<int>();
    const int m = t.at("m").get<int>();
    if (k < 1 || k > pa.order() || k % 2 == 0 || m < 0 || m > pa.memory()) {
      throw FormatError("PA coefficient index out of range");
    }
    pa.at(k, m) = {t.at("re").get<double>(), t.at("im").get<double>()};
  }
  pa.validate();
  return pa;
}

// ---------------------------------------------------------------------------
// Checkpoints

json checkpoint_to_json(const Checkpoint& ck) {
  ck.model.validate();
  ck.params.check_shape(ck.model);
  const QuantizedParams q = quantize_params(ck.params, ck.model);
  json j;
  j["format"] = "fxdpd-checkpoint";
  j["version"] = kCheckpointVersion;
  j["model_config"] = to_json(ck.model);
  j["datapath_hash"] = hex64(ck.model.datapath_hash());
  j["round"] = ck.round;
  j["params"] = {{"w_fc", matrix_json(ck.params.w_fc)},
                 {"b_fc", ck.params.b_fc},
                 {"w_out", matrix_json(ck.params.w_out)},
                 {"b_out", ck.params.b_out}};
  j["masks"] = {{"fc", int_matrix_json(ck.params.mask_fc)}, {"out", int_matrix_json(ck.params.mask_out)}};
  j["quantized"] = {{"format", q.format.to_string()},
                    {"rounding", std::string(to_string(ck.model.weight_rounding))},
                    {"params_hash", hex64(params_hash(q))},
                    {"w_fc", int_matrix_json(q.w_fc)},
                    {"b_fc", q.b_fc},
                    {"w_out", int_matrix_json(q.w_out)},
                    {"b_out", q.b_out}};
  const ParamOpsReport ops = count_params_ops(ck.params, ck.model);
  j["report"] = {{"active_weights", ops.active_weights},
                 {"total_weights", ops.total_weights},
                 {"biases", ops.biases},
                 {"param_count", ops.param_count},
                 {"sparsity", ops.sparsity},
                 {"ops_per_sample", ops.ops_per_sample},
                 {"network_ops", ops.network_ops}};
  if (ck.train) j["train_config"] = to_json(*ck.train);
  j["metrics"] = ck.metrics;
  return j;
}

Checkpoint checkpoint_from_json(const json& j) {
  try {
    if (j.value("format", std::string()) != "fxdpd-checkpoint") {
      throw FormatError("not a checkpoint (missing format tag)");
    }
    const int version = j.at("version").get<int>();
    if (version != kCheckpointVersion) {
      throw VersionError(static_cast<std::uint32_t>(version), kCheckpointVersion);
    }
    Checkpoint ck;
    ck.model = model_config_from_json(j.at("model_config"));
    if (j.at("datapath_hash").get<std::string>() != hex64(ck.model.datapath_hash())) {
      throw FormatError("checkpoint datapath hash does not match its model config");
    }
    ck.round = j.value("round", 0);
    const json& p = j.at("params");
    ck.params.w_fc = matrix_from_json<double>(p.at("w_fc"), "w_fc");
    ck.params.b_fc = p.at("b_fc").get<std::vector<double>>();
    ck.params.w_out = matrix_from_json<double>(p.at("w_out"), "w_out");
    ck.params.b_out = p.at("b_out").get<std::vector<double>>();
    ck.params.mask_fc = matrix_from_json<std::uint8_t>(j.at("masks").at("fc"), "mask fc");
    ck.params.mask_out = matrix_from_json<std::uint8_t>(j.at("masks").at("out"), "mask out");
    ck.params.check_shape(ck.model);
    for (std::size_t i = 0; i < ck.params.w_fc.size(); ++i) {
      if (ck.params.mask_fc.data()[i] > 1) throw FormatError("mask entries must be 0 or 1");
      if (ck.params.mask_fc.data()[i] == 0 && ck.params.w_fc.data()[i] != 0.0) {
        throw FormatError("masked weight is not zero");
      }
    }
    for (std::size_t i = 0; i < ck.params.w_out.size(); ++i) {
      if (ck.params.mask_out.data()[i] > 1) throw FormatError("mask entries must be 0 or 1");
      if (ck.params.mask_out.data()[i] == 0 && ck.params.w_out.data()[i] != 0.0) {
        throw FormatError("masked weight is not zero");
      }
    }

    const json& q = j.at("quantized");
    if (parse_rounding(q.at("rounding").get<std::string>()) != ck.model.weight_rounding ||
        FxpFormat::parse(q.at("format").get<std::string>()) != ck.model.weight_format) {
      throw FormatError("quantized block disagrees with the model config");
    }
    const QuantizedParams regen = quantize_params(ck.params, ck.model);
    QuantizedParams stored;
    stored.format = regen.format;
    stored.w_fc = matrix_from_json<std::int64_t>(q.at("w_fc"), "quantized w_fc");
    stored.b_fc = q.at("b_fc").get<std::vector<std::int64_t>>();
    stored.w_out = matrix_from_json<std::int64_t>(q.at("w_out"), "quantized w_out");
    stored.b_out = q.at("b_out").get<std::vector<std::int64_t>>();
    stored.mask_fc = ck.params.mask_fc;
    stored.mask_out = ck.params.mask_out;
    if (!(stored == regen)) {
      throw FormatError("quantized integers do not regenerate from the master params");
    }
    if (j.contains("train_config")) ck.train = train_config_from_json(j.at("train_config"));
    if (j.contains("metrics")) ck.metrics = j.at("metrics");
    return ck;
  } catch (const json::exception& e) {
    throw FormatError(std::string("malformed checkpoint: ") + e.what());
  }
}

void write_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt) {
  std::ofstream os = open_out(path, false);
  os << checkpoint_to_json(ckpt).dump(1) << '\n';
  if (!os) throw IoError("write failed: " + path.string());
}

Checkpoint read_checkpoint(const std::filesystem::path& path) {
  std::ifstream is = open_in(path, false);
  json j;
  try {
    j = json::parse(is);
  } catch (const json::exception& e) {
    throw FormatError("checkpoint is not valid JSON: " + std::string(e.what()));
  }
  return checkpoint_from_json(j);
}

// ---------------------------------------------------------------------------
// Test vectors

std::string hex_field(std::int64_t raw, int width) {
  const std::uint64_t mask = width >= 64 ? ~0ULL : ((1ULL << width) - 1);
  std::ostringstream os;
  os << std::hex << std::setw((width + 3) / 4) << std::setfill('0')
     << (static_cast<std::uint64_t>(raw) & mask);
  return os.str();
}

std::string test_vector_header(const ModelConfig& cfg, const QuantizedParams& params,
                               std::size_t count) {
  std::ostringstream os;
  os << "// fxdpd test vectors v1\n"
     << "// input " << cfg.act_format.to_string() << " (" << cfg.act_format.width()
     << "-bit), output " << cfg.out_format.to_string() << " (" << cfg.out_format.width()
     << "-bit), two's complement hex\n"
     << "// datapath_hash " << hex64(cfg.datapath_hash()) << "\n"
     << "// params_hash " << hex64(params_hash(params)) << "\n"
     << "// config " << cfg.canonical_string() << "\n"
     << "// samples " << count << ", cold start\n"
     << "// columns: I_in Q_in I_out Q_out\n";
  return os.str();
}

void export_test_vectors(std::ostream& os, std::span<const FxpComplex> input,
                         const ModelConfig& cfg, const QuantizedParams& params) {
  FixedPointDpd dpd(cfg, params);
  os << test_vector_header(cfg, params, input.size());
  const int wi = cfg.act_format.width();
  const int wo = cfg.out_format.width();
  for (const FxpComplex& s : input) {
    const FxpComplex y = dpd.process(s).y;
    os << hex_field(s.i.raw, wi) << ' ' << hex_field(s.q.raw, wi) << ' ' << hex_field(y.i.raw, wo)
       << ' ' << hex_field(y.q.raw, wo) << '\n';
  }
}

void export_test_vectors(const std::filesystem::path& path, std::span<const FxpComplex> input,
                         const ModelConfig& cfg, const QuantizedParams& params) {
  std::ofstream os = open_out(path, false);
  export_test_vectors(os, input, cfg, params);
  if (!os) throw IoError("write failed: " + path.string());
}

std::vector<FxpComplex> dataset_inputs(const Dataset& ds, std::size_t begin, std::size_t count) {
  if (begin > ds.size() || count > ds.size() - begin) {
    throw std::out_of_range("dataset slice out of range");
  }
  std::vector<FxpComplex> out;
  out.reserve(count);
  for (std::size_t i = begin; i < begin + count; ++i) {
    out.push_back({FxpValue{ds.input[2 * i], ds.input_format},
                   FxpValue{ds.input[2 * i + 1], ds.input_format}});
  }
  return out;
}

}  // namespace fxdpd
