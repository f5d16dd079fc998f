// SPDX-FileCopyrightText: © 2026 The fxdpd Authors
//
// SPDX-License-Identifier: Apache-2.0

#include "commands.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>

#include "common.hpp"
#include "fxdpd/evaluate.hpp"
#include "fxdpd/invsqrt.hpp"
#include "fxdpd/io.hpp"
#include "fxdpd/metrics.hpp"

namespace fxdpd::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

json acpr_json(const AcprResult& a) {
  return {{"lower_dbc", a.lower_dbc}, {"upper_dbc", a.upper_dbc}, {"worst_dbc", a.worst()}};
}

json segment_json(const SegmentMetrics& m) {
  json j = {{"nmse_db", m.nmse_db}, {"acpr", acpr_json(m.acpr)}};
  j["evm_db"] = m.evm_db ? json(*m.evm_db) : json(nullptr);
  return j;
}

json ops_json(const ParamOpsReport& r) {
  return {{"total_weights", r.total_weights},
          {"active_weights", r.active_weights},
          {"biases", r.biases},
          {"param_count", r.param_count},
          {"sparsity", r.sparsity},
          {"ops_per_sample", r.ops_per_sample},
          {"network_ops", r.network_ops},
          {"fex_ops", r.fex_ops},
          {"phase_norm_ops", r.phase_norm_ops},
          {"fc_ops", r.fc_ops},
          {"out_ops", r.out_ops},
          {"phase_denorm_ops", r.phase_denorm_ops},
          {"convention", r.convention},
          {"target_reference", {{"param_count", 64}, {"ops_per_sample", 72}}}};
}

void write_psd(const fs::path& path, std::span<const cd> y, double fs, int seg) {
  std::ofstream os(path);
  if (!os) throw IoError("cannot write " + path.string());
  write_psd_csv(os, psd_welch(y, fs, seg, seg / 2));
}

}  // namespace

// ---------------------------------------------------------------------------

int run_gen(const GenOptions& o) {
  SignalSpec spec;
  spec.bandwidth = o.bw;
  spec.sample_rate = o.fs;
  spec.rolloff = o.rolloff;
  spec.peak_amplitude = o.peak;
  spec.seed = o.seed;
  spec.num_samples = o.samples;
  if (o.symbols > 0) {
    spec.num_samples = static_cast<std::size_t>(
        std::llround(static_cast<double>(o.symbols) * spec.samples_per_symbol()));
  }
  spec.validate();

  PaCoeffs pa = default_pa();
  std::string pa_source = "default";
  if (!o.pa.empty()) {
    pa = pa_coeffs_from_json(read_json_file(o.pa));
    pa_source = "file:" + o.pa;
  }

  const Baseband bb = gen_baseband(spec);
  std::vector<cd> y(bb.signal.samples.size());
  pa_forward(bb.signal.samples, y, pa);
  json meta = {{"generator", "fxdpd gen"},
               {"signal_spec", to_json(spec)},
               {"pa", to_json(pa)},
               {"pa_source", pa_source}};
  const Dataset ds = make_dataset(bb.signal.samples, y, spec.sample_rate, meta);
  write_dataset(fs::path(o.out), ds);

  const QuantizeReport qin = quantize_iq(bb.signal.samples, ds.input_format);
  const QuantizeReport qout = quantize_iq(y, ds.output_format);
  json summary = {{"command", "gen"},
                  {"out", o.out},
                  {"samples", ds.size()},
                  {"symbols", bb.symbols.size()},
                  {"split", {{"train_end", ds.split.train_end}, {"val_end", ds.split.val_end}}},
                  {"signal_spec", to_json(spec)},
                  {"pa", to_json(pa)},
                  {"pa_source", pa_source},
                  {"saturated", {{"input", qin.saturated}, {"output", qout.saturated}}}};
  if (ds.size() >= 1024) {
    int seg = 4096;
    while (static_cast<std::size_t>(seg) > ds.size() / 2) seg /= 2;
    std::vector<cd> ref(bb.signal.samples);
    for (cd& v : ref) v *= pa.at(1, 0);
    const auto m = static_cast<std::size_t>(pa.memory());
    summary["input_acpr"] = acpr_json(acpr(bb.signal.samples, spec.sample_rate, spec.bandwidth, 0.0, seg, seg / 2));
    summary["pa_baseline"] = {
        {"nmse_db", nmse(std::span<const cd>(y).subspan(m), std::span<const cd>(ref).subspan(m)).db},
        {"acpr", acpr_json(acpr(y, spec.sample_rate, spec.bandwidth, 0.0, seg, seg / 2))},
        {"evm_db", evm(y, 0, bb.symbols, spec).db}};
  }
  write_json_file(o.summary.empty() ? fs::path(o.out + ".summary.json") : fs::path(o.summary),
                  summary);
  std::cout << "gen: " << ds.size() << " samples (" << bb.symbols.size() << " symbols), split "
            << ds.split.train_end << "/" << ds.split.val_end << "/" << ds.size() << " -> " << o.out
            << '\n';
  return kExitOk;
}

// ---------------------------------------------------------------------------

int run_train(const TrainOptions& o) {
  // Configuration first: nothing is read or computed on a bad config.
  TrainConfig tc = load_train_config(o.config);
  if (o.seed >= 0) tc.seed = static_cast<std::uint64_t>(o.seed);
  const ModelConfig cfg = load_model_config(o.model_config, o.precision);
  try {
    tc.validate();
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }

  const Dataset ds = read_dataset(fs::path(o.data));
  const PaChoice pa = resolve_pa(ds, o.pa);
  const std::vector<cd> x = ds.input_signal();
  const fs::path dir(o.out_dir);
  fs::create_directories(dir);
  write_json_file(dir / "train_config.json", to_json(tc));
  write_json_file(dir / "model_config.json", to_json(cfg));
  write_json_file(dir / "pa.json", to_json(pa.coeffs));

  const auto t0 = std::chrono::steady_clock::now();
  json rounds = json::array();
  TrainCallbacks cb;
  cb.on_epoch = [&](const EpochRecord& r) {
    if (o.quiet) return;
    std::fprintf(stderr, "epoch %4d round %d lr %.2e train %7.2f dB val %7.2f dB sparsity %.4f\n",
                 r.epoch, r.round, r.lr, r.train_nmse_db, r.val_nmse_db, r.sparsity);
  };
  cb.on_round = [&](const RoundResult& r) {
    Checkpoint ck;
    ck.model = cfg;
    ck.params = r.params;
    ck.train = tc;
    ck.round = r.round;
    ck.metrics = {{"best_val_nmse_db", r.best_val_nmse_db},
                  {"sparsity", r.sparsity},
                  {"active_weights", r.active_weights}};
    const std::string name = "checkpoint_round" + std::to_string(r.round) + ".json";
    write_checkpoint(dir / name, ck);
    rounds.push_back({{"round", r.round},
                      {"checkpoint", name},
                      {"best_val_nmse_db", r.best_val_nmse_db},
                      {"active_weights", r.active_weights},
                      {"sparsity", r.sparsity}});
  };
  const TrainResult res = train_pipeline(x, ds.split, cfg, tc, pa.coeffs, cb);
  const double secs =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

  {
    std::ofstream os(dir / "history.csv");
    write_history_csv(os, res.history);
    if (!os) throw IoError("cannot write history.csv");
  }
  Checkpoint fin;
  fin.model = cfg;
  fin.params = res.params;
  fin.train = tc;
  fin.round = res.rounds.back().round;
  fin.metrics = {{"best_val_nmse_db", res.rounds.back().best_val_nmse_db}};
  write_checkpoint(dir / "final.json", fin);
  const ParamOpsReport ops = count_params_ops(res.params, cfg);
  write_json_file(dir / "report.json", ops_json(ops));

  json summary = {{"command", "train"},
                  {"data", o.data},
                  {"config", o.config},
                  {"train_config", to_json(tc)},
                  {"model_config", to_json(cfg)},
                  {"datapath_hash", hex64(cfg.datapath_hash())},
                  {"pa_source", pa.source},
                  {"epochs", res.history.size()},
                  {"rounds", rounds},
                  {"final_checkpoint", "final.json"},
                  {"report", ops_json(ops)}};
  if (pa.fit_residual_db) summary["pa_fit_residual_db"] = *pa.fit_residual_db;
  write_json_file(dir / "summary.json", summary);

  std::cout << "train: " << res.history.size() << " epochs, " << res.rounds.size()
            << " checkpoints in " << dir.string() << " (" << fmt_db(secs) << " s)\n";
  for (const auto& r : res.rounds) {
    std::cout << "  round " << r.round << ": val NMSE " << fmt_db(r.best_val_nmse_db)
              << " dB, active weights " << r.active_weights << ", sparsity " << r.sparsity << '\n';
  }
  std::cout << "  params " << ops.active_weights << " weights + " << ops.biases << " biases = "
            << ops.param_count << " (target: 64), ops/sample " << ops.ops_per_sample
            << " (target: 72), sparsity " << ops.sparsity << '\n';
  return kExitOk;
}

// ---------------------------------------------------------------------------

int run_eval(const EvalOptions& o) {
  const Checkpoint ck = read_checkpoint(fs::path(o.checkpoint));
  check_datapath(ck, o.model_config, o.precision);
  const Dataset ds = read_dataset(fs::path(o.data));
  const PaChoice pa = resolve_pa(ds, o.pa);
  const DpdPath path = parse_dpd_path(o.path);

  std::size_t begin = 0;
  std::size_t end = ds.size();
  if (o.split == "train") end = ds.split.train_end;
  if (o.split == "val") {
    begin = ds.split.train_end;
    end = ds.split.val_end;
  }
  if (o.split == "test") begin = ds.split.val_end;

  const std::vector<cd> x = ds.input_signal();
  const std::optional<SignalSpec> spec = dataset_signal_spec(ds);
  std::vector<cd> symbols;
  EvmReference ref;
  if (spec) {
    symbols = gen_baseband(*spec).symbols;
    ref.spec = &*spec;
    ref.symbols = symbols;
  }
  const double bw = spec ? spec->bandwidth : 20e6;
  const LinearizationReport r = evaluate_linearization(x, begin, end, ck.params, ck.model, path,
                                                       pa.coeffs, ds.sample_rate, bw, ref);

  const fs::path dir(o.out_dir);
  fs::create_directories(dir);
  write_psd(dir / "psd_dpd.csv", r.pa_out_dpd, ds.sample_rate, r.psd_segment);
  write_psd(dir / "psd_baseline.csv", r.pa_out_baseline, ds.sample_rate, r.psd_segment);
  json summary = {{"command", "eval"},
                  {"data", o.data},
                  {"checkpoint", o.checkpoint},
                  {"path", to_string(path)},
                  {"split", o.split},
                  {"scored", {{"begin", r.begin}, {"end", r.end}}},
                  {"datapath_hash", hex64(ck.model.datapath_hash())},
                  {"params_hash", hex64(params_hash(quantize_params(ck.params, ck.model)))},
                  {"pa_source", pa.source},
                  {"bandwidth_hz", bw},
                  {"psd_segment", r.psd_segment},
                  {"dpd", segment_json(r.dpd)},
                  {"baseline", segment_json(r.baseline)},
                  {"improvement_db",
                   {{"nmse", r.baseline.nmse_db - r.dpd.nmse_db},
                    {"acpr_worst", r.baseline.acpr.worst() - r.dpd.acpr.worst()}}},
                  {"overflow_events", r.overflow_events},
                  {"report", ops_json(count_params_ops(ck.params, ck.model))}};
  write_json_file(dir / "eval.json", summary);

  const auto line = [](const char* name, const SegmentMetrics& m) {
    std::cout << "  " << name << " NMSE " << fmt_db(m.nmse_db) << " dB  ACPR "
              << fmt_db(m.acpr.lower_dbc) << " / " << fmt_db(m.acpr.upper_dbc) << " dBc  EVM "
              << (m.evm_db ? fmt_db(*m.evm_db) + " dB" : std::string("n/a")) << '\n';
  };
  std::cout << "eval (" << to_string(path) << ", " << o.split << " split, samples " << r.begin
            << ".." << r.end << "):\n";
  line("DPD+PA ", r.dpd);
  line("PA only", r.baseline);
  std::cout << "  NMSE improvement " << fmt_db(r.baseline.nmse_db - r.dpd.nmse_db)
            << " dB, worst-side ACPR improvement "
            << fmt_db(r.baseline.acpr.worst() - r.dpd.acpr.worst()) << " dB\n";
  return kExitOk;
}

// ---------------------------------------------------------------------------

int run_certify(const CertifyOptions& o) {
  InvSqrtConfig cfg;
  if (!o.config.empty()) cfg = invsqrt_config_from_json(read_json_file(o.config));
  if (o.iters >= 0) cfg.iter_count = o.iters;
  if (o.window > 0) cfg.window_bits = o.window;
  if (o.lut_bits > 0) cfg.lut_addr_bits = o.lut_bits;
  try {
    cfg.validate();
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
  const CertifyResult r = certify_error(cfg, o.z_max);
  const bool pass = r.eps_max <= kInvSqrtTarget;
  json summary = {{"command", "certify-invsqrt"},
                  {"config", to_json(cfg)},
                  {"eps_max", r.eps_max},
                  {"eps_max_log2", std::log2(r.eps_max)},
                  {"worst_z", r.worst_z},
                  {"checked", r.checked},
                  {"z_max", r.z_max},
                  {"exhaustive", o.z_max == 0},
                  {"target", kInvSqrtTarget},
                  {"pass", pass}};
  write_json_file(fs::path(o.summary), summary);
  char buf[256];
  std::snprintf(buf, sizeof buf,
                "certify-invsqrt: window %d, lut %d, iters %d: eps_max %.6e (2^%.3f) at z=%llu "
                "over %llu inputs, target 2^-12: %s\n",
                cfg.window_bits, cfg.lut_addr_bits, cfg.iter_count, r.eps_max, std::log2(r.eps_max),
                static_cast<unsigned long long>(r.worst_z),
                static_cast<unsigned long long>(r.checked), pass ? "PASS" : "FAIL");
  std::cout << buf;
  return pass ? kExitOk : kExitCertifyFail;
}

// ---------------------------------------------------------------------------

int run_export(const ExportOptions& o) {
  const Checkpoint ck = read_checkpoint(fs::path(o.checkpoint));
  check_datapath(ck, o.model_config, o.precision);
  const Dataset ds = read_dataset(fs::path(o.data));
  if (ds.input_format != ck.model.act_format) {
    throw UsageError("dataset input format " + ds.input_format.to_string() +
                     " differs from the checkpoint's activation format " +
                     ck.model.act_format.to_string());
  }
  if (o.offset > ds.size() || o.count > ds.size() - o.offset) {
    throw UsageError("--offset/--count exceed the dataset (" + std::to_string(ds.size()) +
                     " samples)");
  }
  const std::vector<FxpComplex> in = dataset_inputs(ds, o.offset, o.count);
  const QuantizedParams q = quantize_params(ck.params, ck.model);
  export_test_vectors(fs::path(o.out), in, ck.model, q);
  json summary = {{"command", "export-tv"},
                  {"data", o.data},
                  {"checkpoint", o.checkpoint},
                  {"out", o.out},
                  {"offset", o.offset},
                  {"count", o.count},
                  {"datapath_hash", hex64(ck.model.datapath_hash())},
                  {"params_hash", hex64(params_hash(q))},
                  {"config", ck.model.canonical_string()}};
  write_json_file(o.summary.empty() ? fs::path(o.out + ".summary.json") : fs::path(o.summary),
                  summary);
  std::cout << "export-tv: " << o.count << " lines -> " << o.out << '\n';
  return kExitOk;
}

}  // namespace fxdpd::cli
