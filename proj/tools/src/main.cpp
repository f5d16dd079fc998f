// SPDX-FileCopyrightText: © 2026 The fxdpd Authors
//
// SPDX-License-Identifier: Apache-2.0

#include <exception>
#include <iostream>

#include "commands.hpp"
#include "common.hpp"

int main(int argc, char** argv) {
  using namespace fxdpd::cli;
  CLI::App app{"fxdpd: fixed-point phase-normalized TDNN predistorter toolkit"};
  app.require_subcommand(1);
  app.set_version_flag("--version", "fxdpd 0.1.0");

  GenOptions gen;
  auto* g = app.add_subcommand("gen", "Generate a 64-QAM dataset and its PA response");
  g->add_option("--bw", gen.bw, "Signal bandwidth in Hz")->capture_default_str();
  g->add_option("--fs", gen.fs, "Sample rate in Hz")->capture_default_str();
  g->add_option("--rolloff", gen.rolloff, "RRC roll-off")->capture_default_str();
  g->add_option("--peak", gen.peak, "Peak amplitude after scaling")->capture_default_str();
  auto* sym = g->add_option("--symbols", gen.symbols, "Length in symbols (overrides --samples)");
  g->add_option("--samples", gen.samples, "Length in samples")->capture_default_str()->excludes(sym);
  g->add_option("--seed", gen.seed, "Symbol seed")->capture_default_str();
  g->add_option("--pa", gen.pa, "PA coefficient JSON (default: built-in PA)")->check(CLI::ExistingFile);
  g->add_option("--out", gen.out, "Output dataset file")->required();
  g->add_option("--summary", gen.summary, "Summary JSON (default: <out>.summary.json)");

  TrainOptions tr;
  auto* t = app.add_subcommand("train", "Quantization-aware training with iterative pruning");
  t->add_option("--data", tr.data, "Dataset file")->required()->check(CLI::ExistingFile);
  t->add_option("--config", tr.config, "Preset (full, ci, acceptance) or JSON file")
      ->capture_default_str();
  t->add_option("--model-config", tr.model_config, "Model/datapath JSON")->check(CLI::ExistingFile);
  t->add_option("--precision", tr.precision, "Weight/activation bits (overrides the model config)")
      ->check(CLI::Range(4, 24));
  t->add_option("--pa", tr.pa, "PA coefficient JSON used as the frozen loss model")
      ->check(CLI::ExistingFile);
  t->add_option("--seed", tr.seed, "Override the training seed");
  t->add_option("--out-dir", tr.out_dir, "Output directory")->required();
  t->add_flag("--quiet", tr.quiet, "No per-epoch progress");

  EvalOptions ev;
  auto* e = app.add_subcommand("eval", "Evaluate DPD -> PA on a dataset split");
  e->add_option("--data", ev.data, "Dataset file")->required()->check(CLI::ExistingFile);
  e->add_option("--checkpoint", ev.checkpoint, "Checkpoint JSON")->required()->check(CLI::ExistingFile);
  e->add_option("--path", ev.path, "Datapath")
      ->check(CLI::IsMember({"reference", "fixedpoint"}))
      ->capture_default_str();
  e->add_option("--split", ev.split, "Samples to score")
      ->check(CLI::IsMember({"train", "val", "test", "all"}))
      ->capture_default_str();
  e->add_option("--model-config", ev.model_config, "Expected datapath JSON")->check(CLI::ExistingFile);
  e->add_option("--precision", ev.precision, "Expected datapath precision")->check(CLI::Range(4, 24));
  e->add_option("--pa", ev.pa, "PA coefficient JSON")->check(CLI::ExistingFile);
  e->add_option("--out-dir", ev.out_dir, "Output directory")->capture_default_str();

  CertifyOptions ce;
  auto* c = app.add_subcommand("certify-invsqrt", "Exhaustive inverse-sqrt error certification");
  c->add_option("--config", ce.config, "Inverse-sqrt config JSON")->check(CLI::ExistingFile);
  c->add_option("--iters", ce.iters, "Newton-Raphson iterations")->check(CLI::Range(0, 8));
  c->add_option("--window", ce.window, "Window bits (even)")->check(CLI::Range(4, 24));
  c->add_option("--lut-bits", ce.lut_bits, "Seed ROM address bits")->check(CLI::Range(2, 16));
  c->add_option("--z-max", ce.z_max, "Sweep [1, z-max] only (default: every reachable input)");
  c->add_option("--summary", ce.summary, "Summary JSON")->capture_default_str();

  ExportOptions ex;
  auto* x = app.add_subcommand("export-tv", "Export hardware test vectors");
  x->add_option("--data", ex.data, "Dataset file")->required()->check(CLI::ExistingFile);
  x->add_option("--checkpoint", ex.checkpoint, "Checkpoint JSON")->required()->check(CLI::ExistingFile);
  x->add_option("--count", ex.count, "Number of samples")->capture_default_str();
  x->add_option("--offset", ex.offset, "First dataset sample")->capture_default_str();
  x->add_option("--model-config", ex.model_config, "Expected datapath JSON")->check(CLI::ExistingFile);
  x->add_option("--precision", ex.precision, "Expected datapath precision")->check(CLI::Range(4, 24));
  x->add_option("--out", ex.out, "Output test-vector file")->required();
  x->add_option("--summary", ex.summary, "Summary JSON (default: <out>.summary.json)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& err) {
    const int code = app.exit(err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (*g) return run_gen(gen);
    if (*t) return run_train(tr);
    if (*e) return run_eval(ev);
    if (*c) return run_certify(ce);
    if (*x) return run_export(ex);
  } catch (const HashMismatchError& err) {
    std::cerr << "fxdpd: refused: " << err.what() << '\n';
    return kExitHashMismatch;
  } catch (const UsageError& err) {
    std::cerr << "fxdpd: " << err.what() << '\n';
    return kExitUsage;
  } catch (const fxdpd::IoError& err) {
    std::cerr << "fxdpd: " << err.what() << '\n';
    return kExitIo;
  } catch (const std::invalid_argument& err) {
    std::cerr << "fxdpd: " << err.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& err) {
    std::cerr << "fxdpd: error: " << err.what() << '\n';
    return kExitInternal;
  }
  return kExitUsage;
}
