// Copyright 2026 The compact-slt Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include "CLI11.hpp"
#include "slt/cost_model.h"
#include "slt/pipeline.h"

namespace slt {
namespace {

constexpr int kDeclaredFps[] = {24, 12};

bool declared_fps(int fps) {
  for (int f : kDeclaredFps) {
    if (f == fps) return true;
  }
  return false;
}

void require_declared_fps(int fps, bool fps_any) {
  if (!fps_any && !declared_fps(fps)) {
    fail(ErrorCode::kConfig, "fps " + std::to_string(fps) +
                                 " is not one of {24, 12}; pass --fps-any to allow it");
  }
}

// Reads either a pipeline config or a bare model config.
ModelConfig model_config_from(const std::string& path) {
  if (path.empty()) return ModelConfig{};
  std::ifstream in(path);
  if (!in) fail(ErrorCode::kIo, "cannot read config " + path);
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::kConfig, "bad config " + path + ": " + e.what());
  }
  if (j.contains("model")) return load_pipeline_config(path).model;
  ModelConfig c;
  from_json(j, c);
  return c;
}

void write_json(const nlohmann::json& j, const std::string& path, std::ostream& out) {
  if (path.empty()) {
    out << j.dump(2) << '\n';
    return;
  }
  std::ofstream f(path, std::ios::trunc);
  if (!f) fail(ErrorCode::kIo, "cannot write " + path);
  f << j.dump(2) << '\n';
}

// Flags that mirror config fields. A flag wins over the config file only
// when it was given on the command line.
struct Overrides {
  std::vector<std::pair<CLI::Option*, std::function<void(PipelineConfig&)>>> items;

  template <typename T>
  void add(CLI::App* app, const std::string& name, T& storage, const std::string& help,
           std::function<void(PipelineConfig&, const T&)> apply) {
    CLI::Option* opt = app->add_option(name, storage, help);
    items.emplace_back(opt, [&storage, apply](PipelineConfig& c) { apply(c, storage); });
  }

  void apply(PipelineConfig& c) const {
    for (const auto& [opt, fn] : items) {
      if (opt->count() > 0) fn(c);
    }
  }
};

struct Flags {
  std::string config;
  std::uint64_t seed = 7;
  int epochs = 0, batch = 0, micro_batch = 0, patience = 0, dev_limit = 0;
  double lr = 0, warmup = 0, stop_at = 0;
  int d_model = 0, d_ff = 0, layers = 0, heads = 0, d_kv = 0;
  std::string ffn;
  int beam = 0, max_len = 0;
  double alpha = 0;
};

void add_train_flags(CLI::App* app, Flags& f, Overrides& o) {
  o.add<std::uint64_t>(app, "--seed", f.seed, "root random seed",
                       [](PipelineConfig& c, const std::uint64_t& v) { c.seed = v; });
  o.add<int>(app, "--epochs", f.epochs, "training epochs",
             [](PipelineConfig& c, const int& v) { c.train.epochs = v; });
  o.add<double>(app, "--lr", f.lr, "peak learning rate",
                [](PipelineConfig& c, const double& v) { c.train.lr_max = v; });
  o.add<double>(app, "--warmup", f.warmup, "warm-up length in epochs",
                [](PipelineConfig& c, const double& v) { c.train.warmup_epochs = v; });
  o.add<int>(app, "--batch", f.batch, "effective batch size",
             [](PipelineConfig& c, const int& v) { c.train.effective_batch = v; });
  o.add<int>(app, "--micro-batch", f.micro_batch, "micro-batch size",
             [](PipelineConfig& c, const int& v) { c.train.micro_batch = v; });
  o.add<int>(app, "--patience", f.patience, "epochs without dev gain before stopping (0: off)",
             [](PipelineConfig& c, const int& v) { c.train.patience = v; });
  o.add<double>(app, "--stop-at-dev-bleu", f.stop_at, "stop once dev BLEU-4 reaches this",
                [](PipelineConfig& c, const double& v) { c.train.stop_at_dev_bleu = v; });
  o.add<int>(app, "--dev-limit", f.dev_limit, "dev clips decoded per epoch (0: all)",
             [](PipelineConfig& c, const int& v) { c.train.dev_limit = v; });
  o.add<int>(app, "--d-model", f.d_model, "model width",
             [](PipelineConfig& c, const int& v) { c.model.d_model = v; });
  o.add<int>(app, "--d-ff", f.d_ff, "feed-forward width",
             [](PipelineConfig& c, const int& v) { c.model.d_ff = v; });
  o.add<int>(app, "--layers", f.layers, "layers per stack",
             [](PipelineConfig& c, const int& v) { c.model.num_layers = v; });
  o.add<int>(app, "--heads", f.heads, "attention heads",
             [](PipelineConfig& c, const int& v) { c.model.num_heads = v; });
  o.add<int>(app, "--d-kv", f.d_kv, "per-head width",
             [](PipelineConfig& c, const int& v) { c.model.d_kv = v; });
  o.add<std::string>(app, "--ffn", f.ffn, "relu or gated-gelu",
                     [](PipelineConfig& c, const std::string& v) {
                       c.model.ffn_variant = parse_ffn_variant(v);
                     });
}

void add_decode_flags(CLI::App* app, Flags& f, Overrides& o) {
  o.add<int>(app, "--beam", f.beam, "beam size",
             [](PipelineConfig& c, const int& v) { c.decode.beam = v; });
  o.add<int>(app, "--max-len", f.max_len, "maximum output tokens",
             [](PipelineConfig& c, const int& v) { c.decode.max_len = v; });
  o.add<double>(app, "--alpha", f.alpha, "length normalization exponent",
                [](PipelineConfig& c, const double& v) { c.decode.length_alpha = v; });
}

PipelineConfig resolve(const Flags& f, const Overrides& o) {
  PipelineConfig c = f.config.empty() ? PipelineConfig{} : load_pipeline_config(f.config);
  o.apply(c);
  return c;
}

std::vector<std::filesystem::path> existing(std::initializer_list<std::filesystem::path> paths) {
  std::vector<std::filesystem::path> out;
  for (const auto& p : paths) {
    if (std::filesystem::exists(p)) out.push_back(p);
  }
  return out;
}

std::string joined_args(int argc, const char* const* argv) {
  std::string s;
  for (int i = 1; i < argc; ++i) {
    if (i > 1) s += ' ';
    s += argv[i];
  }
  return s;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Pose-to-text translation: synthetic data, training, decoding, BLEU and cost "
               "analysis",
               "slt"};
  app.require_subcommand(1);
  Flags f;
  Overrides o;
  std::string stage;
  const std::string command = joined_args(argc, argv);

  // synth
  auto* synth = app.add_subcommand("synth", "generate a synthetic gesture corpus");
  std::string synth_len, synth_out;
  int synth_vocab = 0, synth_train = 0, synth_dev = 0, synth_test = 0, synth_fps = 0, synth_g = 0;
  double synth_jitter = 0;
  bool fps_any = false;
  synth->add_option("--config", f.config, "pipeline config file (JSON)");
  o.add<int>(synth, "--vocab", synth_vocab, "number of words",
             [](PipelineConfig& c, const int& v) { c.synth.vocab_size = v; });
  o.add<std::string>(synth, "--len", synth_len, "sentence length range MIN:MAX",
                     [](PipelineConfig& c, const std::string& v) {
                       const auto colon = v.find(':');
                       try {
                         if (colon == std::string::npos) {
                           c.synth.min_len = c.synth.max_len = std::stoi(v);
                         } else {
                           c.synth.min_len = std::stoi(v.substr(0, colon));
                           c.synth.max_len = std::stoi(v.substr(colon + 1));
                         }
                       } catch (const std::exception&) {
                         fail(ErrorCode::kConfig, "--len expects MIN:MAX, got '" + v + "'");
                       }
                     });
  o.add<int>(synth, "--frames-per-word", synth_g, "template frames per word at base rate",
             [](PipelineConfig& c, const int& v) { c.synth.frames_per_word = v; });
  o.add<int>(synth, "--train", synth_train, "training clips",
             [](PipelineConfig& c, const int& v) { c.synth.train_size = v; });
  o.add<int>(synth, "--dev", synth_dev, "dev clips",
             [](PipelineConfig& c, const int& v) { c.synth.dev_size = v; });
  o.add<int>(synth, "--test", synth_test, "test clips",
             [](PipelineConfig& c, const int& v) { c.synth.test_size = v; });
  o.add<int>(synth, "--fps", synth_fps, "frame rate of the written clips",
             [](PipelineConfig& c, const int& v) { c.synth.fps = v; });
  o.add<double>(synth, "--jitter", synth_jitter, "coordinate noise sigma",
                [](PipelineConfig& c, const double& v) { c.synth.jitter_sigma = v; });
  o.add<std::uint64_t>(synth, "--seed", f.seed, "root random seed",
                       [](PipelineConfig& c, const std::uint64_t& v) { c.seed = v; });
  synth->add_option("--out-dir", synth_out, "output directory")->required();
  synth->add_flag("--fps-any", fps_any, "allow frame rates outside {24, 12}");

  // preprocess
  auto* pre = app.add_subcommand("preprocess", "normalize, resample and truncate a dataset");
  std::string pre_in, pre_out;
  int pre_fps = 24, pre_max = kDefaultMaxFrames;
  bool pre_no_norm = false, pre_fps_any = false;
  pre->add_option("--in", pre_in, "input dataset")->required();
  pre->add_option("--out", pre_out, "output dataset")->required();
  pre->add_option("--fps", pre_fps, "target frame rate")->capture_default_str();
  pre->add_option("--max-frames", pre_max, "frame cap")->capture_default_str();
  pre->add_flag("--no-normalize", pre_no_norm, "skip width/height normalization");
  pre->add_flag("--fps-any", pre_fps_any, "allow frame rates outside {24, 12}");

  // train
  auto* tr = app.add_subcommand("train", "train a model on preprocessed datasets");
  std::vector<std::string> tr_train;
  std::string tr_dev, tr_out;
  std::optional<double> tr_mix;
  tr->add_option("--train", tr_train, "training datasets, concatenated unless --mix is given")
      ->required()
      ->delimiter(',');
  tr->add_option("--mix", tr_mix, "share of the first of two training sets, in [0, 1]");
  tr->add_option("--dev", tr_dev, "dev dataset used for checkpoint selection");
  tr->add_option("--config", f.config, "pipeline config file (JSON)");
  tr->add_option("--out-dir", tr_out, "output directory")->required();
  add_train_flags(tr, f, o);

  // translate
  auto* tl = app.add_subcommand("translate", "decode a dataset with a trained model");
  std::string tl_model, tl_in, tl_out;
  tl->add_option("--model", tl_model, "checkpoint")->required();
  tl->add_option("--in", tl_in, "preprocessed dataset")->required();
  tl->add_option("--out", tl_out, "output file, one {id, hypothesis} per line")->required();
  tl->add_option("--config", f.config, "pipeline config file (JSON)");
  add_decode_flags(tl, f, o);

  // evaluate
  auto* ev = app.add_subcommand("evaluate", "corpus BLEU-1..4");
  std::string ev_hyp, ev_ref, ev_report;
  ev->add_option("--hyp", ev_hyp, "hypotheses")->required();
  ev->add_option("--ref", ev_ref, "references")->required();
  ev->add_option("--report", ev_report, "JSON report path (stdout when omitted)");

  // analyze
  auto* an = app.add_subcommand("analyze", "parameter and attention cost reports");
  an->require_subcommand(1);
  auto* an_params = an->add_subcommand("params", "closed-form parameter count");
  std::string an_config, an_out;
  bool an_sweep = false;
  an_params->add_option("--config", an_config, "model or pipeline config file");
  an_params->add_option("--out", an_out, "JSON report path (stdout when omitted)");
  an_params->add_flag("--sweep", an_sweep, "include the configuration-family sweep");
  auto* an_flops = an->add_subcommand("flops", "encoder self-attention FLOPs");
  std::vector<std::int64_t> an_n{64, 128, 256};
  std::vector<int> an_fps;
  double an_seconds = 256.0 / 24.0;
  bool an_measure = false;
  int an_reps = 5;
  an_flops->add_option("--config", an_config, "model or pipeline config file");
  an_flops->add_option("--out", an_out, "JSON report path (stdout when omitted)");
  an_flops->add_option("--n", an_n, "sequence lengths")->delimiter(',')->capture_default_str();
  an_flops->add_option("--fps", an_fps, "frame rates for the trade-off table")->delimiter(',');
  an_flops->add_option("--seconds", an_seconds, "clip duration for --fps")->capture_default_str();
  an_flops->add_flag("--measure", an_measure, "also time the attention kernel");
  an_flops->add_option("--repetitions", an_reps, "timed repetitions per n")->capture_default_str();

  // e2e
  auto* e2e = app.add_subcommand("e2e", "full chain at several frame rates");
  std::string e2e_out = "e2e_out";
  std::vector<int> e2e_fps{24, 12};
  bool e2e_fps_any = false;
  e2e->add_option("--config", f.config, "pipeline config file (JSON)");
  e2e->add_option("--out-dir", e2e_out, "output directory")->capture_default_str();
  e2e->add_option("--fps-list", e2e_fps, "frame rates to compare")->delimiter(',');
  e2e->add_flag("--fps-any", e2e_fps_any, "allow frame rates outside {24, 12}");
  add_train_flags(e2e, f, o);
  add_decode_flags(e2e, f, o);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err) == 0 ? 0 : 1;
  }

  try {
    if (synth->parsed()) {
      stage = "synth";
      PipelineConfig c = resolve(f, o);
      c.synth.seed = c.seed;
      require_declared_fps(c.synth.fps, fps_any);
      const SynthCorpus corpus = generate_corpus(c.synth);
      write_corpus(corpus, synth_out);
      for (const auto& w : corpus.warnings) err << "synth: warning: " << w << '\n';
      const std::filesystem::path dir = synth_out;
      write_manifest(dir / "manifest.json", command, nlohmann::json(c), c.seed,
                     {dir / "train.jsonl", dir / "dev.jsonl", dir / "test.jsonl",
                      dir / "lexicon.json"},
                     dir);
      out << nlohmann::json{{"train", corpus.train.size()},
                            {"dev", corpus.dev.size()},
                            {"test", corpus.test.size()},
                            {"warnings", corpus.warnings}}
                 .dump()
          << '\n';
    } else if (pre->parsed()) {
      stage = "preprocess";
      require_declared_fps(pre_fps, pre_fps_any);
      PreprocessOptions po;
      po.fps = pre_fps;
      po.max_frames = pre_max;
      po.normalize = !pre_no_norm;
      PreprocessStats stats;
      const auto clips = preprocess_clips(load_pose_dataset(pre_in), po, &stats);
      save_pose_dataset(clips, pre_out);
      const nlohmann::json cfg{{"fps", pre_fps}, {"max_frames", pre_max}, {"normalize", po.normalize}};
      const std::filesystem::path outp = pre_out;
      write_manifest(outp.string() + ".manifest.json", command, cfg, 0, {outp},
                     outp.parent_path().empty() ? "." : outp.parent_path());
      out << nlohmann::json{{"input", stats.input},
                            {"kept", stats.kept},
                            {"discarded_sub_rate", stats.discarded_sub_rate},
                            {"truncated", stats.truncated}}
                 .dump()
          << '\n';
    } else if (tr->parsed()) {
      stage = "train";
      const PipelineConfig c = resolve(f, o);
      std::vector<std::vector<PoseClip>> sets;
      for (const auto& path : tr_train) sets.push_back(load_pose_dataset(path));
      const auto train_clips = mix_datasets(sets, tr_mix, c.seed);
      const auto dev_clips = tr_dev.empty() ? std::vector<PoseClip>{} : load_pose_dataset(tr_dev);
      const std::filesystem::path dir = tr_out;
      const TrainResult r = run_training(train_clips, dev_clips, c, dir, [&](const EpochMetrics& m) {
        out << nlohmann::json(m).dump() << '\n' << std::flush;
      });
      write_manifest(dir / "manifest.json", command, nlohmann::json(c), c.seed,
                     existing({dir / "vocab.tsv", dir / "model.ckpt", dir / "metrics.jsonl"}), dir);
      (void)r;
    } else if (tl->parsed()) {
      stage = "translate";
      const PipelineConfig c = resolve(f, o);
      const Checkpoint model = load_checkpoint(tl_model);
      const auto rows = translate_clips(model, load_pose_dataset(tl_in), c.decode);
      save_translations(rows, tl_out);
      const std::filesystem::path outp = tl_out;
      write_manifest(outp.string() + ".manifest.json", command, nlohmann::json(c), c.seed, {outp},
                     outp.parent_path().empty() ? "." : outp.parent_path());
    } else if (ev->parsed()) {
      stage = "evaluate";
      write_json(nlohmann::json(evaluate_files(ev_hyp, ev_ref)), ev_report, out);
    } else if (an_params->parsed()) {
      stage = "analyze";
      const ModelConfig mc = model_config_from(an_config);
      mc.validate();
      nlohmann::json j{{"config", mc}, {"params", count_parameters(mc)}};
      if (an_sweep) {
        nlohmann::json sweep = nlohmann::json::array();
        for (const auto& e : config_sweep(mc.vocab_size)) {
          sweep.push_back({{"label", e.label}, {"total", e.total}});
        }
        j["sweep"] = sweep;
      }
      write_json(j, an_out, out);
    } else if (an_flops->parsed()) {
      stage = "analyze";
      const ModelConfig mc = model_config_from(an_config);
      mc.validate();
      nlohmann::json rows = nlohmann::json::array();
      std::vector<AttentionFlops> flops;
      for (std::int64_t n : an_n) {
        flops.push_back(attention_flops(mc, n));
        rows.push_back(flops.back());
      }
      nlohmann::json reductions = nlohmann::json::array();
      for (const auto& a : flops) {
        for (const auto& b : flops) {
          if (a.n <= b.n) continue;
          reductions.push_back({{"from_n", a.n},
                                {"to_n", b.n},
                                {"quadratic_reduction_percent", quadratic_reduction_percent(a, b)}});
        }
      }
      nlohmann::json j{{"config", mc}, {"flops", rows}, {"reductions", reductions}};
      if (!an_fps.empty()) j["tradeoff"] = tradeoff_report(mc, an_fps, an_seconds);
      if (an_measure) j["timing"] = measure_attention_time(mc, an_n, an_reps);
      write_json(j, an_out, out);
    } else if (e2e->parsed()) {
      stage = "e2e";
      const PipelineConfig c = resolve(f, o);
      for (int fps : e2e_fps) require_declared_fps(fps, e2e_fps_any);
      const E2eResult r = run_e2e(c, e2e_fps, e2e_out, &err);
      out << r.table;
    }
  } catch (const Error& e) {
    err << stage << ": " << e.what() << '\n';
    return cli_exit_code(e.code());
  } catch (const nlohmann::json::exception& e) {
    err << stage << ": " << e.what() << '\n';
    return 1;
  } catch (const std::filesystem::filesystem_error& e) {
    err << stage << ": " << e.what() << '\n';
    return 2;
  }
  return 0;
}

}  // namespace slt
