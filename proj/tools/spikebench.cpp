// Copyright 2026 The spikebench Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// spikebench command-line front end.

#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "spikebench/codec.hpp"
#include "spikebench/error.hpp"
#include "spikebench/frontend.hpp"
#include "spikebench/harness.hpp"
#include "spikebench/ingest.hpp"
#include "spikebench/metrics.hpp"
#include "spikebench/snn.hpp"

namespace fs = std::filesystem;
using namespace spikebench;

namespace {

struct Options {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string codec;
  std::string out = "out";
  std::string input;
  std::vector<std::string> inputs;
  std::string features;
};

RunConfig resolve_config(const Options& o) {
  RunConfig cfg = o.config.empty() ? parse_run_config("{}") : load_run_config(o.config);
  if (o.seed) cfg.seed = *o.seed;
  if (!o.codec.empty()) cfg.codecs = {parse_codec(o.codec)};
  cfg.output_dir = o.out;
  return cfg;
}

std::string stem_of(const std::string& path) { return fs::path(path).stem().string(); }

int cmd_synth(const Options& o) {
  const RunConfig cfg = resolve_config(o);
  const SyntheticCorpus corpus = generate_synthetic(cfg.synthetic, cfg.seed);
  write_corpus(corpus, o.out);
  std::cout << "wrote " << corpus.clips.size() << " clips in " << corpus.manifest.labels.size()
            << " classes to " << (fs::path(o.out) / "manifest.csv").string() << "\n";
  return 0;
}

int cmd_manifest(const Options& o) {
  if (o.config.empty()) throw ConfigError("manifest needs --config <rules.json>");
  std::ifstream in(o.config);
  if (!in) throw ConfigError(o.config + ": cannot open rules");
  std::stringstream ss;
  ss << in.rdbuf();
  const Manifest m = build_manifest(o.input, parse_dataset_rules(ss.str()));
  fs::path out = o.out;
  if (fs::is_directory(out)) out /= "manifest.csv";
  write_manifest_csv(out, m);
  std::cout << m.entries.size() << " entries, " << m.labels.size() << " classes\n";
  for (const auto& [key, count] : m.fold_class_counts) {
    std::cout << "  fold " << (key.first < 0 ? std::string("-") : std::to_string(key.first))
              << "  " << key.second << ": " << count << "\n";
  }
  return 0;
}

int cmd_encode(const Options& o) {
  const RunConfig cfg = resolve_config(o);
  Waveform w = load_audio(o.input, cfg.frontend.sample_rate);
  if (cfg.crop_s) w = center_crop(w, *cfg.crop_s);
  const FeatureMatrix f = mel_spectrogram(w, cfg.frontend);
  fs::create_directories(o.out);
  const fs::path base = fs::path(o.out) / stem_of(o.input);
  write_features(base.string() + ".spkf", f);
  for (Codec c : cfg.codecs) {
    const SpikeTrain st = encode_matrix(f, cfg.params_for(c), c);
    std::string name = codec_name(c);
    std::transform(name.begin(), name.end(), name.begin(), ::tolower);
    write_spikes(base.string() + "." + name + ".spks", st);
    std::cout << codec_name(c) << ": " << st.channels() << "x" << st.frames()
              << " firing rate " << format_fixed(firing_rate(st), 2) << "%\n";
  }
  return 0;
}

int cmd_reconstruct(const Options& o) {
  const RunConfig cfg = resolve_config(o);
  const SpikeTrain st = read_spikes(o.input);
  FeatureMatrix rec;
  rec.values = decode_matrix(st);
  std::optional<FeatureMatrix> reference;
  if (!o.features.empty()) reference = read_features(o.features);
  if (reference) {
    rec.channel_center_hz = reference->channel_center_hz;
    rec.norm_state = reference->norm_state;
    rec.frame_rate = reference->frame_rate;
  } else {
    rec.channel_center_hz = MelFrontend(cfg.frontend).filterbank().center_hz;
    rec.norm_state.assign(st.channels(), NormState{0.0, 1.0});
    rec.frame_rate = static_cast<double>(cfg.frontend.sample_rate) / cfg.frontend.hop;
  }
  if (rec.channel_center_hz.size() != st.channels()) {
    throw DataError("channel count does not match the front-end configuration");
  }
  fs::create_directories(o.out);
  std::string stem = stem_of(o.input);
  const fs::path out = fs::path(o.out) / (stem + ".recon.spkf");
  write_features(out, rec);
  std::cout << "wrote " << out.string() << "\n";
  if (reference) {
    if (!reference->values.same_shape(rec.values)) {
      throw DataError("reference features differ in shape from the spike train");
    }
    const auto bands = partition_bands(rec.channel_center_hz);
    const auto scores = score_per_band(reference->values, rec.values, bands);
    std::vector<BandRow> rows;
    for (std::size_t b = 0; b < kNumBands; ++b) {
      BandRow row{st.codec, static_cast<int>(b), std::nullopt, std::nullopt};
      if (scores[b]) {
        row.errdb = scores[b]->errdb;
        row.snr = scores[b]->snr;
      }
      rows.push_back(row);
    }
    const std::string csv = per_band_csv(rows);
    std::ofstream(fs::path(o.out) / (stem + ".per_band.csv")) << csv;
    std::cout << csv << "overall errdb " << format_fixed(errdb(reference->values, rec.values), 3)
              << " dB\n";
  }
  return 0;
}

int cmd_bench(const Options& o) {
  const RunConfig cfg = resolve_config(o);
  const BenchReport report = run_bench_to_disk(cfg);
  for (const auto& e : report.efficiency) {
    std::cout << codec_name(e.codec) << ": firing rate " << format_fixed(e.firing_rate_pct, 2)
              << "%, encode " << format_fixed(e.encode_ms, 3) << " ms, " << e.aux_bytes
              << " bytes\n";
  }
  for (const auto& c : report.classification) {
    if (c.fold == "mean") {
      std::cout << codec_name(c.codec) << ": macro accuracy " << format_fixed(c.macro_acc, 3)
                << "\n";
    }
  }
  std::cout << "reports written to " << cfg.output_dir.string() << "\n";
  return 0;
}

int cmd_train(const Options& o) {
  RunConfig cfg = resolve_config(o);
  if (o.codec.empty()) cfg.codecs = {Codec::kThresholdAdaptive};
  const Codec codec = cfg.codecs.front();
  const LoadedDataset ds = load_dataset(cfg);
  const MelFrontend frontend(cfg.frontend);
  std::map<std::string, int> label_index;
  for (std::size_t i = 0; i < ds.manifest.labels.size(); ++i) {
    label_index[ds.manifest.labels[i]] = static_cast<int>(i);
  }
  std::vector<ProtocolClip> clips;
  for (std::size_t i = 0; i < ds.clips.size(); ++i) {
    const auto& e = ds.manifest.entries[i];
    const SpikeTrain st = encode_matrix(frontend.compute(ds.clips[i]), cfg.params_for(codec), codec);
    clips.push_back({make_sample(st, label_index.at(e.class_label)), e.fold, e.split});
  }
  SnnConfig snn = cfg.snn;
  snn.input_size = cfg.frontend.n_mels;
  snn.output_size = static_cast<int>(ds.manifest.labels.size());
  snn.seed = cfg.seed;
  fs::create_directories(o.out);
  const Protocol protocol =
      ds.manifest.cross_validation() ? Protocol::kCrossValidation : Protocol::kHoldout;
  const ProtocolResult result =
      run_protocol(clips, protocol, snn, [&](const FoldResult& fold, const SpikingNetwork& net) {
        save_checkpoint(fs::path(o.out) / ("model_" + fold.name + ".spkn"), net);
        std::ofstream log(fs::path(o.out) / ("train_log_" + fold.name + ".csv"));
        log << "epoch,split,loss,macro_acc\n";
        for (const auto& row : fold.log) {
          log << row.epoch << "," << row.split << "," << format_fixed(row.loss) << ","
              << format_fixed(row.macro_acc) << "\n";
        }
        std::cout << fold.name << ": macro accuracy " << format_fixed(fold.macro_acc, 3) << "\n";
      });
  std::vector<ClassificationRow> rows;
  for (const auto& f : result.folds) rows.push_back({codec, ds.name, f.name, f.macro_acc});
  rows.push_back({codec, ds.name, "mean", result.mean_macro_acc});
  std::ofstream(fs::path(o.out) / "classification.csv") << classification_csv(rows);
  std::cout << codec_name(codec) << " mean macro accuracy "
            << format_fixed(result.mean_macro_acc, 3) << "\n";
  return 0;
}

int cmd_compare(const Options& o) {
  std::vector<BenchReport> reports;
  for (const auto& dir : o.inputs) reports.push_back(read_report(dir));
  const Comparison c = compare_reports(reports);
  const std::string csv = comparison_csv(c);
  fs::create_directories(o.out);
  std::ofstream(fs::path(o.out) / "compare.csv") << csv;
  std::cout << csv;
  std::size_t bands = 0;
  for (const auto& r : c.rankings) bands += r.scope == "band";
  for (const auto& [name, wins] : c.band_wins) {
    std::cout << name << " wins " << wins << "/" << bands << " bands\n";
  }
  if (!c.firing_rate_winner.empty()) {
    std::cout << "lowest firing rate: " << c.firing_rate_winner << "\n";
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Spike encoding benchmark for environmental sound"};
  app.require_subcommand(1);
  Options o;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", o.config, "JSON run configuration");
    sub->add_option("--seed", o.seed, "Seed overriding the config");
    sub->add_option("--codec", o.codec, "Restrict to one codec")
        ->check(CLI::IsMember({"sf", "mw", "tae"}, CLI::ignore_case));
    sub->add_option("--out", o.out, "Output directory");
  };

  auto* synth = app.add_subcommand("synth", "Write the synthetic corpus and its manifest");
  add_common(synth);
  auto* manifest = app.add_subcommand("manifest", "Build a manifest from a directory and rules");
  add_common(manifest);
  manifest->add_option("root", o.input, "Dataset root directory")->required();
  auto* encode = app.add_subcommand("encode", "Encode one WAV file into spike trains");
  add_common(encode);
  encode->add_option("wav", o.input, "Input WAV file")->required();
  auto* reconstruct = app.add_subcommand("reconstruct", "Decode a spike train");
  add_common(reconstruct);
  reconstruct->add_option("spikes", o.input, "Input .spks file")->required();
  reconstruct->add_option("--features", o.features, "Reference .spkf for scoring");
  auto* bench = app.add_subcommand("bench", "Run the full benchmark");
  add_common(bench);
  auto* train = app.add_subcommand("train", "Train and evaluate the SNN classifier");
  add_common(train);
  auto* compare = app.add_subcommand("compare", "Rank codecs across report directories");
  add_common(compare);
  compare->add_option("reports", o.inputs, "Report directories")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (*synth) return cmd_synth(o);
    if (*manifest) return cmd_manifest(o);
    if (*encode) return cmd_encode(o);
    if (*reconstruct) return cmd_reconstruct(o);
    if (*bench) return cmd_bench(o);
    if (*train) return cmd_train(o);
    if (*compare) return cmd_compare(o);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return e.exit_code();
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
