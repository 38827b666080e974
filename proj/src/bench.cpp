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

#include <algorithm>
#include <bit>
#include <cstdio>
#include <exception>
#include <fstream>
#include <mutex>
#include <sstream>
#include <thread>

#include "binary_io.hpp"
#include "json.hpp"
#include "spikebench/error.hpp"
#include "spikebench/harness.hpp"

namespace spikebench {
namespace {

constexpr const char* kVersion = "0.1.0";

// Rethrows the in-flight exception with `context` prepended, keeping its
// category (and so the CLI exit code).
[[noreturn]] void rethrow_with(const std::string& context) {
  try {
    throw;
  } catch (const ConfigError& e) {
    throw ConfigError(context + ": " + e.what());
  } catch (const DataError& e) {
    throw DataError(context + ": " + e.what());
  } catch (const NumericError& e) {
    throw NumericError(context + ": " + e.what());
  } catch (const std::exception& e) {
    throw Error(context + ": " + e.what());
  }
}

// Runs fn(i) for i in [0, n). Results must be written by index; the first
// failing index (lowest) is the one reported.
template <typename Fn>
void parallel_for(std::size_t n, int threads, Fn fn) {
  std::size_t workers = threads > 0 ? static_cast<std::size_t>(threads)
                                    : std::max(1u, std::thread::hardware_concurrency());
  workers = std::min(workers, n);
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::vector<std::exception_ptr> errors(n);
  {
    std::vector<std::jthread> pool;
    for (std::size_t w = 0; w < workers; ++w) {
      pool.emplace_back([&, w] {
        for (std::size_t i = w; i < n; i += workers) {
          try {
            fn(i);
          } catch (...) {
            errors[i] = std::current_exception();
          }
        }
      });
    }
  }
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

class Fnv1a {
 public:
  void bytes(const void* p, std::size_t n) {
    const auto* b = static_cast<const unsigned char*>(p);
    for (std::size_t i = 0; i < n; ++i) {
      h_ ^= b[i];
      h_ *= 0x100000001B3ULL;
    }
  }
  void text(const std::string& s) {
    bytes(s.data(), s.size());
    bytes("\n", 1);
  }
  template <typename T>
  void value(T v) {
    bytes(&v, sizeof v);
  }
  std::string hex() const {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h_));
    return buf;
  }

 private:
  std::uint64_t h_ = 0xCBF29CE484222325ULL;
};

bool codec_name_less(Codec a, Codec b) { return codec_name(a) < codec_name(b); }

std::vector<std::string> split_line(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string field;
  while (std::getline(ss, field, ',')) out.push_back(field);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

std::vector<std::vector<std::string>> read_csv(const std::filesystem::path& path,
                                               const std::string& header) {
  std::ifstream in(path);
  if (!in) throw DataError(path.string() + ": cannot open report file");
  std::string line;
  if (!std::getline(in, line) || line != header) {
    throw DataError(path.string() + ": unexpected header");
  }
  std::vector<std::vector<std::string>> rows;
  const std::size_t width = split_line(header).size();
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    auto f = split_line(line);
    if (f.size() != width) throw DataError(path.string() + ": malformed row '" + line + "'");
    rows.push_back(std::move(f));
  }
  return rows;
}

double parse_number(const std::string& s, const std::filesystem::path& where) {
  try {
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (used != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw DataError(where.string() + ": bad number '" + s + "'");
  }
}

std::optional<double> parse_optional(const std::string& s, const std::filesystem::path& where) {
  if (s.empty()) return std::nullopt;
  return parse_number(s, where);
}

}  // namespace

std::string format_fixed(double v, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  std::string s = buf;
  if (s.starts_with("-") && s.find_first_not_of("-0.") == std::string::npos) s.erase(0, 1);
  return s;
}

LoadedDataset load_dataset(const RunConfig& cfg) {
  namespace fs = std::filesystem;
  LoadedDataset ds;
  if (cfg.dataset == "synthetic") {
    SyntheticCorpus corpus = generate_synthetic(cfg.synthetic, cfg.seed);
    ds.name = cfg.dataset_name.empty() ? "synthetic" : cfg.dataset_name;
    ds.manifest = std::move(corpus.manifest);
    ds.clips = std::move(corpus.clips);
    for (auto& clip : ds.clips) {
      if (clip.sample_rate != cfg.frontend.sample_rate) {
        clip.samples = resample(clip.samples, clip.sample_rate, cfg.frontend.sample_rate);
        clip.sample_rate = cfg.frontend.sample_rate;
      }
    }
  } else {
    fs::path path = cfg.dataset;
    if (path.is_relative()) path = cfg.base_dir / path;
    if (cfg.dataset.ends_with(".csv")) {
      ds.manifest = read_manifest_csv(path);
    } else {
      ds.manifest = build_manifest(path, *cfg.rules);
    }
    ds.name = cfg.dataset_name.empty() ? path.stem().string() : cfg.dataset_name;
    ds.clips.resize(ds.manifest.entries.size());
    parallel_for(ds.clips.size(), cfg.threads, [&](std::size_t i) {
      const fs::path clip_path = ds.manifest.resolve(ds.manifest.entries[i]);
      try {
        ds.clips[i] = load_audio(clip_path, cfg.frontend.sample_rate);
        ds.clips[i].source_path = ds.manifest.entries[i].path;
      } catch (...) {
        rethrow_with("clip " + clip_path.string());
      }
    });
  }
  const std::optional<double> crop =
      cfg.crop_s ? cfg.crop_s : (cfg.rules ? cfg.rules->crop_s : std::nullopt);
  if (crop) {
    for (auto& clip : ds.clips) {
      try {
        clip = center_crop(clip, *crop);
      } catch (...) {
        rethrow_with("clip " + clip.source_path);
      }
    }
  }
  if (ds.clips.empty()) throw DataError("dataset '" + ds.name + "' has no clips");

  Fnv1a h;
  for (std::size_t i = 0; i < ds.clips.size(); ++i) {
    const auto& e = ds.manifest.entries[i];
    h.text(e.path + "," + e.class_label + "," + (e.fold ? std::to_string(*e.fold) : "") +
           "," + to_string(e.split));
    h.value(ds.clips[i].sample_rate);
    for (double s : ds.clips[i].samples) h.value(std::bit_cast<std::uint64_t>(s));
  }
  const FrontendConfig& fe = cfg.frontend;
  h.value(fe.n_fft);
  h.value(fe.hop);
  h.value(fe.n_mels);
  h.value(fe.f_min);
  h.value(fe.f_max);
  h.value(static_cast<int>(fe.window));
  ds.fingerprint = h.hex();
  return ds;
}

BenchReport run_bench(const RunConfig& cfg) {
  cfg.validate();
  const LoadedDataset ds = load_dataset(cfg);
  const MelFrontend frontend(cfg.frontend);
  const std::size_t n = ds.clips.size();

  std::vector<FeatureMatrix> features(n);
  parallel_for(n, cfg.threads, [&](std::size_t i) {
    try {
      features[i] = frontend.compute(ds.clips[i]);
    } catch (...) {
      rethrow_with("clip " + ds.clips[i].source_path);
    }
  });
  const BandPartition bands = partition_bands(frontend.filterbank().center_hz);

  std::map<std::string, int> label_index;
  for (std::size_t i = 0; i < ds.manifest.labels.size(); ++i) {
    label_index[ds.manifest.labels[i]] = static_cast<int>(i);
  }

  std::vector<Codec> codecs = cfg.codecs;
  std::sort(codecs.begin(), codecs.end(), codec_name_less);

  BenchReport report;
  report.dataset = ds.name;
  report.fingerprint = ds.fingerprint;
  std::vector<ClassScore> class_scores;
  for (Codec codec : codecs) {
    const CodecConfig& params = cfg.params_for(codec);
    std::vector<SpikeTrain> trains(n);
    std::vector<std::array<std::optional<ReconScore>, kNumBands>> band_scores(n);
    std::vector<double> clip_errdb(n);
    std::vector<double> rates(n);
    parallel_for(n, cfg.threads, [&](std::size_t i) {
      try {
        trains[i] = encode_matrix(features[i], params, codec);
        const Matrix<double> rec = decode_matrix(trains[i]);
        band_scores[i] = score_per_band(features[i].values, rec, bands);
        clip_errdb[i] = errdb(features[i].values, rec);
        rates[i] = firing_rate(trains[i]);
      } catch (...) {
        rethrow_with("clip " + ds.clips[i].source_path + " (" + codec_name(codec) + ")");
      }
    });

    // Timing runs one clip at a time.
    std::vector<double> times;
    std::vector<double> bytes;
    for (std::size_t i = 0; i < n; ++i) {
      const EfficiencyStat stat =
          measure_encode_cost(features[i], params, codec, cfg.measure_repetitions);
      times.push_back(stat.encode_ms);
      bytes.push_back(static_cast<double>(stat.aux_bytes));
    }

    for (std::size_t b = 0; b < kNumBands; ++b) {
      std::vector<double> e;
      std::vector<double> s;
      for (const auto& scores : band_scores) {
        if (!scores[b]) continue;
        e.push_back(scores[b]->errdb);
        s.push_back(scores[b]->snr);
      }
      BandRow row{codec, static_cast<int>(b), std::nullopt, std::nullopt};
      if (!e.empty()) {
        row.errdb = stable_mean(e);
        row.snr = stable_mean(s);
      }
      report.per_band.push_back(row);
    }
    for (std::size_t i = 0; i < n; ++i) {
      class_scores.push_back({codec, ds.manifest.entries[i].class_label, clip_errdb[i]});
    }
    report.efficiency.push_back({codec, ds.name, stable_mean(rates), stable_mean(times),
                                 static_cast<std::size_t>(std::llround(stable_mean(bytes)))});

    if (cfg.classify) {
      std::vector<ProtocolClip> clips;
      clips.reserve(n);
      for (std::size_t i = 0; i < n; ++i) {
        const auto& e = ds.manifest.entries[i];
        clips.push_back({make_sample(trains[i], label_index.at(e.class_label)), e.fold, e.split});
      }
      SnnConfig snn = cfg.snn;
      snn.input_size = cfg.frontend.n_mels;
      snn.output_size = static_cast<int>(ds.manifest.labels.size());
      snn.seed = cfg.seed;
      const Protocol protocol = ds.manifest.cross_validation() ? Protocol::kCrossValidation
                                                                : Protocol::kHoldout;
      ProtocolResult result;
      try {
        result = run_protocol(clips, protocol, snn);
      } catch (...) {
        rethrow_with("classification (" + codec_name(codec) + ")");
      }
      for (const auto& f : result.folds) {
        report.classification.push_back({codec, ds.name, f.name, f.macro_acc});
      }
      report.classification.push_back({codec, ds.name, "mean", result.mean_macro_acc});
    }
  }
  report.per_class = score_per_class(class_scores);
  return report;
}

std::string per_band_csv(const std::vector<BandRow>& rows) {
  auto sorted = rows;
  std::stable_sort(sorted.begin(), sorted.end(), [](const BandRow& a, const BandRow& b) {
    return std::pair(codec_name(a.codec), a.band) < std::pair(codec_name(b.codec), b.band);
  });
  std::string out = "codec,band,errdb,snr\n";
  for (const auto& r : sorted) {
    out += codec_name(r.codec) + "," + std::to_string(r.band) + "," +
           (r.errdb ? format_fixed(*r.errdb) : "") + "," + (r.snr ? format_fixed(*r.snr) : "") +
           "\n";
  }
  return out;
}

std::string per_class_csv(const std::vector<ClassTableRow>& rows) {
  auto sorted = rows;
  std::stable_sort(sorted.begin(), sorted.end(), [](const auto& a, const auto& b) {
    return std::pair(codec_name(a.codec), a.class_label) <
           std::pair(codec_name(b.codec), b.class_label);
  });
  std::string out = "codec,class,errdb\n";
  for (const auto& r : sorted) {
    out += codec_name(r.codec) + "," + r.class_label + "," + format_fixed(r.mean_errdb) + "\n";
  }
  return out;
}

std::string efficiency_csv(const std::vector<EfficiencyRow>& rows) {
  auto sorted = rows;
  std::stable_sort(sorted.begin(), sorted.end(), [](const auto& a, const auto& b) {
    return std::pair(codec_name(a.codec), a.dataset) < std::pair(codec_name(b.codec), b.dataset);
  });
  std::string out = "codec,dataset,firing_rate_pct,encode_ms,aux_bytes\n";
  for (const auto& r : sorted) {
    out += codec_name(r.codec) + "," + r.dataset + "," + format_fixed(r.firing_rate_pct) + "," +
           format_fixed(r.encode_ms, 4) + "," + std::to_string(r.aux_bytes) + "\n";
  }
  return out;
}

std::string classification_csv(const std::vector<ClassificationRow>& rows) {
  std::string out = "codec,dataset,fold,macro_acc\n";
  for (const auto& r : rows) {
    out += codec_name(r.codec) + "," + r.dataset + "," + r.fold + "," +
           format_fixed(r.macro_acc) + "\n";
  }
  return out;
}

void write_report(const BenchReport& report, const RunConfig& cfg,
                  const std::filesystem::path& dir) {
  namespace fs = std::filesystem;
  std::vector<std::pair<std::string, std::string>> files = {
      {"per_band.csv", per_band_csv(report.per_band)},
      {"per_class.csv", per_class_csv(report.per_class)},
      {"efficiency.csv", efficiency_csv(report.efficiency)},
  };
  if (!report.classification.empty()) {
    files.emplace_back("classification.csv", classification_csv(report.classification));
  }
  nlohmann::ordered_json summary;
  summary["tool"] = "spikebench";
  summary["version"] = kVersion;
  summary["dataset"] = report.dataset;
  summary["fingerprint"] = report.fingerprint;
  summary["band_edges_hz"] = kBandEdgesHz;
  summary["config"] = nlohmann::ordered_json::parse(run_config_json(cfg));
  files.emplace_back("run_summary.json", summary.dump(2) + "\n");

  fs::create_directories(dir);
  std::vector<fs::path> written;
  try {
    for (const auto& [name, text] : files) {
      const fs::path path = dir / name;
      detail::write_text(path.string(), text);
      written.push_back(path);
    }
  } catch (...) {
    std::error_code ec;
    for (const auto& p : written) fs::remove(p, ec);
    throw;
  }
}

BenchReport run_bench_to_disk(const RunConfig& cfg) {
  try {
    BenchReport report = run_bench(cfg);
    write_report(report, cfg, cfg.output_dir);
    return report;
  } catch (...) {
    // A failed run leaves no report files behind, stale or partial.
    std::error_code ec;
    for (const char* name : {"per_band.csv", "per_class.csv", "efficiency.csv",
                             "classification.csv", "run_summary.json"}) {
      std::filesystem::remove(cfg.output_dir / name, ec);
    }
    throw;
  }
}

BenchReport read_report(const std::filesystem::path& dir) {
  BenchReport report;
  {
    const auto path = dir / "run_summary.json";
    std::ifstream in(path);
    if (!in) throw DataError(path.string() + ": cannot open report summary");
    try {
      const auto j = nlohmann::json::parse(in);
      report.dataset = j.at("dataset").get<std::string>();
      report.fingerprint = j.at("fingerprint").get<std::string>();
    } catch (const nlohmann::json::exception& e) {
      throw DataError(path.string() + ": " + e.what());
    }
  }
  auto codec_of = [](const std::string& s) {
    try {
      return parse_codec(s);
    } catch (const ConfigError& e) {
      throw DataError(e.what());
    }
  };
  const auto band_path = dir / "per_band.csv";
  for (const auto& f : read_csv(band_path, "codec,band,errdb,snr")) {
    report.per_band.push_back({codec_of(f[0]), static_cast<int>(parse_number(f[1], band_path)),
                               parse_optional(f[2], band_path), parse_optional(f[3], band_path)});
  }
  const auto class_path = dir / "per_class.csv";
  for (const auto& f : read_csv(class_path, "codec,class,errdb")) {
    report.per_class.push_back({codec_of(f[0]), f[1], parse_number(f[2], class_path), 0});
  }
  const auto eff_path = dir / "efficiency.csv";
  for (const auto& f :
       read_csv(eff_path, "codec,dataset,firing_rate_pct,encode_ms,aux_bytes")) {
    report.efficiency.push_back({codec_of(f[0]), f[1], parse_number(f[2], eff_path),
                                 parse_number(f[3], eff_path),
                                 static_cast<std::size_t>(parse_number(f[4], eff_path))});
  }
  const auto cls_path = dir / "classification.csv";
  if (std::filesystem::exists(cls_path)) {
    for (const auto& f : read_csv(cls_path, "codec,dataset,fold,macro_acc")) {
      report.classification.push_back({codec_of(f[0]), f[1], f[2], parse_number(f[3], cls_path)});
    }
  }
  return report;
}

}  // namespace spikebench
