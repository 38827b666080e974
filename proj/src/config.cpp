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

#include <fstream>
#include <set>
#include <sstream>

#include "json.hpp"
#include "spikebench/error.hpp"
#include "spikebench/harness.hpp"

namespace spikebench {
namespace {

using nlohmann::json;
using nlohmann::ordered_json;

constexpr const char* kOptimizer = "adam(0.9,0.999,1e-8)";

void reject_unknown(const json& obj, std::initializer_list<const char*> allowed,
                    const std::string& where) {
  if (!obj.is_object()) throw ConfigError(where + " must be a JSON object");
  const std::set<std::string> keys(allowed.begin(), allowed.end());
  for (const auto& item : obj.items()) {
    if (!keys.contains(item.key())) {
      throw ConfigError("unknown key '" + item.key() + "' in " + where);
    }
  }
}

template <typename T>
void read(const json& obj, const char* key, T& out, const std::string& where) {
  auto it = obj.find(key);
  if (it == obj.end()) return;
  try {
    out = it->get<T>();
  } catch (const json::exception&) {
    throw ConfigError(where + "." + key + " has the wrong type");
  }
}

FrontendConfig parse_frontend(const json& j) {
  reject_unknown(j, {"sample_rate", "n_fft", "hop", "n_mels", "f_min", "f_max", "window"},
                 "frontend");
  FrontendConfig f;
  read(j, "sample_rate", f.sample_rate, "frontend");
  read(j, "n_fft", f.n_fft, "frontend");
  read(j, "hop", f.hop, "frontend");
  read(j, "n_mels", f.n_mels, "frontend");
  read(j, "f_min", f.f_min, "frontend");
  read(j, "f_max", f.f_max, "frontend");
  std::string window = "hann";
  read(j, "window", window, "frontend");
  if (window == "hann") {
    f.window = WindowKind::kHann;
  } else if (window == "rectangular") {
    f.window = WindowKind::kRectangular;
  } else {
    throw ConfigError("frontend.window must be hann or rectangular");
  }
  return f;
}

CodecConfig parse_codec_config(const json& j, const std::string& where) {
  reject_unknown(j, {"threshold_rel", "window", "tae_gamma", "tae_tmin_rel", "tae_tmax_rel"},
                 where);
  CodecConfig c;
  read(j, "threshold_rel", c.threshold_rel, where);
  read(j, "window", c.window, where);
  read(j, "tae_gamma", c.tae_gamma, where);
  read(j, "tae_tmin_rel", c.tae_tmin_rel, where);
  read(j, "tae_tmax_rel", c.tae_tmax_rel, where);
  c.validate();
  return c;
}

void parse_snn(const json& j, RunConfig& cfg) {
  reject_unknown(j,
                 {"enabled", "hidden_sizes", "beta", "theta", "surrogate_slope", "lr",
                  "batch_size", "epochs", "threads", "optimizer"},
                 "snn");
  // The optimizer is fixed; the key exists so a parameter echo parses back.
  if (j.contains("optimizer") && j["optimizer"] != kOptimizer) {
    throw ConfigError("snn.optimizer: only " + std::string(kOptimizer) + " is supported");
  }
  read(j, "enabled", cfg.classify, "snn");
  read(j, "hidden_sizes", cfg.snn.hidden_sizes, "snn");
  read(j, "beta", cfg.snn.beta, "snn");
  read(j, "theta", cfg.snn.theta, "snn");
  read(j, "surrogate_slope", cfg.snn.surrogate_slope, "snn");
  read(j, "lr", cfg.snn.lr, "snn");
  read(j, "batch_size", cfg.snn.batch_size, "snn");
  read(j, "epochs", cfg.snn.epochs, "snn");
  read(j, "threads", cfg.snn.threads, "snn");
}

SyntheticSpec parse_synthetic(const json& j) {
  reject_unknown(j, {"n_clips", "classes", "duration_s", "sample_rate", "folds"}, "synthetic");
  SyntheticSpec s;
  read(j, "n_clips", s.n_clips, "synthetic");
  read(j, "classes", s.classes, "synthetic");
  read(j, "duration_s", s.duration_s, "synthetic");
  read(j, "sample_rate", s.sample_rate, "synthetic");
  read(j, "folds", s.folds, "synthetic");
  return s;
}

DatasetRules rules_from(const json& j) {
  reject_unknown(j,
                 {"labels", "excluded", "label_pattern", "label_map", "fold_pattern",
                  "split_pattern", "duration_s", "duration_tolerance_s", "crop_s",
                  "balance_folds", "extension"},
                 "rules");
  DatasetRules r;
  read(j, "labels", r.labels, "rules");
  read(j, "excluded", r.excluded, "rules");
  read(j, "label_pattern", r.label_pattern, "rules");
  read(j, "label_map", r.label_map, "rules");
  read(j, "fold_pattern", r.fold_pattern, "rules");
  read(j, "split_pattern", r.split_pattern, "rules");
  auto optional_seconds = [&](const char* key, std::optional<double>& out) {
    if (!j.contains(key) || j[key].is_null()) return;
    double v = 0.0;
    read(j, key, v, "rules");
    if (!(v > 0.0)) throw ConfigError(std::string("rules.") + key + " must be positive");
    out = v;
  };
  optional_seconds("duration_s", r.duration_s);
  optional_seconds("duration_tolerance_s", r.duration_tolerance_s);
  optional_seconds("crop_s", r.crop_s);
  read(j, "balance_folds", r.balance_folds, "rules");
  read(j, "extension", r.extension, "rules");
  return r;
}

json parse_json(const std::string& text, const char* what) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string(what) + ": " + e.what());
  }
}

ordered_json codec_config_json(const CodecConfig& c) {
  ordered_json j;
  j["threshold_rel"] = c.threshold_rel;
  j["window"] = c.window;
  j["tae_gamma"] = c.tae_gamma;
  j["tae_tmin_rel"] = c.tae_tmin_rel;
  j["tae_tmax_rel"] = c.tae_tmax_rel;
  return j;
}

}  // namespace

const CodecConfig& RunConfig::params_for(Codec c) const {
  static const CodecConfig kDefaults;
  auto it = codec_params.find(c);
  return it == codec_params.end() ? kDefaults : it->second;
}

void RunConfig::validate() const {
  if (codecs.empty()) throw ConfigError("at least one codec must be selected");
  for (const auto& [codec, p] : codec_params) p.validate();
  if (crop_s && !(*crop_s > 0.0)) throw ConfigError("crop_s must be positive");
  if (measure_repetitions < 5) throw ConfigError("measure_repetitions must be at least 5");
  if (threads < 0) throw ConfigError("threads must be nonnegative");
  // Probe the front-end parameters early so errors surface as config errors.
  mel_filterbank(frontend.n_mels, frontend.f_min, frontend.f_max, frontend.n_fft,
                 frontend.sample_rate);
  if (frontend.hop <= 0) throw ConfigError("frontend.hop must be positive");
  if (dataset == "synthetic") synthetic.validate();
  if (dataset != "synthetic" && !dataset.ends_with(".csv") && !rules) {
    throw ConfigError("a dataset directory needs a 'rules' block");
  }
  SnnConfig probe = snn;
  probe.input_size = frontend.n_mels;
  probe.output_size = 1;
  probe.validate();
}

RunConfig parse_run_config(const std::string& json_text, const std::filesystem::path& base_dir) {
  const json j = parse_json(json_text, "config");
  reject_unknown(j,
                 {"dataset", "dataset_name", "rules", "codecs", "frontend", "codec_params",
                  "crop_s", "snn", "synthetic", "seed", "measure_repetitions", "threads"},
                 "config");
  RunConfig cfg;
  cfg.base_dir = base_dir;
  read(j, "dataset", cfg.dataset, "config");
  read(j, "dataset_name", cfg.dataset_name, "config");
  if (j.contains("rules")) cfg.rules = rules_from(j["rules"]);
  if (j.contains("codecs")) {
    std::vector<std::string> names;
    read(j, "codecs", names, "config");
    cfg.codecs.clear();
    for (const auto& n : names) {
      const Codec c = parse_codec(n);
      if (std::find(cfg.codecs.begin(), cfg.codecs.end(), c) != cfg.codecs.end()) {
        throw ConfigError("codec '" + n + "' listed twice");
      }
      cfg.codecs.push_back(c);
    }
  }
  if (j.contains("frontend")) cfg.frontend = parse_frontend(j["frontend"]);
  if (j.contains("codec_params")) {
    const json& cp = j["codec_params"];
    for (const auto& item : cp.items()) {
      cfg.codec_params[parse_codec(item.key())] =
          parse_codec_config(item.value(), "codec_params." + item.key());
    }
  }
  if (j.contains("crop_s") && !j["crop_s"].is_null()) {
    double crop = 0.0;
    read(j, "crop_s", crop, "config");
    cfg.crop_s = crop;
  }
  if (j.contains("snn")) parse_snn(j["snn"], cfg);
  if (j.contains("synthetic")) cfg.synthetic = parse_synthetic(j["synthetic"]);
  read(j, "seed", cfg.seed, "config");
  read(j, "measure_repetitions", cfg.measure_repetitions, "config");
  read(j, "threads", cfg.threads, "config");
  cfg.validate();
  return cfg;
}

RunConfig load_run_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(path.string() + ": cannot open config");
  std::stringstream ss;
  ss << in.rdbuf();
  const auto dir = path.parent_path().empty() ? std::filesystem::path(".") : path.parent_path();
  return parse_run_config(ss.str(), dir);
}

DatasetRules parse_dataset_rules(const std::string& json_text) {
  return rules_from(parse_json(json_text, "rules"));
}

std::string run_config_json(const RunConfig& cfg) {
  ordered_json j;
  j["dataset"] = cfg.dataset;
  j["dataset_name"] = cfg.dataset_name;
  std::vector<std::string> codecs;
  for (Codec c : cfg.codecs) codecs.push_back(codec_name(c));
  j["codecs"] = codecs;
  ordered_json fe;
  fe["sample_rate"] = cfg.frontend.sample_rate;
  fe["n_fft"] = cfg.frontend.n_fft;
  fe["hop"] = cfg.frontend.hop;
  fe["n_mels"] = cfg.frontend.n_mels;
  fe["f_min"] = cfg.frontend.f_min;
  fe["f_max"] = cfg.frontend.f_max;
  fe["window"] = cfg.frontend.window == WindowKind::kHann ? "hann" : "rectangular";
  j["frontend"] = fe;
  ordered_json cp;
  for (Codec c : cfg.codecs) cp[codec_name(c)] = codec_config_json(cfg.params_for(c));
  j["codec_params"] = cp;
  j["crop_s"] = cfg.crop_s ? json(*cfg.crop_s) : json(nullptr);
  ordered_json snn;
  snn["enabled"] = cfg.classify;
  snn["hidden_sizes"] = cfg.snn.hidden_sizes;
  snn["beta"] = cfg.snn.beta;
  snn["theta"] = cfg.snn.theta;
  snn["surrogate_slope"] = cfg.snn.surrogate_slope;
  snn["lr"] = cfg.snn.lr;
  snn["batch_size"] = cfg.snn.batch_size;
  snn["epochs"] = cfg.snn.epochs;
  snn["optimizer"] = kOptimizer;
  j["snn"] = snn;
  if (cfg.dataset == "synthetic") {
    ordered_json s;
    s["n_clips"] = cfg.synthetic.n_clips;
    s["classes"] = cfg.synthetic.classes;
    s["duration_s"] = cfg.synthetic.duration_s;
    s["sample_rate"] = cfg.synthetic.sample_rate;
    s["folds"] = cfg.synthetic.folds;
    j["synthetic"] = s;
  }
  j["seed"] = cfg.seed;
  j["measure_repetitions"] = cfg.measure_repetitions;
  return j.dump(2);
}

}  // namespace spikebench
