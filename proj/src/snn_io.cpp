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

#include "binary_io.hpp"
#include "json.hpp"
#include "spikebench/error.hpp"
#include "spikebench/snn.hpp"

namespace spikebench {

std::string snn_config_json(const SnnConfig& cfg) {
  nlohmann::ordered_json j;
  j["input_size"] = cfg.input_size;
  j["hidden_sizes"] = cfg.hidden_sizes;
  j["output_size"] = cfg.output_size;
  j["beta"] = cfg.beta;
  j["theta"] = cfg.theta;
  j["surrogate_slope"] = cfg.surrogate_slope;
  j["lr"] = cfg.lr;
  j["batch_size"] = cfg.batch_size;
  j["epochs"] = cfg.epochs;
  j["seed"] = cfg.seed;
  return j.dump();
}

SnnConfig snn_config_from_json(const std::string& text) {
  SnnConfig cfg;
  try {
    const auto j = nlohmann::json::parse(text);
    cfg.input_size = j.at("input_size").get<int>();
    cfg.hidden_sizes = j.at("hidden_sizes").get<std::vector<int>>();
    cfg.output_size = j.at("output_size").get<int>();
    cfg.beta = j.at("beta").get<double>();
    cfg.theta = j.at("theta").get<double>();
    cfg.surrogate_slope = j.at("surrogate_slope").get<double>();
    cfg.lr = j.at("lr").get<double>();
    cfg.batch_size = j.at("batch_size").get<int>();
    cfg.epochs = j.at("epochs").get<int>();
    cfg.seed = j.at("seed").get<std::uint64_t>();
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("bad network config: ") + e.what());
  }
  cfg.validate();
  return cfg;
}

void save_checkpoint(const std::filesystem::path& path, const SpikingNetwork& net) {
  detail::ByteWriter w;
  w.raw("SPKN1");
  const std::string cfg = snn_config_json(net.config());
  w.u32(static_cast<std::uint32_t>(cfg.size()));
  w.raw(cfg);
  w.u32(static_cast<std::uint32_t>(net.weights().size()));
  for (const auto& m : net.weights()) {
    w.u32(static_cast<std::uint32_t>(m.rows()));
    w.u32(static_cast<std::uint32_t>(m.cols()));
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
      for (Eigen::Index c = 0; c < m.cols(); ++c) w.f32(static_cast<float>(m(r, c)));
    }
  }
  detail::write_file(path.string(), w.bytes());
}

SpikingNetwork load_checkpoint(const std::filesystem::path& path) {
  const auto bytes = detail::read_file(path.string());
  detail::ByteReader r(bytes, path.string());
  r.expect("SPKN1");
  const std::size_t len = r.u32();
  const auto blob = r.take(len);
  SpikingNetwork net(snn_config_from_json(std::string(blob.begin(), blob.end())));
  const std::size_t layers = r.u32();
  if (layers != net.weights().size()) {
    throw DataError(path.string() + ": layer count does not match its config");
  }
  for (auto& m : net.weights()) {
    const auto rows = static_cast<Eigen::Index>(r.u32());
    const auto cols = static_cast<Eigen::Index>(r.u32());
    if (rows != m.rows() || cols != m.cols()) {
      throw DataError(path.string() + ": weight shape does not match its config");
    }
    for (Eigen::Index i = 0; i < rows; ++i) {
      for (Eigen::Index j = 0; j < cols; ++j) m(i, j) = r.f32();
    }
  }
  if (!r.done()) throw DataError(path.string() + ": trailing bytes after weights");
  return net;
}

}  // namespace spikebench
