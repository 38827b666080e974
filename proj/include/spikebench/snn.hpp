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

#ifndef SPIKEBENCH_SNN_HPP_
#define SPIKEBENCH_SNN_HPP_

#include <Eigen/Dense>

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "spikebench/codec.hpp"
#include "spikebench/ingest.hpp"

namespace spikebench {

struct SnnConfig {
  int input_size = 128;
  std::vector<int> hidden_sizes = {128, 128, 128};
  int output_size = 2;
  double beta = 0.9;
  double theta = 1.0;
  double surrogate_slope = 25.0;
  double lr = 0.01;
  int batch_size = 32;
  int epochs = 100;
  std::uint64_t seed = 0;
  int threads = 1;  // per-sample gradients are reduced in a fixed order

  void validate() const;
  std::vector<int> layer_sizes() const;  // input, hidden..., output
};

/// Membrane state of one LIF layer.
struct LifState {
  Eigen::VectorXd membrane;
  double beta = 0.9;
  double theta = 1.0;
};

/// U' = beta U + I; spike where U' >= theta; reset by subtracting theta.
std::pair<Eigen::VectorXd, LifState> lif_step(const LifState& state,
                                               const Eigen::VectorXd& input_current);

/// Heaviside for normal operation. kSmooth replaces the step with
/// x / (1 + k|x|), whose derivative is exactly the fast-sigmoid surrogate;
/// it exists so gradients can be checked against finite differences.
enum class SpikeFunction { kHeaviside, kSmooth };

/// Fast-sigmoid surrogate derivative 1 / (1 + k|x|)^2.
double surrogate_grad(double x, double slope);

/// One clip ready for the network: input is channels x frames with the
/// signed codec spikes as currents.
struct Sample {
  Eigen::MatrixXd input;
  int label = 0;
};

Sample make_sample(const SpikeTrain& st, int label);

struct ForwardResult {
  Eigen::VectorXd counts;                    // output spikes summed over frames
  std::vector<Eigen::MatrixXd> layer_spikes;  // per layer, neurons x frames
};

/// Bias-free fully connected LIF stack.
class SpikingNetwork {
 public:
  /// Weights uniform in +/- sqrt(1 / fan_in), drawn from cfg.seed.
  explicit SpikingNetwork(const SnnConfig& cfg);

  const SnnConfig& config() const { return cfg_; }
  std::vector<Eigen::MatrixXd>& weights() { return weights_; }
  const std::vector<Eigen::MatrixXd>& weights() const { return weights_; }

  ForwardResult forward(const Eigen::MatrixXd& input,
                        SpikeFunction fn = SpikeFunction::kHeaviside) const;

  /// Cross-entropy of softmax(counts) for one sample; accumulates
  /// d loss / d weights (BPTT) into `grads`, scaled by `scale`.
  double loss_and_gradient(const Sample& sample, std::vector<Eigen::MatrixXd>& grads,
                           double scale = 1.0,
                           SpikeFunction fn = SpikeFunction::kHeaviside,
                           Eigen::VectorXd* counts = nullptr) const;

  double loss(const Sample& sample, SpikeFunction fn = SpikeFunction::kHeaviside) const;

  /// argmax of output counts, lowest index on ties.
  int predict(const Eigen::MatrixXd& input) const;

  std::vector<Eigen::MatrixXd> zero_gradients() const;

 private:
  SnnConfig cfg_;
  std::vector<Eigen::MatrixXd> weights_;  // layer l maps sizes[l] -> sizes[l+1]
};

/// Adam with the usual bias correction.
class Adam {
 public:
  Adam(const std::vector<Eigen::MatrixXd>& shapes, double lr, double beta1 = 0.9,
       double beta2 = 0.999, double eps = 1e-8);

  void step(std::vector<Eigen::MatrixXd>& params, const std::vector<Eigen::MatrixXd>& grads);

 private:
  double lr_, beta1_, beta2_, eps_;
  long long t_ = 0;
  std::vector<Eigen::MatrixXd> m_, v_;
};

struct EpochLog {
  int epoch = 0;
  std::string split;  // "train" or "test"
  double loss = 0.0;
  double macro_acc = 0.0;
};

struct TrainOptions {
  /// Stop once a full pass over the training set reaches this macro accuracy.
  std::optional<double> stop_at_accuracy;
  /// Evaluated once after training and logged as split "test".
  std::span<const Sample> test_set;
};

struct TrainResult {
  std::vector<double> loss_curve;  // mean training loss per epoch
  std::vector<EpochLog> log;
  int epochs_run = 0;
};

TrainResult train(SpikingNetwork& net, std::span<const Sample> train_set,
                  const SnnConfig& cfg, const TrainOptions& options = {});

struct MacroResult {
  double macro_accuracy = 0.0;
  std::vector<double> recall;  // per class; NaN for classes absent from the set
};

/// Mean of per-class recall over the classes that occur in `labels`.
MacroResult macro_accuracy(std::span<const int> predictions, std::span<const int> labels,
                           int n_classes);

MacroResult evaluate_macro(const SpikingNetwork& net, std::span<const Sample> test_set);

enum class Protocol { kCrossValidation, kHoldout };

struct ProtocolClip {
  Sample sample;
  std::optional<int> fold;
  Split split = Split::kTrain;
};

struct FoldResult {
  std::string name;  // "fold<k>" or "holdout"
  double macro_acc = 0.0;
  std::vector<EpochLog> log;
};

struct ProtocolResult {
  std::vector<FoldResult> folds;
  double mean_macro_acc = 0.0;
};

/// Called after each fold with its trained network.
using FoldCallback = std::function<void(const FoldResult&, const SpikingNetwork&)>;

/// Cross-validation trains on all other folds and tests on each held-out
/// fold in ascending order; holdout uses the train/test split.
ProtocolResult run_protocol(std::span<const ProtocolClip> clips, Protocol protocol,
                            const SnnConfig& cfg, const FoldCallback& on_fold = {});

// Checkpoint: `SPKN1`, u32 length + config JSON, u32 layer count, then per
// layer u32 rows, u32 cols and row-major float32 weights.
void save_checkpoint(const std::filesystem::path& path, const SpikingNetwork& net);
SpikingNetwork load_checkpoint(const std::filesystem::path& path);

std::string snn_config_json(const SnnConfig& cfg);
SnnConfig snn_config_from_json(const std::string& text);

}  // namespace spikebench

#endif  // SPIKEBENCH_SNN_HPP_
