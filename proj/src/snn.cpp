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
#include <cmath>
#include <numeric>
#include <random>
#include <set>
#include <thread>

#include "spikebench/error.hpp"
#include "spikebench/snn.hpp"

namespace spikebench {
namespace {

double uniform01(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

// Fisher-Yates with raw engine output; std::shuffle is implementation-defined.
void shuffle(std::vector<std::size_t>& v, std::mt19937_64& rng) {
  for (std::size_t i = v.size(); i > 1; --i) {
    const std::size_t j = static_cast<std::size_t>(rng() % i);
    std::swap(v[i - 1], v[j]);
  }
}

double spike_value(double x, SpikeFunction fn, double slope) {
  if (fn == SpikeFunction::kHeaviside) return x >= 0.0 ? 1.0 : 0.0;
  return x / (1.0 + slope * std::abs(x));
}

double log_sum_exp(const Eigen::VectorXd& v) {
  const double m = v.maxCoeff();
  return m + std::log((v.array() - m).exp().sum());
}

int argmax_lowest(const Eigen::VectorXd& v) {
  int best = 0;
  for (int i = 1; i < v.size(); ++i) {
    if (v[i] > v[best]) best = i;
  }
  return best;
}

}  // namespace

void SnnConfig::validate() const {
  if (input_size < 1 || output_size < 1) throw ConfigError("layer sizes must be positive");
  for (int h : hidden_sizes) {
    if (h < 1) throw ConfigError("layer sizes must be positive");
  }
  if (!(beta > 0.0 && beta < 1.0)) throw ConfigError("beta must lie in (0, 1)");
  if (!(theta > 0.0)) throw ConfigError("theta must be positive");
  if (!(surrogate_slope > 0.0)) throw ConfigError("surrogate slope must be positive");
  if (!(lr >= 0.0)) throw ConfigError("learning rate must be nonnegative");
  if (batch_size < 1) throw ConfigError("batch size must be at least 1");
  if (epochs < 1) throw ConfigError("epochs must be at least 1");
  if (threads < 1) throw ConfigError("threads must be at least 1");
}

std::vector<int> SnnConfig::layer_sizes() const {
  std::vector<int> sizes{input_size};
  sizes.insert(sizes.end(), hidden_sizes.begin(), hidden_sizes.end());
  sizes.push_back(output_size);
  return sizes;
}

std::pair<Eigen::VectorXd, LifState> lif_step(const LifState& state,
                                               const Eigen::VectorXd& input_current) {
  if (state.membrane.size() != input_current.size()) {
    throw DataError("LIF input size does not match layer size");
  }
  if (!input_current.allFinite()) throw NumericError("non-finite LIF input current");
  LifState next = state;
  next.membrane = state.beta * state.membrane + input_current;
  Eigen::VectorXd spikes = (next.membrane.array() >= state.theta).cast<double>();
  next.membrane -= state.theta * spikes;
  return {std::move(spikes), std::move(next)};
}

double surrogate_grad(double x, double slope) {
  const double d = 1.0 + slope * std::abs(x);
  return 1.0 / (d * d);
}

Sample make_sample(const SpikeTrain& st, int label) {
  Sample s;
  s.label = label;
  s.input.resize(static_cast<Eigen::Index>(st.channels()),
                 static_cast<Eigen::Index>(st.frames()));
  for (std::size_t c = 0; c < st.channels(); ++c) {
    for (std::size_t t = 0; t < st.frames(); ++t) {
      s.input(static_cast<Eigen::Index>(c), static_cast<Eigen::Index>(t)) = st.spikes(c, t);
    }
  }
  return s;
}

SpikingNetwork::SpikingNetwork(const SnnConfig& cfg) : cfg_(cfg) {
  cfg_.validate();
  const auto sizes = cfg_.layer_sizes();
  std::mt19937_64 rng(cfg_.seed);
  for (std::size_t l = 0; l + 1 < sizes.size(); ++l) {
    const double bound = std::sqrt(1.0 / sizes[l]);
    Eigen::MatrixXd w(sizes[l + 1], sizes[l]);
    // Fill row-major so the draw order matches the checkpoint layout.
    for (Eigen::Index r = 0; r < w.rows(); ++r) {
      for (Eigen::Index c = 0; c < w.cols(); ++c) {
        w(r, c) = (2.0 * uniform01(rng) - 1.0) * bound;
      }
    }
    weights_.push_back(std::move(w));
  }
}

std::vector<Eigen::MatrixXd> SpikingNetwork::zero_gradients() const {
  std::vector<Eigen::MatrixXd> g;
  g.reserve(weights_.size());
  for (const auto& w : weights_) g.push_back(Eigen::MatrixXd::Zero(w.rows(), w.cols()));
  return g;
}

ForwardResult SpikingNetwork::forward(const Eigen::MatrixXd& input, SpikeFunction fn) const {
  if (input.rows() != cfg_.input_size) {
    throw DataError("network input has " + std::to_string(input.rows()) +
                    " channels, expected " + std::to_string(cfg_.input_size));
  }
  const Eigen::Index frames = input.cols();
  ForwardResult out;
  std::vector<Eigen::VectorXd> membrane;
  for (const auto& w : weights_) {
    membrane.push_back(Eigen::VectorXd::Zero(w.rows()));
    out.layer_spikes.emplace_back(w.rows(), frames);
  }
  for (Eigen::Index t = 0; t < frames; ++t) {
    Eigen::VectorXd in = input.col(t);
    for (std::size_t l = 0; l < weights_.size(); ++l) {
      Eigen::VectorXd& u = membrane[l];
      u = cfg_.beta * u + weights_[l] * in;
      for (Eigen::Index i = 0; i < u.size(); ++i) {
        const double s = spike_value(u[i] - cfg_.theta, fn, cfg_.surrogate_slope);
        out.layer_spikes[l](i, t) = s;
        u[i] -= cfg_.theta * s;
      }
      if (!u.allFinite()) throw NumericError("non-finite membrane potential");
      in = out.layer_spikes[l].col(t);
    }
  }
  out.counts = out.layer_spikes.back().rowwise().sum();
  return out;
}

double SpikingNetwork::loss(const Sample& sample, SpikeFunction fn) const {
  const ForwardResult r = forward(sample.input, fn);
  return log_sum_exp(r.counts) - r.counts[sample.label];
}

int SpikingNetwork::predict(const Eigen::MatrixXd& input) const {
  return argmax_lowest(forward(input).counts);
}

double SpikingNetwork::loss_and_gradient(const Sample& sample,
                                         std::vector<Eigen::MatrixXd>& grads, double scale,
                                         SpikeFunction fn, Eigen::VectorXd* counts) const {
  if (sample.label < 0 || sample.label >= cfg_.output_size) {
    throw DataError("sample label outside the output layer");
  }
  const std::size_t layers = weights_.size();
  const Eigen::Index frames = sample.input.cols();
  const double theta = cfg_.theta;
  const double slope = cfg_.surrogate_slope;

  // Forward pass keeping the pre-spike membrane offsets for BPTT.
  std::vector<Eigen::MatrixXd> offset(layers);  // U' - theta
  std::vector<Eigen::MatrixXd> spikes(layers);
  std::vector<Eigen::VectorXd> membrane(layers);
  for (std::size_t l = 0; l < layers; ++l) {
    offset[l].resize(weights_[l].rows(), frames);
    spikes[l].resize(weights_[l].rows(), frames);
    membrane[l] = Eigen::VectorXd::Zero(weights_[l].rows());
  }
  for (Eigen::Index t = 0; t < frames; ++t) {
    for (std::size_t l = 0; l < layers; ++l) {
      Eigen::VectorXd& u = membrane[l];
      if (l == 0) {
        u = cfg_.beta * u + weights_[0] * sample.input.col(t);
      } else {
        u = cfg_.beta * u + weights_[l] * spikes[l - 1].col(t);
      }
      for (Eigen::Index i = 0; i < u.size(); ++i) {
        const double x = u[i] - theta;
        const double s = spike_value(x, fn, slope);
        offset[l](i, t) = x;
        spikes[l](i, t) = s;
        u[i] -= theta * s;
      }
      if (!u.allFinite()) throw NumericError("non-finite membrane potential");
    }
  }
  const Eigen::VectorXd out_counts = spikes.back().rowwise().sum();
  if (counts) *counts = out_counts;
  const double lse = log_sum_exp(out_counts);
  const double loss = lse - out_counts[sample.label];

  Eigen::VectorXd d_counts = (out_counts.array() - lse).exp().matrix();
  d_counts[sample.label] -= 1.0;
  d_counts *= scale;

  // Backward through time. carry[l] is d loss / d U''[t] for the current t.
  std::vector<Eigen::MatrixXd> d_pre(layers);  // d loss / d U'
  std::vector<Eigen::VectorXd> carry(layers);
  for (std::size_t l = 0; l < layers; ++l) {
    d_pre[l].resize(weights_[l].rows(), frames);
    carry[l] = Eigen::VectorXd::Zero(weights_[l].rows());
  }
  Eigen::VectorXd d_spike;
  for (Eigen::Index t = frames - 1; t >= 0; --t) {
    for (std::size_t l = layers; l-- > 0;) {
      if (l + 1 == layers) {
        d_spike = d_counts;
      } else {
        d_spike.noalias() = weights_[l + 1].transpose() * d_pre[l + 1].col(t);
      }
      d_spike -= theta * carry[l];  // reset by subtraction
      for (Eigen::Index i = 0; i < d_spike.size(); ++i) {
        d_pre[l](i, t) = carry[l][i] + d_spike[i] * surrogate_grad(offset[l](i, t), slope);
      }
      carry[l] = cfg_.beta * d_pre[l].col(t);
    }
  }
  grads[0].noalias() += d_pre[0] * sample.input.transpose();
  for (std::size_t l = 1; l < layers; ++l) {
    grads[l].noalias() += d_pre[l] * spikes[l - 1].transpose();
  }
  return loss;
}

Adam::Adam(const std::vector<Eigen::MatrixXd>& shapes, double lr, double beta1, double beta2,
           double eps)
    : lr_(lr), beta1_(beta1), beta2_(beta2), eps_(eps) {
  for (const auto& p : shapes) {
    m_.push_back(Eigen::MatrixXd::Zero(p.rows(), p.cols()));
    v_.push_back(Eigen::MatrixXd::Zero(p.rows(), p.cols()));
  }
}

void Adam::step(std::vector<Eigen::MatrixXd>& params, const std::vector<Eigen::MatrixXd>& grads) {
  ++t_;
  const double c1 = 1.0 - std::pow(beta1_, static_cast<double>(t_));
  const double c2 = 1.0 - std::pow(beta2_, static_cast<double>(t_));
  for (std::size_t i = 0; i < params.size(); ++i) {
    m_[i] = beta1_ * m_[i] + (1.0 - beta1_) * grads[i];
    v_[i] = beta2_ * v_[i] + (1.0 - beta2_) * grads[i].cwiseProduct(grads[i]);
    params[i].array() -=
        lr_ * (m_[i].array() / c1) / ((v_[i].array() / c2).sqrt() + eps_);
  }
}

MacroResult macro_accuracy(std::span<const int> predictions, std::span<const int> labels,
                           int n_classes) {
  if (labels.empty()) throw DataError("macro accuracy of an empty set");
  if (predictions.size() != labels.size()) {
    throw DataError("prediction and label counts differ");
  }
  std::vector<std::size_t> hits(static_cast<std::size_t>(n_classes), 0);
  std::vector<std::size_t> totals(static_cast<std::size_t>(n_classes), 0);
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] < 0 || labels[i] >= n_classes) throw DataError("label outside class range");
    const auto y = static_cast<std::size_t>(labels[i]);
    ++totals[y];
    hits[y] += predictions[i] == labels[i];
  }
  MacroResult r;
  r.recall.assign(static_cast<std::size_t>(n_classes), std::nan(""));
  double sum = 0.0;
  int present = 0;
  for (std::size_t c = 0; c < totals.size(); ++c) {
    if (totals[c] == 0) continue;
    r.recall[c] = static_cast<double>(hits[c]) / static_cast<double>(totals[c]);
    sum += r.recall[c];
    ++present;
  }
  r.macro_accuracy = sum / present;
  return r;
}

MacroResult evaluate_macro(const SpikingNetwork& net, std::span<const Sample> test_set) {
  if (test_set.empty()) throw DataError("cannot evaluate on an empty test set");
  std::vector<int> predictions;
  std::vector<int> labels;
  for (const auto& s : test_set) {
    predictions.push_back(net.predict(s.input));
    labels.push_back(s.label);
  }
  return macro_accuracy(predictions, labels, net.config().output_size);
}

TrainResult train(SpikingNetwork& net, std::span<const Sample> train_set, const SnnConfig& cfg,
                  const TrainOptions& options) {
  cfg.validate();
  if (train_set.empty()) throw DataError("training set is empty");
  const int n_classes = net.config().output_size;
  std::vector<std::size_t> per_class(static_cast<std::size_t>(n_classes), 0);
  for (const auto& s : train_set) {
    if (s.label < 0 || s.label >= n_classes) throw DataError("label outside class range");
    ++per_class[static_cast<std::size_t>(s.label)];
  }
  for (int c = 0; c < n_classes; ++c) {
    if (per_class[static_cast<std::size_t>(c)] == 0) {
      throw DataError("class " + std::to_string(c) + " has no training samples");
    }
  }

  Adam adam(net.weights(), cfg.lr);
  std::mt19937_64 rng(cfg.seed ^ 0x5851F42D4C957F2DULL);
  std::vector<std::size_t> order(train_set.size());
  std::iota(order.begin(), order.end(), 0);

  TrainResult result;
  const auto batch = static_cast<std::size_t>(cfg.batch_size);
  const auto threads = static_cast<std::size_t>(cfg.threads);
  for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
    shuffle(order, rng);
    double epoch_loss = 0.0;
    std::vector<int> predictions(train_set.size());
    std::vector<int> labels(train_set.size());
    for (std::size_t start = 0; start < order.size(); start += batch) {
      const std::size_t n = std::min(batch, order.size() - start);
      const double scale = 1.0 / static_cast<double>(n);
      std::vector<std::vector<Eigen::MatrixXd>> sample_grads(n);
      std::vector<double> losses(n);
      std::vector<Eigen::VectorXd> counts(n);
      auto work = [&](std::size_t first, std::size_t stride) {
        for (std::size_t i = first; i < n; i += stride) {
          sample_grads[i] = net.zero_gradients();
          losses[i] = net.loss_and_gradient(train_set[order[start + i]], sample_grads[i], scale,
                                            SpikeFunction::kHeaviside, &counts[i]);
        }
      };
      if (threads > 1 && n > 1) {
        std::vector<std::jthread> pool;
        for (std::size_t k = 0; k < std::min(threads, n); ++k) {
          pool.emplace_back(work, k, std::min(threads, n));
        }
      } else {
        work(0, 1);
      }
      std::vector<Eigen::MatrixXd> grads = net.zero_gradients();
      for (std::size_t i = 0; i < n; ++i) {
        if (!std::isfinite(losses[i])) {
          throw NumericError("NaN loss at epoch " + std::to_string(epoch) + ", sample " +
                             std::to_string(order[start + i]));
        }
        for (std::size_t l = 0; l < grads.size(); ++l) grads[l] += sample_grads[i][l];
        epoch_loss += losses[i];
        const std::size_t idx = start + i;
        predictions[idx] = argmax_lowest(counts[i]);
        labels[idx] = train_set[order[idx]].label;
      }
      adam.step(net.weights(), grads);
      for (const auto& w : net.weights()) {
        if (!w.allFinite()) throw NumericError("non-finite weights after update");
      }
    }
    const double mean_loss = epoch_loss / static_cast<double>(train_set.size());
    result.loss_curve.push_back(mean_loss);
    result.log.push_back(
        {epoch, "train", mean_loss, macro_accuracy(predictions, labels, n_classes).macro_accuracy});
    result.epochs_run = epoch;
    if (options.stop_at_accuracy &&
        evaluate_macro(net, train_set).macro_accuracy >= *options.stop_at_accuracy) {
      break;
    }
  }
  if (!options.test_set.empty()) {
    double loss = 0.0;
    for (const auto& s : options.test_set) loss += net.loss(s);
    result.log.push_back({result.epochs_run, "test",
                          loss / static_cast<double>(options.test_set.size()),
                          evaluate_macro(net, options.test_set).macro_accuracy});
  }
  return result;
}

ProtocolResult run_protocol(std::span<const ProtocolClip> clips, Protocol protocol,
                            const SnnConfig& cfg, const FoldCallback& on_fold) {
  if (clips.empty()) throw DataError("protocol run over an empty dataset");
  std::vector<std::pair<std::string, std::function<bool(const ProtocolClip&)>>> runs;
  if (protocol == Protocol::kCrossValidation) {
    std::set<int> folds;
    for (const auto& c : clips) {
      if (!c.fold) throw DataError("cross-validation requires a fold on every clip");
      folds.insert(*c.fold);
    }
    if (folds.size() < 2) throw DataError("cross-validation requires at least two folds");
    for (int f : folds) {
      runs.emplace_back("fold" + std::to_string(f),
                        [f](const ProtocolClip& c) { return *c.fold == f; });
    }
  } else {
    const bool has_train = std::any_of(clips.begin(), clips.end(),
                                       [](const auto& c) { return c.split == Split::kTrain; });
    const bool has_test = std::any_of(clips.begin(), clips.end(),
                                      [](const auto& c) { return c.split == Split::kTest; });
    if (!has_train || !has_test) {
      throw DataError("holdout protocol requires both train and test clips");
    }
    runs.emplace_back("holdout", [](const ProtocolClip& c) { return c.split == Split::kTest; });
  }

  ProtocolResult result;
  std::vector<double> accs;
  for (const auto& [name, is_test] : runs) {
    std::vector<Sample> train_set;
    std::vector<Sample> test_set;
    for (const auto& c : clips) (is_test(c) ? test_set : train_set).push_back(c.sample);
    SpikingNetwork net(cfg);
    TrainOptions options;
    options.test_set = test_set;
    TrainResult tr = train(net, train_set, cfg, options);
    FoldResult fold{name, tr.log.back().macro_acc, std::move(tr.log)};
    accs.push_back(fold.macro_acc);
    if (on_fold) on_fold(fold, net);
    result.folds.push_back(std::move(fold));
  }
  double sum = 0.0;
  for (double a : accs) sum += a;
  result.mean_macro_acc = sum / static_cast<double>(accs.size());
  return result;
}

}  // namespace spikebench
