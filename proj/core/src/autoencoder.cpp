// Copyright 2026 The Diarcluster Authors.
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

#include "diarcluster/autoencoder.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>
#include <stdexcept>

namespace diarcluster {

Activation AutoencoderParams::activation(int layer) const {
  const int produced = layer + 1;
  if (produced == encoder_layers()) return Activation::linear;  // bottleneck
  if (produced == n_layers()) return Activation::linear;        // output
  return Activation::relu;
}

std::size_t AutoencoderParams::n_params() const {
  std::size_t total = 0;
  for (const auto& w : weights) total += static_cast<std::size_t>(w.size());
  for (const auto& b : biases) total += static_cast<std::size_t>(b.size());
  return total;
}

void validate(const AutoencoderParams& params) {
  const std::size_t depth = params.layer_sizes.size();
  if (depth < 3 || depth % 2 == 0)
    throw std::invalid_argument(
        "layer_sizes must be an odd-length list input..bottleneck..output");
  for (std::size_t i = 0; i < depth; ++i) {
    if (params.layer_sizes[i] < 1)
      throw std::invalid_argument("layer sizes must be positive");
    if (params.layer_sizes[i] != params.layer_sizes[depth - 1 - i])
      throw std::invalid_argument("layer_sizes must mirror around the middle");
  }
  if (params.weights.size() != depth - 1 || params.biases.size() != depth - 1)
    throw std::invalid_argument("expected one weight and bias per layer");
  for (std::size_t l = 0; l + 1 < depth; ++l) {
    if (params.weights[l].rows() != params.layer_sizes[l] ||
        params.weights[l].cols() != params.layer_sizes[l + 1] ||
        params.biases[l].size() != params.layer_sizes[l + 1])
      throw std::invalid_argument("weight/bias shape mismatch at layer " +
                                  std::to_string(l));
    if (!params.weights[l].allFinite() || !params.biases[l].allFinite())
      throw std::invalid_argument("non-finite parameters at layer " +
                                  std::to_string(l));
  }
}

AutoencoderParams make_autoencoder(const std::vector<int>& layer_sizes,
                                   std::uint64_t seed) {
  AutoencoderParams params;
  params.layer_sizes = layer_sizes;
  const std::size_t n_layers = layer_sizes.size() - 1;
  params.weights.resize(n_layers);
  params.biases.resize(n_layers);
  Rng rng(seed);
  for (std::size_t l = 0; l < n_layers; ++l) {
    const int fan_in = layer_sizes[l];
    const int fan_out = layer_sizes[l + 1];
    const double limit = std::sqrt(6.0 / static_cast<double>(fan_in));
    params.weights[l].resize(fan_in, fan_out);
    for (Eigen::Index r = 0; r < fan_in; ++r)
      for (Eigen::Index c = 0; c < fan_out; ++c)
        params.weights[l](r, c) = rng.uniform(-limit, limit);
    params.biases[l] = Eigen::VectorXd::Zero(fan_out);
  }
  validate(params);
  return params;
}

ForwardCache ae_forward(const AutoencoderParams& params,
                        const Eigen::MatrixXd& batch, double dropout_rate,
                        Rng* rng) {
  if (batch.cols() != params.layer_sizes.front())
    throw std::invalid_argument(
        "batch dimension " + std::to_string(batch.cols()) +
        " does not match network input " +
        std::to_string(params.layer_sizes.front()));
  if (dropout_rate < 0.0 || dropout_rate >= 1.0)
    throw std::invalid_argument("dropout rate must be in [0, 1)");

  const int n_layers = params.n_layers();
  ForwardCache cache;
  cache.outputs.resize(static_cast<std::size_t>(n_layers) + 1);
  cache.dropout_masks.resize(static_cast<std::size_t>(n_layers));
  cache.outputs[0] = batch;
  for (int l = 0; l < n_layers; ++l) {
    Eigen::MatrixXd value =
        (cache.outputs[static_cast<std::size_t>(l)] * params.weights[l])
            .rowwise() +
        params.biases[l].transpose();
    if (params.activation(l) == Activation::relu)
      value = value.cwiseMax(0.0);
    const bool encoder_hidden = (l + 1) < params.encoder_layers();
    if (encoder_hidden && dropout_rate > 0.0 && rng != nullptr) {
      const double scale = 1.0 / (1.0 - dropout_rate);
      Eigen::MatrixXd mask(value.rows(), value.cols());
      for (Eigen::Index r = 0; r < mask.rows(); ++r)
        for (Eigen::Index c = 0; c < mask.cols(); ++c)
          mask(r, c) = rng->uniform() < dropout_rate ? 0.0 : scale;
      value = value.cwiseProduct(mask);
      cache.dropout_masks[static_cast<std::size_t>(l)] = std::move(mask);
    }
    cache.outputs[static_cast<std::size_t>(l) + 1] = std::move(value);
  }
  return cache;
}

Eigen::MatrixXd encode(const AutoencoderParams& params,
                       const Eigen::MatrixXd& batch) {
  return ae_forward(params, batch, 0.0, nullptr).latent(params);
}

AeGradients ae_backward(const AutoencoderParams& params,
                        const ForwardCache& cache,
                        const Eigen::MatrixXd& d_reconstruction,
                        const Eigen::MatrixXd& d_latent) {
  const int n_layers = params.n_layers();
  AeGradients grads;
  grads.weights.resize(static_cast<std::size_t>(n_layers));
  grads.biases.resize(static_cast<std::size_t>(n_layers));

  Eigen::MatrixXd delta = d_reconstruction;  // dL/d(layer output)
  for (int l = n_layers - 1; l >= 0; --l) {
    const std::size_t ul = static_cast<std::size_t>(l);
    if (l + 1 == params.encoder_layers() && d_latent.size() > 0)
      delta += d_latent;  // loss terms attached to the latent code
    const Eigen::MatrixXd& output = cache.outputs[ul + 1];
    Eigen::MatrixXd dz;
    if (params.activation(l) == Activation::relu) {
      // A dropout-scaled ReLU output is positive iff the pre-activation was
      // positive and the unit survived, so the stored output alone gives the
      // pass-through set; surviving units also carry the inverted-dropout
      // scale into the gradient.
      dz = delta.cwiseProduct(
          (output.array() > 0.0).cast<double>().matrix());
      const Eigen::MatrixXd& mask = cache.dropout_masks[ul];
      if (mask.size() > 0) dz = dz.cwiseProduct(mask);
    } else {
      dz = delta;
    }
    grads.weights[ul] = cache.outputs[ul].transpose() * dz;
    grads.biases[ul] = dz.colwise().sum().transpose();
    if (l > 0) delta = dz * params.weights[l].transpose();
  }
  return grads;
}

void Adamax::update(int slot_id, Eigen::Ref<Eigen::MatrixXd> param,
                    const Eigen::MatrixXd& grad) {
  if (t_ < 1)
    throw std::logic_error("Adamax::begin_step() must precede update()");
  if (slot_id >= static_cast<int>(slots_.size()))
    slots_.resize(static_cast<std::size_t>(slot_id) + 1);
  Slot& slot = slots_[static_cast<std::size_t>(slot_id)];
  if (slot.m.size() == 0) {
    slot.m = Eigen::MatrixXd::Zero(param.rows(), param.cols());
    slot.u = Eigen::MatrixXd::Zero(param.rows(), param.cols());
  }
  slot.m = options_.beta1 * slot.m + (1.0 - options_.beta1) * grad;
  slot.u = (options_.beta2 * slot.u).cwiseMax(grad.cwiseAbs());
  const double step =
      options_.lr / (1.0 - std::pow(options_.beta1, static_cast<double>(t_)));
  param -= step * slot.m.cwiseQuotient(
                      (slot.u.array() + options_.eps).matrix());
}

void Adamax::reset_slot(int slot_id) {
  if (slot_id < static_cast<int>(slots_.size()))
    slots_[static_cast<std::size_t>(slot_id)] = Slot{};
}

PretrainResult pretrain_autoencoder(AutoencoderParams params,
                                    const Eigen::MatrixXd& data,
                                    const PretrainConfig& config) {
  validate(params);
  const Eigen::Index n = data.rows();
  if (data.cols() != params.layer_sizes.front())
    throw std::invalid_argument("data dimension does not match network input");
  if (config.batch < 1)
    throw std::invalid_argument("batch size must be >= 1");
  if (n < config.batch)
    throw std::invalid_argument("need at least one full batch: " +
                                std::to_string(n) + " samples < batch " +
                                std::to_string(config.batch));
  if (config.epochs < 0)
    throw std::invalid_argument("epochs must be >= 0");

  PretrainResult result;
  Rng rng(config.seed);
  Adamax optimizer(AdamaxOptions{config.lr, 0.9, 0.999, 1e-8});
  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), 0);

  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    // Fisher-Yates with the session RNG keeps the whole run on one stream.
    for (Eigen::Index i = n - 1; i > 0; --i) {
      const int j = rng.uniform_int(static_cast<int>(i) + 1);
      std::swap(order[static_cast<std::size_t>(i)],
                order[static_cast<std::size_t>(j)]);
    }
    double loss_sum = 0.0;
    int n_batches = 0;
    for (Eigen::Index begin = 0; begin < n; begin += config.batch) {
      const Eigen::Index size = std::min<Eigen::Index>(config.batch, n - begin);
      Eigen::MatrixXd batch(size, data.cols());
      for (Eigen::Index r = 0; r < size; ++r)
        batch.row(r) = data.row(order[static_cast<std::size_t>(begin + r)]);

      const ForwardCache cache =
          ae_forward(params, batch, config.dropout_rate, &rng);
      const Eigen::MatrixXd residual = cache.reconstruction() - batch;
      const double loss =
          residual.squaredNorm() / static_cast<double>(size);
      if (!std::isfinite(loss)) {
        std::ostringstream message;
        message << "pretraining diverged at epoch " << epoch << ", batch "
                << n_batches << ": reconstruction loss " << loss;
        throw std::runtime_error(message.str());
      }
      loss_sum += loss;
      ++n_batches;

      const Eigen::MatrixXd d_rec =
          (2.0 / static_cast<double>(size)) * residual;
      const AeGradients grads =
          ae_backward(params, cache, d_rec, Eigen::MatrixXd());
      optimizer.begin_step();
      for (int l = 0; l < params.n_layers(); ++l) {
        optimizer.update(2 * l, params.weights[static_cast<std::size_t>(l)],
                         grads.weights[static_cast<std::size_t>(l)]);
        Eigen::MatrixXd bias_grad =
            grads.biases[static_cast<std::size_t>(l)];
        Eigen::Map<Eigen::MatrixXd> bias(
            params.biases[static_cast<std::size_t>(l)].data(),
            params.biases[static_cast<std::size_t>(l)].size(), 1);
        optimizer.update(2 * l + 1, bias, bias_grad);
      }
    }
    result.epoch_loss.push_back(loss_sum / n_batches);
  }
  result.params = std::move(params);
  return result;
}

}  // namespace diarcluster
