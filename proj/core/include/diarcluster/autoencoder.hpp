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

#ifndef DIARCLUSTER_AUTOENCODER_HPP_
#define DIARCLUSTER_AUTOENCODER_HPP_

#include <cstdint>
#include <vector>

#include <Eigen/Dense>

#include "diarcluster/rng.hpp"

namespace diarcluster {

enum class Activation { relu, linear };

// Symmetric dense autoencoder.  layer_sizes runs input..bottleneck..output
// (odd length, mirrored), e.g. {200, 2048, 2048, 15, 2048, 2048, 200}.
// Layer l maps layer_sizes[l] -> layer_sizes[l+1] as act(x W + b).  Hidden
// layers use ReLU; the bottleneck and the output are linear.
struct AutoencoderParams {
  std::vector<int> layer_sizes;
  std::vector<Eigen::MatrixXd> weights;  // weights[l]: sizes[l] x sizes[l+1]
  std::vector<Eigen::VectorXd> biases;   // biases[l]: sizes[l+1]

  int n_layers() const { return static_cast<int>(weights.size()); }
  // Number of encoder layers; the encoder output (latent code) is the
  // activation of layer encoder_layers() - 1.
  int encoder_layers() const {
    return static_cast<int>(layer_sizes.size()) / 2;
  }
  int bottleneck_size() const { return layer_sizes[encoder_layers()]; }
  Activation activation(int layer) const;
  std::size_t n_params() const;
};

void validate(const AutoencoderParams& params);

// Fan-in scaled uniform initialization, U(-sqrt(6/fan_in), +sqrt(6/fan_in)),
// biases zero; deterministic per seed.
AutoencoderParams make_autoencoder(const std::vector<int>& layer_sizes,
                                   std::uint64_t seed);

// Per-layer activations kept for backpropagation.  outputs[0] is the input
// batch; outputs[l+1] is layer l's post-activation (and post-dropout) value.
struct ForwardCache {
  std::vector<Eigen::MatrixXd> outputs;
  // Inverted-dropout multipliers (0 or 1/(1-rate)) for the layers that had
  // dropout applied; empty matrices elsewhere.
  std::vector<Eigen::MatrixXd> dropout_masks;

  const Eigen::MatrixXd& latent(const AutoencoderParams& params) const {
    return outputs[static_cast<std::size_t>(params.encoder_layers())];
  }
  const Eigen::MatrixXd& reconstruction() const { return outputs.back(); }
};

// Forward pass over a batch (one sample per row).  Dropout is applied to the
// encoder's hidden activations only — never to the bottleneck or decoder —
// with inverted scaling so expected activations are rate-independent.  The
// caller's rng drives the masks; pass rng = nullptr (or rate 0) for the
// deterministic inference pass.
ForwardCache ae_forward(const AutoencoderParams& params,
                        const Eigen::MatrixXd& batch, double dropout_rate,
                        Rng* rng);

// Deterministic encode: dropout-free forward pass, latent codes only.
Eigen::MatrixXd encode(const AutoencoderParams& params,
                       const Eigen::MatrixXd& batch);

struct AeGradients {
  std::vector<Eigen::MatrixXd> weights;
  std::vector<Eigen::VectorXd> biases;
};

// Backpropagates d_reconstruction (dL/d output) and, when non-empty,
// d_latent (dL/d latent code, added at the bottleneck on the way back)
// through the cached forward pass.
AeGradients ae_backward(const AutoencoderParams& params,
                        const ForwardCache& cache,
                        const Eigen::MatrixXd& d_reconstruction,
                        const Eigen::MatrixXd& d_latent);

// Adamax: the infinity-norm member of the adaptive-moment family.  Per step,
//   m <- beta1 m + (1 - beta1) g,  u <- max(beta2 u, |g|),
//   theta <- theta - lr / (1 - beta1^t) * m / (u + eps).
struct AdamaxOptions {
  double lr = 0.001;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

class Adamax {
 public:
  explicit Adamax(AdamaxOptions options) : options_(options) {}

  // Advances the shared step counter; call once per optimization step,
  // before the update() calls of that step.
  void begin_step() { ++t_; }
  // Updates one named tensor in place. Slots are created lazily per id.
  void update(int slot_id, Eigen::Ref<Eigen::MatrixXd> param,
              const Eigen::MatrixXd& grad);
  // Clears the moments of one slot (used when a tensor is externally reset).
  void reset_slot(int slot_id);

 private:
  struct Slot {
    Eigen::MatrixXd m;
    Eigen::MatrixXd u;
  };
  AdamaxOptions options_;
  long t_ = 0;
  std::vector<Slot> slots_;
};

struct PretrainConfig {
  int epochs = 30;
  double dropout_rate = 0.2;
  double lr = 0.001;
  int batch = 64;
  std::uint64_t seed = 0;
};

struct PretrainResult {
  AutoencoderParams params;
  // Mean reconstruction loss (1/n_batch * sum ||x - rec||^2, averaged over
  // the epoch's batches), one entry per epoch.
  std::vector<double> epoch_loss;
};

// Minibatch Adamax training of the reconstruction loss, starting from the
// given parameters ("0 epochs" returns them untouched).  Deterministic per
// seed.  Throws std::runtime_error with epoch/batch diagnostics if the loss
// turns non-finite.
PretrainResult pretrain_autoencoder(AutoencoderParams params,
                                    const Eigen::MatrixXd& data,
                                    const PretrainConfig& config);

}  // namespace diarcluster

#endif  // DIARCLUSTER_AUTOENCODER_HPP_
