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

#ifndef DIARCLUSTER_DEC_HPP_
#define DIARCLUSTER_DEC_HPP_

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "diarcluster/autoencoder.hpp"
#include "diarcluster/types.hpp"

namespace diarcluster {

// Exponent convention for the Student-t kernel (1 + d^2/a)^(-e):
//   as_printed: e = (a + 1) / a
//   standard:   e = (a + 1) / 2
enum class StudentExponent { as_printed, standard };

const char* to_string(StudentExponent exponent);
StudentExponent student_exponent_from_string(const std::string& name);

// Weights of the four loss terms: the clustering KL between targets and soft
// assignments, the input reconstruction error, the balance KL pushing the
// target distribution toward uniform cluster usage, and the latent
// compactness pulling codes onto their hard-assigned centroid.
struct LossWeights {
  double cluster = 0.1;
  double reconstruction = 1.0;
  double balance = 10.0;
  double compactness = 1.0;
};

struct LossBreakdown {
  double l_c = 0.0;    // cluster term
  double l_r = 0.0;    // reconstruction term
  double l_u = 0.0;    // balance term
  double l_mse = 0.0;  // compactness term
  double total = 0.0;
  LossWeights weights;
};

// Full trainer state: network, latent centroids, codes, soft assignments and
// self-training targets.  Rows of q and p are probability vectors.
struct DecState {
  AutoencoderParams params;
  Eigen::MatrixXd centroids;  // k x bottleneck
  Eigen::MatrixXd z;          // n x bottleneck
  Eigen::MatrixXd q;          // n x k
  Eigen::MatrixXd p;          // n x k
  double a = 1.0;
  StudentExponent exponent = StudentExponent::as_printed;
  LossWeights weights;
  int recalib_period = 20;

  int k() const { return static_cast<int>(centroids.rows()); }
};

// Student-t soft assignment of each code to each centroid, row-normalized:
// q_ij proportional to (1 + ||z_i - mu_j||^2 / a)^(-e).  Kernel values are
// floored at 1e-300 before normalization so every q entry stays positive.
Eigen::MatrixXd soft_assign(const Eigen::MatrixXd& z,
                            const Eigen::MatrixXd& centroids, double a = 1.0,
                            StudentExponent exponent =
                                StudentExponent::as_printed);

// Self-training target: p_ij proportional to q_ij^2 / f_j with the soft
// cluster frequency f_j = sum_i q_ij, rows normalized to 1.  An all-zero
// column (empty soft cluster) is an error.
Eigen::MatrixXd target_distribution(const Eigen::MatrixXd& q);

// Evaluates all four terms on the given state:
//   l_c   = (1/n) sum_ij p_ij ln(p_ij / q_ij)          (p, q as stored)
//   l_r   = (1/n) sum_i ||x_i - reconstruct(x_i)||^2
//   l_u   = (1/n) sum_ij p_ij ln(k p_ij)
//   l_mse = (1/n) sum_i ||z_i - mu_c(i)||^2,  c(i) = argmax_j q_ij
// plus the weighted total.  Throws if any term is non-finite.
LossBreakdown loss_terms(const Eigen::MatrixXd& data, const DecState& state);

struct DecConfig {
  // Empty -> {D, hidden, hidden, bottleneck, hidden, hidden, D} for input
  // dimension D.
  std::vector<int> layer_sizes;
  int hidden = 256;
  int bottleneck = 15;
  double a = 1.0;
  StudentExponent exponent = StudentExponent::as_printed;
  LossWeights weights;
  double lr = 0.001;
  int batch = 64;
  int epochs = 60;
  // The self-training target p is refreshed from the full data at the start
  // of every epoch e with e % target_update_period == 0.
  int target_update_period = 5;
  // Centroids are re-fitted by k-means on the current codes (and q, p reset)
  // at the end of every epoch e with (e+1) % recalib_period == 0, except the
  // last; a period >= epochs therefore never triggers.
  int recalib_period = 20;
  // Plain self-training baseline: weights (1, 0, 0, 0) and no recalibration,
  // running through the identical code path.
  bool original_mode = false;
  std::uint64_t seed = 0;
  // Pretraining of the reconstruction stack; its seed field is ignored (a
  // seed derived from `seed` is used).  Skipped when initial_params is set.
  PretrainConfig pretrain;
  std::optional<AutoencoderParams> initial_params;
};

struct DecTrainResult {
  DecState state;
  // Latent-space model: centroids in bottleneck coordinates, assignments =
  // per-sample argmax of q (ties toward the lower index).
  ClusterModel model;
  std::vector<LossBreakdown> epoch_losses;  // batch-mean terms per epoch
  std::vector<int> empty_clusters;          // clusters with no samples at end
  std::vector<std::string> warnings;
  bool diverged = false;  // training stopped; state is the last good epoch
};

// Full training pipeline: (pretrain ->) encode -> k-means centroid init ->
// minibatch Adamax on all network parameters and centroids, with periodic
// target refresh and centroid recalibration.  Deterministic per seed.
DecTrainResult train_dec(const Eigen::MatrixXd& data, int k,
                         const DecConfig& config);

enum class LossTerm { cluster, reconstruction, balance, compactness };

// Compares the analytic gradient of one loss term (weight 1) against central
// finite differences (h = 1e-5) over every parameter — weights, biases and
// centroids — and returns the maximum relative error
// |g_a - g_fd| / max(1e-6, |g_a| + |g_fd|).  Intended for small nets.
double grad_check(const DecState& state, const Eigen::MatrixXd& data,
                  LossTerm term);

// Checkpoint container: JSON header (layer sizes, a, exponent, weights,
// seed, epoch, k) followed by all network parameters and centroids as
// row-major little-endian float32.  Codes/q/p are re-derivable and not
// stored.
void save_checkpoint(const DecState& state, std::uint64_t seed, int epoch,
                     const std::string& path);
DecState load_checkpoint(const std::string& path,
                         std::uint64_t* seed = nullptr, int* epoch = nullptr);

// CSV loss curve: epoch,l_c,l_r,l_u,l_mse,total.
void write_loss_curve(const std::vector<LossBreakdown>& curve,
                      const std::string& path);

}  // namespace diarcluster

#endif  // DIARCLUSTER_DEC_HPP_
