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

#include "diarcluster/dec.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "diarcluster/kmeans.hpp"

namespace diarcluster {

namespace {

using nlohmann::json;

constexpr double kKernelFloor = 1e-300;

double exponent_value(double a, StudentExponent exponent) {
  return exponent == StudentExponent::as_printed ? (a + 1.0) / a
                                                 : (a + 1.0) / 2.0;
}

Eigen::MatrixXd pairwise_sqdist(const Eigen::MatrixXd& z,
                                const Eigen::MatrixXd& centroids) {
  const Eigen::VectorXd z2 = z.rowwise().squaredNorm();
  const Eigen::VectorXd c2 = centroids.rowwise().squaredNorm();
  Eigen::MatrixXd dist =
      (-2.0 * z * centroids.transpose()).rowwise() + c2.transpose();
  dist.colwise() += z2;
  return dist.cwiseMax(0.0);
}

std::vector<int> hard_assignments(const Eigen::MatrixXd& q) {
  std::vector<int> hard(static_cast<std::size_t>(q.rows()), 0);
  for (Eigen::Index i = 0; i < q.rows(); ++i) {
    double best = q(i, 0);
    int best_j = 0;
    for (Eigen::Index j = 1; j < q.cols(); ++j) {
      if (q(i, j) > best) {
        best = q(i, j);
        best_j = static_cast<int>(j);
      }
    }
    hard[static_cast<std::size_t>(i)] = best_j;
  }
  return hard;
}

struct LatentGradient {
  Eigen::MatrixXd d_z;
  Eigen::MatrixXd d_centroids;
};

// Chains dL/d(ln kernel) = G through the Student-t kernel into gradients for
// the codes and centroids.  With g_ij = -e ln(1 + d_ij / a) and
// d_ij = ||z_i - mu_j||^2:  dL/dd_ij = -e G_ij / (a + d_ij).
LatentGradient student_chain(const Eigen::MatrixXd& g_grad,
                             const Eigen::MatrixXd& dist, double a,
                             double exponent, const Eigen::MatrixXd& z,
                             const Eigen::MatrixXd& centroids) {
  const Eigen::MatrixXd w =
      (g_grad.array() * (-exponent / (dist.array() + a))).matrix();
  const Eigen::VectorXd row_sums = w.rowwise().sum();
  const Eigen::VectorXd col_sums = w.colwise().sum().transpose();
  LatentGradient out;
  out.d_z = 2.0 * (row_sums.asDiagonal() * z - w * centroids);
  out.d_centroids =
      2.0 * (col_sums.asDiagonal() * centroids - w.transpose() * z);
  return out;
}

// dL/dg for the cluster term with the target held constant.
Eigen::MatrixXd cluster_g_grad(const Eigen::MatrixXd& q,
                               const Eigen::MatrixXd& p) {
  return (q - p) / static_cast<double>(q.rows());
}

// dL/dg for the balance term, differentiated through the dependence of the
// target on q (including the soft cluster frequencies).
Eigen::MatrixXd balance_g_grad(const Eigen::MatrixXd& q) {
  const double n = static_cast<double>(q.rows());
  const double k = static_cast<double>(q.cols());
  const Eigen::RowVectorXd f = q.colwise().sum();
  const Eigen::MatrixXd q2 = q.array().square().matrix();
  const Eigen::MatrixXd t_mat = (q2.array().rowwise() / f.array()).matrix();
  const Eigen::VectorXd r = t_mat.rowwise().sum();
  const Eigen::MatrixXd p = (t_mat.array().colwise() / r.array()).matrix();

  // dL/dp, then back through the row normalization, the frequency division
  // and the squaring, and finally the softmax that defines q.
  const Eigen::MatrixXd c_mat =
      (((p.array() * k).log() + 1.0) / n).matrix();
  const Eigen::VectorXd row_dot =
      (c_mat.array() * p.array()).rowwise().sum().matrix();
  Eigen::MatrixXd d_mat = c_mat;
  d_mat.colwise() -= row_dot;
  d_mat = (d_mat.array().colwise() / r.array()).matrix();
  const Eigen::RowVectorXd t_col =
      (d_mat.array() * q2.array()).colwise().sum().matrix();
  Eigen::MatrixXd a_mat =
      ((2.0 * d_mat.array() * q.array()).rowwise() / f.array()).matrix();
  const Eigen::RowVectorXd shift =
      (t_col.array() / f.array().square()).matrix();
  a_mat.rowwise() -= shift;
  const Eigen::VectorXd s =
      (a_mat.array() * q.array()).rowwise().sum().matrix();
  Eigen::MatrixXd g = a_mat;
  g.colwise() -= s;
  return (g.array() * q.array()).matrix();
}

LatentGradient compactness_gradient(const Eigen::MatrixXd& z,
                                    const Eigen::MatrixXd& centroids,
                                    const std::vector<int>& hard) {
  const double n = static_cast<double>(z.rows());
  LatentGradient out;
  out.d_z.resize(z.rows(), z.cols());
  out.d_centroids = Eigen::MatrixXd::Zero(centroids.rows(), centroids.cols());
  for (Eigen::Index i = 0; i < z.rows(); ++i) {
    const int j = hard[static_cast<std::size_t>(i)];
    const Eigen::RowVectorXd diff = z.row(i) - centroids.row(j);
    out.d_z.row(i) = (2.0 / n) * diff;
    out.d_centroids.row(j) -= (2.0 / n) * diff;
  }
  return out;
}

double mean_kl(const Eigen::MatrixXd& p, const Eigen::MatrixXd& q) {
  return (p.array() * (p.array() / q.array()).log()).sum() /
         static_cast<double>(p.rows());
}

double balance_value(const Eigen::MatrixXd& p) {
  const double k = static_cast<double>(p.cols());
  return (p.array() * (p.array() * k).log()).sum() /
         static_cast<double>(p.rows());
}

double compactness_value(const Eigen::MatrixXd& z,
                         const Eigen::MatrixXd& centroids,
                         const std::vector<int>& hard) {
  double total = 0.0;
  for (Eigen::Index i = 0; i < z.rows(); ++i)
    total +=
        (z.row(i) - centroids.row(hard[static_cast<std::size_t>(i)]))
            .squaredNorm();
  return total / static_cast<double>(z.rows());
}

void put_u32(std::string& out, std::uint32_t v) {
  out.push_back(static_cast<char>(v & 0xff));
  out.push_back(static_cast<char>((v >> 8) & 0xff));
  out.push_back(static_cast<char>((v >> 16) & 0xff));
  out.push_back(static_cast<char>((v >> 24) & 0xff));
}

std::uint32_t get_u32(const unsigned char* p) {
  return static_cast<std::uint32_t>(p[0]) |
         (static_cast<std::uint32_t>(p[1]) << 8) |
         (static_cast<std::uint32_t>(p[2]) << 16) |
         (static_cast<std::uint32_t>(p[3]) << 24);
}

void append_f32_rowmajor(std::string& out, const Eigen::MatrixXd& m) {
  for (Eigen::Index r = 0; r < m.rows(); ++r)
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
      const float value = static_cast<float>(m(r, c));
      std::uint32_t bits;
      std::memcpy(&bits, &value, 4);
      put_u32(out, bits);
    }
}

const unsigned char* read_f32_rowmajor(const unsigned char* p,
                                       Eigen::Ref<Eigen::MatrixXd> m) {
  for (Eigen::Index r = 0; r < m.rows(); ++r)
    for (Eigen::Index c = 0; c < m.cols(); ++c, p += 4) {
      const std::uint32_t bits = get_u32(p);
      float value;
      std::memcpy(&value, &bits, 4);
      m(r, c) = value;
    }
  return p;
}

}  // namespace

const char* to_string(StudentExponent exponent) {
  return exponent == StudentExponent::as_printed ? "as_printed" : "standard";
}

StudentExponent student_exponent_from_string(const std::string& name) {
  if (name == "as_printed") return StudentExponent::as_printed;
  if (name == "standard") return StudentExponent::standard;
  throw std::invalid_argument("unknown exponent convention '" + name +
                              "' (expected as_printed or standard)");
}

Eigen::MatrixXd soft_assign(const Eigen::MatrixXd& z,
                            const Eigen::MatrixXd& centroids, double a,
                            StudentExponent exponent) {
  if (a <= 0.0)
    throw std::invalid_argument("Student-t parameter a must be > 0");
  if (z.cols() != centroids.cols())
    throw std::invalid_argument("code and centroid dimensions differ");
  const double e = exponent_value(a, exponent);
  const Eigen::MatrixXd dist = pairwise_sqdist(z, centroids);
  Eigen::MatrixXd kernel =
      (1.0 + dist.array() / a).pow(-e).max(kKernelFloor).matrix();
  const Eigen::VectorXd row_sums = kernel.rowwise().sum();
  return (kernel.array().colwise() / row_sums.array()).matrix();
}

Eigen::MatrixXd target_distribution(const Eigen::MatrixXd& q) {
  const Eigen::RowVectorXd f = q.colwise().sum();
  for (Eigen::Index j = 0; j < f.size(); ++j)
    if (f(j) <= 0.0)
      throw std::invalid_argument(
          "soft cluster " + std::to_string(j) +
          " has zero total mass; target distribution is undefined");
  Eigen::MatrixXd unnormalized =
      (q.array().square().rowwise() / f.array()).matrix();
  const Eigen::VectorXd row_sums = unnormalized.rowwise().sum();
  return (unnormalized.array().colwise() / row_sums.array()).matrix();
}

LossBreakdown loss_terms(const Eigen::MatrixXd& data, const DecState& state) {
  const Eigen::Index n = data.rows();
  if (state.z.rows() != n || state.q.rows() != n || state.p.rows() != n)
    throw std::invalid_argument("state matrices do not match the data rows");

  LossBreakdown loss;
  loss.weights = state.weights;
  loss.l_c = mean_kl(state.p, state.q);
  const ForwardCache cache = ae_forward(state.params, data, 0.0, nullptr);
  loss.l_r = (cache.reconstruction() - data).squaredNorm() /
             static_cast<double>(n);
  loss.l_u = balance_value(state.p);
  loss.l_mse =
      compactness_value(state.z, state.centroids, hard_assignments(state.q));
  loss.total = loss.weights.cluster * loss.l_c +
               loss.weights.reconstruction * loss.l_r +
               loss.weights.balance * loss.l_u +
               loss.weights.compactness * loss.l_mse;
  if (!std::isfinite(loss.total)) {
    std::ostringstream message;
    message << "non-finite loss: l_c=" << loss.l_c << " l_r=" << loss.l_r
            << " l_u=" << loss.l_u << " l_mse=" << loss.l_mse;
    throw std::runtime_error(message.str());
  }
  return loss;
}

DecTrainResult train_dec(const Eigen::MatrixXd& data, int k,
                         const DecConfig& config) {
  const Eigen::Index n = data.rows();
  const Eigen::Index dim = data.cols();
  if (k < 1) throw std::invalid_argument("train_dec needs k >= 1");
  if (n < k)
    throw std::invalid_argument("train_dec needs at least k samples");
  if (config.batch < 1 || config.epochs < 0 ||
      config.target_update_period < 1 || config.recalib_period < 1)
    throw std::invalid_argument("invalid training configuration");

  std::vector<int> layers = config.layer_sizes;
  if (layers.empty())
    layers = {static_cast<int>(dim), config.hidden,     config.hidden,
              config.bottleneck,     config.hidden,     config.hidden,
              static_cast<int>(dim)};
  if (layers.front() != static_cast<int>(dim))
    throw std::invalid_argument("network input size does not match the data");

  const LossWeights weights =
      config.original_mode ? LossWeights{1.0, 0.0, 0.0, 0.0} : config.weights;
  const bool recalib_on = !config.original_mode;

  DecTrainResult result;
  AutoencoderParams params;
  if (config.initial_params) {
    params = *config.initial_params;
    validate(params);
    if (params.layer_sizes.front() != static_cast<int>(dim))
      throw std::invalid_argument(
          "initial parameters do not match the data dimension");
  } else {
    PretrainConfig pre = config.pretrain;
    pre.seed = derive_seed(config.seed, 1);
    pre.batch = static_cast<int>(
        std::min<Eigen::Index>(pre.batch, n));
    params = pretrain_autoencoder(make_autoencoder(layers,
                                                   derive_seed(config.seed, 0)),
                                  data, pre)
                 .params;
  }

  Eigen::MatrixXd z = encode(params, data);
  KmeansOptions km_init;
  km_init.k = k;
  km_init.seed = derive_seed(config.seed, 2);
  Eigen::MatrixXd centroids = kmeans(z, km_init).centroids;
  Eigen::MatrixXd q = soft_assign(z, centroids, config.a, config.exponent);
  Eigen::MatrixXd p = target_distribution(q);

  Adamax optimizer(AdamaxOptions{config.lr, 0.9, 0.999, 1e-8});
  const int centroid_slot = 2 * params.n_layers();
  Rng rng(derive_seed(config.seed, 3));
  const int batch_size = static_cast<int>(std::min<Eigen::Index>(config.batch, n));
  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), 0);

  struct Snapshot {
    AutoencoderParams params;
    Eigen::MatrixXd centroids;
    Eigen::MatrixXd p;
  };
  Snapshot last_good{params, centroids, p};
  int recalib_count = 0;

  for (int epoch = 0; epoch < config.epochs && !result.diverged; ++epoch) {
    if (epoch % config.target_update_period == 0) {
      z = encode(params, data);
      q = soft_assign(z, centroids, config.a, config.exponent);
      p = target_distribution(q);
    }
    for (Eigen::Index i = n - 1; i > 0; --i) {
      const int j = rng.uniform_int(static_cast<int>(i) + 1);
      std::swap(order[static_cast<std::size_t>(i)],
                order[static_cast<std::size_t>(j)]);
    }

    LossBreakdown epoch_loss;
    epoch_loss.weights = weights;
    int n_batches = 0;
    for (Eigen::Index begin = 0; begin < n && !result.diverged;
         begin += batch_size) {
      const Eigen::Index size = std::min<Eigen::Index>(batch_size, n - begin);
      Eigen::MatrixXd batch(size, dim);
      Eigen::MatrixXd target(size, k);
      for (Eigen::Index r = 0; r < size; ++r) {
        const Eigen::Index src = order[static_cast<std::size_t>(begin + r)];
        batch.row(r) = data.row(src);
        target.row(r) = p.row(src);
      }

      const ForwardCache cache = ae_forward(params, batch, 0.0, nullptr);
      const Eigen::MatrixXd& zb = cache.latent(params);
      const Eigen::MatrixXd dist = pairwise_sqdist(zb, centroids);
      const double e = exponent_value(config.a, config.exponent);
      Eigen::MatrixXd kernel =
          (1.0 + dist.array() / config.a).pow(-e).max(kKernelFloor).matrix();
      const Eigen::MatrixXd qb =
          (kernel.array().colwise() / kernel.rowwise().sum().array())
              .matrix();
      const std::vector<int> hard = hard_assignments(qb);
      const Eigen::MatrixXd pb_local = target_distribution(qb);
      const Eigen::MatrixXd residual = cache.reconstruction() - batch;

      const double l_c = mean_kl(target, qb);
      const double l_r =
          residual.squaredNorm() / static_cast<double>(size);
      const double l_u = balance_value(pb_local);
      const double l_mse = compactness_value(zb, centroids, hard);
      const double total = weights.cluster * l_c +
                           weights.reconstruction * l_r +
                           weights.balance * l_u +
                           weights.compactness * l_mse;
      if (!std::isfinite(total)) {
        std::ostringstream message;
        message << "training diverged at epoch " << epoch << ", batch "
                << n_batches << " (l_c=" << l_c << " l_r=" << l_r
                << " l_u=" << l_u << " l_mse=" << l_mse
                << "); restored the last completed epoch";
        result.warnings.push_back(message.str());
        result.diverged = true;
        break;
      }
      epoch_loss.l_c += l_c;
      epoch_loss.l_r += l_r;
      epoch_loss.l_u += l_u;
      epoch_loss.l_mse += l_mse;
      ++n_batches;

      const LatentGradient cluster_grad = student_chain(
          cluster_g_grad(qb, target), dist, config.a, e, zb, centroids);
      const LatentGradient balance_grad = student_chain(
          balance_g_grad(qb), dist, config.a, e, zb, centroids);
      const LatentGradient compact_grad =
          compactness_gradient(zb, centroids, hard);

      const Eigen::MatrixXd d_latent =
          weights.cluster * cluster_grad.d_z +
          weights.balance * balance_grad.d_z +
          weights.compactness * compact_grad.d_z;
      const Eigen::MatrixXd d_centroids =
          weights.cluster * cluster_grad.d_centroids +
          weights.balance * balance_grad.d_centroids +
          weights.compactness * compact_grad.d_centroids;
      const Eigen::MatrixXd d_rec =
          (weights.reconstruction * 2.0 / static_cast<double>(size)) *
          residual;

      const AeGradients grads = ae_backward(params, cache, d_rec, d_latent);
      optimizer.begin_step();
      for (int l = 0; l < params.n_layers(); ++l) {
        optimizer.update(2 * l, params.weights[static_cast<std::size_t>(l)],
                         grads.weights[static_cast<std::size_t>(l)]);
        Eigen::Map<Eigen::MatrixXd> bias(
            params.biases[static_cast<std::size_t>(l)].data(),
            params.biases[static_cast<std::size_t>(l)].size(), 1);
        optimizer.update(2 * l + 1, bias,
                         grads.biases[static_cast<std::size_t>(l)]);
      }
      optimizer.update(centroid_slot, centroids, d_centroids);
    }

    if (result.diverged) {
      params = last_good.params;
      centroids = last_good.centroids;
      p = last_good.p;
      break;
    }

    epoch_loss.l_c /= n_batches;
    epoch_loss.l_r /= n_batches;
    epoch_loss.l_u /= n_batches;
    epoch_loss.l_mse /= n_batches;
    epoch_loss.total = weights.cluster * epoch_loss.l_c +
                       weights.reconstruction * epoch_loss.l_r +
                       weights.balance * epoch_loss.l_u +
                       weights.compactness * epoch_loss.l_mse;
    result.epoch_losses.push_back(epoch_loss);

    if (recalib_on && (epoch + 1) % config.recalib_period == 0 &&
        (epoch + 1) < config.epochs) {
      z = encode(params, data);
      KmeansOptions km;
      km.k = k;
      km.seed = derive_seed(config.seed, 1000 + static_cast<std::uint64_t>(
                                                    recalib_count++));
      centroids = kmeans(z, km).centroids;
      q = soft_assign(z, centroids, config.a, config.exponent);
      p = target_distribution(q);
      // The moments of the replaced centroids are stale; start them fresh.
      optimizer.reset_slot(centroid_slot);
    }
    last_good = Snapshot{params, centroids, p};
  }

  z = encode(params, data);
  q = soft_assign(z, centroids, config.a, config.exponent);

  result.state.params = std::move(params);
  result.state.centroids = centroids;
  result.state.z = std::move(z);
  result.state.q = std::move(q);
  result.state.p = std::move(p);
  result.state.a = config.a;
  result.state.exponent = config.exponent;
  result.state.weights = weights;
  result.state.recalib_period = config.recalib_period;

  result.model.k = k;
  result.model.centroids = centroids;
  result.model.assignments = hard_assignments(result.state.q);
  result.model.source = CentroidSource::plusplus_init;

  std::vector<Eigen::Index> counts(static_cast<std::size_t>(k), 0);
  for (int label : result.model.assignments)
    ++counts[static_cast<std::size_t>(label)];
  for (int j = 0; j < k; ++j) {
    if (counts[static_cast<std::size_t>(j)] == 0) {
      result.empty_clusters.push_back(j);
      result.warnings.push_back("cluster " + std::to_string(j) +
                                " is empty in the final hard assignment");
    }
  }
  return result;
}

double grad_check(const DecState& state, const Eigen::MatrixXd& data,
                  LossTerm term) {
  AutoencoderParams params = state.params;
  Eigen::MatrixXd centroids = state.centroids;
  const Eigen::Index n = data.rows();
  const double e = exponent_value(state.a, state.exponent);

  // Frozen hard assignment (the compactness term is piecewise-smooth in it).
  const std::vector<int> hard = hard_assignments(
      soft_assign(encode(params, data), centroids, state.a, state.exponent));

  auto evaluate = [&](const AutoencoderParams& pr,
                      const Eigen::MatrixXd& mu) -> double {
    const ForwardCache cache = ae_forward(pr, data, 0.0, nullptr);
    switch (term) {
      case LossTerm::reconstruction:
        return (cache.reconstruction() - data).squaredNorm() /
               static_cast<double>(n);
      case LossTerm::cluster: {
        const Eigen::MatrixXd q =
            soft_assign(cache.latent(pr), mu, state.a, state.exponent);
        return mean_kl(state.p, q);
      }
      case LossTerm::balance: {
        const Eigen::MatrixXd q =
            soft_assign(cache.latent(pr), mu, state.a, state.exponent);
        return balance_value(target_distribution(q));
      }
      case LossTerm::compactness:
        return compactness_value(cache.latent(pr), mu, hard);
    }
    throw std::invalid_argument("unknown loss term");
  };

  // Analytic gradient of the selected term, weight 1.
  const ForwardCache cache = ae_forward(params, data, 0.0, nullptr);
  const Eigen::MatrixXd& z = cache.latent(params);
  const Eigen::MatrixXd dist = pairwise_sqdist(z, centroids);
  Eigen::MatrixXd kernel =
      (1.0 + dist.array() / state.a).pow(-e).max(kKernelFloor).matrix();
  const Eigen::MatrixXd q =
      (kernel.array().colwise() / kernel.rowwise().sum().array()).matrix();

  Eigen::MatrixXd d_rec = Eigen::MatrixXd::Zero(n, data.cols());
  LatentGradient latent_grad;
  latent_grad.d_z = Eigen::MatrixXd::Zero(z.rows(), z.cols());
  latent_grad.d_centroids =
      Eigen::MatrixXd::Zero(centroids.rows(), centroids.cols());
  switch (term) {
    case LossTerm::reconstruction:
      d_rec = (2.0 / static_cast<double>(n)) *
              (cache.reconstruction() - data);
      break;
    case LossTerm::cluster:
      latent_grad = student_chain(cluster_g_grad(q, state.p), dist, state.a,
                                  e, z, centroids);
      break;
    case LossTerm::balance:
      latent_grad =
          student_chain(balance_g_grad(q), dist, state.a, e, z, centroids);
      break;
    case LossTerm::compactness:
      latent_grad = compactness_gradient(z, centroids, hard);
      break;
  }
  const AeGradients grads =
      ae_backward(params, cache, d_rec, latent_grad.d_z);

  // Flatten analytic gradients in the same order the tensors are scanned.
  std::vector<double> analytic;
  for (const auto& w : grads.weights)
    analytic.insert(analytic.end(), w.data(), w.data() + w.size());
  for (const auto& b : grads.biases)
    analytic.insert(analytic.end(), b.data(), b.data() + b.size());
  analytic.insert(analytic.end(), latent_grad.d_centroids.data(),
                  latent_grad.d_centroids.data() +
                      latent_grad.d_centroids.size());

  std::vector<double*> slots;
  std::vector<Eigen::Index> sizes;
  for (auto& w : params.weights) {
    slots.push_back(w.data());
    sizes.push_back(w.size());
  }
  for (auto& b : params.biases) {
    slots.push_back(b.data());
    sizes.push_back(b.size());
  }
  slots.push_back(centroids.data());
  sizes.push_back(centroids.size());

  const double h = 1e-5;
  double max_rel_error = 0.0;
  std::size_t flat = 0;
  for (std::size_t s = 0; s < slots.size(); ++s) {
    for (Eigen::Index i = 0; i < sizes[s]; ++i, ++flat) {
      double& value = slots[s][i];
      const double saved = value;
      value = saved + h;
      const double up = evaluate(params, centroids);
      value = saved - h;
      const double down = evaluate(params, centroids);
      value = saved;
      const double fd = (up - down) / (2.0 * h);
      const double ga = analytic[flat];
      const double rel =
          std::abs(ga - fd) / std::max(1e-6, std::abs(ga) + std::abs(fd));
      max_rel_error = std::max(max_rel_error, rel);
    }
  }
  return max_rel_error;
}

void save_checkpoint(const DecState& state, std::uint64_t seed, int epoch,
                     const std::string& path) {
  validate(state.params);
  json header;
  header["layer_sizes"] = state.params.layer_sizes;
  header["a"] = state.a;
  header["exponent"] = to_string(state.exponent);
  header["weights"] = {{"cluster", state.weights.cluster},
                       {"reconstruction", state.weights.reconstruction},
                       {"balance", state.weights.balance},
                       {"compactness", state.weights.compactness}};
  header["seed"] = seed;
  header["epoch"] = epoch;
  header["k"] = state.k();
  header["recalib_period"] = state.recalib_period;
  const std::string header_text = header.dump();

  std::string blob;
  put_u32(blob, static_cast<std::uint32_t>(header_text.size()));
  blob += header_text;
  for (const auto& w : state.params.weights) append_f32_rowmajor(blob, w);
  for (const auto& b : state.params.biases) append_f32_rowmajor(blob, b);
  append_f32_rowmajor(blob, state.centroids);

  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open '" + path + "' for writing");
  out.write(blob.data(), static_cast<std::streamsize>(blob.size()));
  if (!out) throw std::runtime_error("short write to '" + path + "'");
}

DecState load_checkpoint(const std::string& path, std::uint64_t* seed,
                         int* epoch) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open '" + path + "'");
  std::ostringstream buffer;
  buffer << in.rdbuf();
  const std::string blob = buffer.str();
  if (blob.size() < 4)
    throw std::runtime_error("'" + path + "': truncated checkpoint");
  const auto* bytes = reinterpret_cast<const unsigned char*>(blob.data());
  const std::uint32_t header_len = get_u32(bytes);
  if (blob.size() < 4 + static_cast<std::size_t>(header_len))
    throw std::runtime_error("'" + path + "': truncated header");
  json header;
  try {
    header = json::parse(blob.substr(4, header_len));
  } catch (const json::exception& parse_error) {
    throw std::runtime_error("'" + path + "': bad header: " +
                             parse_error.what());
  }

  DecState state;
  state.params.layer_sizes = header.at("layer_sizes").get<std::vector<int>>();
  state.a = header.at("a").get<double>();
  state.exponent =
      student_exponent_from_string(header.at("exponent").get<std::string>());
  state.weights.cluster = header.at("weights").at("cluster").get<double>();
  state.weights.reconstruction =
      header.at("weights").at("reconstruction").get<double>();
  state.weights.balance = header.at("weights").at("balance").get<double>();
  state.weights.compactness =
      header.at("weights").at("compactness").get<double>();
  state.recalib_period = header.at("recalib_period").get<int>();
  const int k = header.at("k").get<int>();
  if (seed != nullptr) *seed = header.at("seed").get<std::uint64_t>();
  if (epoch != nullptr) *epoch = header.at("epoch").get<int>();

  const auto& layers = state.params.layer_sizes;
  std::size_t expected = 0;
  for (std::size_t l = 0; l + 1 < layers.size(); ++l)
    expected += static_cast<std::size_t>(layers[l]) *
                    static_cast<std::size_t>(layers[l + 1]) +
                static_cast<std::size_t>(layers[l + 1]);
  const int bottleneck = layers[layers.size() / 2];
  expected += static_cast<std::size_t>(k) *
              static_cast<std::size_t>(bottleneck);
  if (blob.size() - 4 - header_len != expected * 4)
    throw std::runtime_error("'" + path + "': parameter blob size mismatch");

  const unsigned char* p = bytes + 4 + header_len;
  state.params.weights.resize(layers.size() - 1);
  state.params.biases.resize(layers.size() - 1);
  for (std::size_t l = 0; l + 1 < layers.size(); ++l) {
    state.params.weights[l].resize(layers[l], layers[l + 1]);
    p = read_f32_rowmajor(p, state.params.weights[l]);
  }
  for (std::size_t l = 0; l + 1 < layers.size(); ++l) {
    state.params.biases[l].resize(layers[l + 1]);
    Eigen::Map<Eigen::MatrixXd> bias(state.params.biases[l].data(),
                                     layers[l + 1], 1);
    Eigen::MatrixXd column(layers[l + 1], 1);
    p = read_f32_rowmajor(p, column);
    bias = column;
  }
  state.centroids.resize(k, bottleneck);
  p = read_f32_rowmajor(p, state.centroids);
  validate(state.params);
  return state;
}

void write_loss_curve(const std::vector<LossBreakdown>& curve,
                      const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open '" + path + "' for writing");
  out << "epoch,l_c,l_r,l_u,l_mse,total\n";
  out.precision(17);
  for (std::size_t e = 0; e < curve.size(); ++e)
    out << e << ',' << curve[e].l_c << ',' << curve[e].l_r << ','
        << curve[e].l_u << ',' << curve[e].l_mse << ',' << curve[e].total
        << '\n';
}

}  // namespace diarcluster
