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

#include "diarcluster/kmeans.hpp"

#include <limits>
#include <stdexcept>
#include <string>

#include "diarcluster/rng.hpp"

namespace diarcluster {

namespace {

Eigen::MatrixXd plusplus_centroids(const Eigen::MatrixXd& data, int k,
                                   Rng& rng) {
  const Eigen::Index n = data.rows();
  Eigen::MatrixXd centroids(k, data.cols());
  centroids.row(0) = data.row(rng.uniform_int(static_cast<int>(n)));
  Eigen::VectorXd d2 =
      (data.rowwise() - centroids.row(0)).rowwise().squaredNorm();
  for (int j = 1; j < k; ++j) {
    const double total = d2.sum();
    Eigen::Index pick;
    if (total > 0.0) {
      // Sample proportionally to squared distance from the chosen set.
      const double r = rng.uniform() * total;
      double cum = 0.0;
      pick = n - 1;
      for (Eigen::Index i = 0; i < n; ++i) {
        cum += d2(i);
        if (cum > r) {
          pick = i;
          break;
        }
      }
    } else {
      // Every sample coincides with a chosen centroid; pick uniformly.
      pick = rng.uniform_int(static_cast<int>(n));
    }
    centroids.row(j) = data.row(pick);
    d2 = d2.cwiseMin(
        (data.rowwise() - centroids.row(j)).rowwise().squaredNorm());
  }
  return centroids;
}

std::vector<int> nearest_centroid(const Eigen::MatrixXd& data,
                                  const Eigen::MatrixXd& centroids) {
  const Eigen::Index n = data.rows();
  const Eigen::Index k = centroids.rows();
  std::vector<int> labels(static_cast<std::size_t>(n), 0);
  for (Eigen::Index i = 0; i < n; ++i) {
    double best = std::numeric_limits<double>::infinity();
    int best_j = 0;
    for (Eigen::Index j = 0; j < k; ++j) {
      const double d2 = (data.row(i) - centroids.row(j)).squaredNorm();
      if (d2 < best) {
        best = d2;
        best_j = static_cast<int>(j);
      }
    }
    labels[static_cast<std::size_t>(i)] = best_j;
  }
  return labels;
}

// Moves the sample farthest from its own centroid into each empty cluster,
// lowest cluster index first; a sample is moved at most once per call.
void fill_empty_clusters(const Eigen::MatrixXd& data,
                         const Eigen::MatrixXd& centroids,
                         std::vector<int>& labels) {
  const Eigen::Index n = data.rows();
  const int k = static_cast<int>(centroids.rows());
  std::vector<Eigen::Index> counts(static_cast<std::size_t>(k), 0);
  for (int label : labels) ++counts[static_cast<std::size_t>(label)];
  std::vector<bool> moved(static_cast<std::size_t>(n), false);
  for (int j = 0; j < k; ++j) {
    if (counts[static_cast<std::size_t>(j)] > 0) continue;
    double worst = -1.0;
    Eigen::Index pick = -1;
    for (Eigen::Index i = 0; i < n; ++i) {
      if (moved[static_cast<std::size_t>(i)]) continue;
      const int owner = labels[static_cast<std::size_t>(i)];
      if (counts[static_cast<std::size_t>(owner)] <= 1) continue;
      const double d2 = (data.row(i) - centroids.row(owner)).squaredNorm();
      if (d2 > worst) {
        worst = d2;
        pick = i;
      }
    }
    if (pick < 0)
      throw std::runtime_error(
          "cannot re-seed empty cluster " + std::to_string(j) +
          ": no donor cluster has more than one sample");
    --counts[static_cast<std::size_t>(
        labels[static_cast<std::size_t>(pick)])];
    labels[static_cast<std::size_t>(pick)] = j;
    counts[static_cast<std::size_t>(j)] = 1;
    moved[static_cast<std::size_t>(pick)] = true;
  }
}

Eigen::MatrixXd cluster_means(const Eigen::MatrixXd& data,
                              const std::vector<int>& labels, int k) {
  Eigen::MatrixXd sums = Eigen::MatrixXd::Zero(k, data.cols());
  Eigen::VectorXd counts = Eigen::VectorXd::Zero(k);
  for (Eigen::Index i = 0; i < data.rows(); ++i) {
    const int j = labels[static_cast<std::size_t>(i)];
    sums.row(j) += data.row(i);
    counts(j) += 1.0;
  }
  for (int j = 0; j < k; ++j) sums.row(j) /= counts(j);
  return sums;
}

}  // namespace

ClusterModel kmeans(const Eigen::MatrixXd& data, const KmeansOptions& options) {
  const Eigen::Index n = data.rows();
  const int k = options.k;
  if (k < 1)
    throw std::invalid_argument("kmeans needs k >= 1, got " +
                                std::to_string(k));
  if (n < k)
    throw std::invalid_argument("kmeans needs at least k=" +
                                std::to_string(k) + " samples, got " +
                                std::to_string(n));
  if (!data.allFinite())
    throw std::invalid_argument("kmeans data contains non-finite values");
  if (options.max_iter < 1)
    throw std::invalid_argument("kmeans max_iter must be >= 1");

  Rng rng(options.seed);
  ClusterModel model;
  model.k = k;
  if (std::holds_alternative<PlusPlusInit>(options.init)) {
    model.centroids = plusplus_centroids(data, k, rng);
    model.source = CentroidSource::plusplus_init;
  } else if (const auto* profiles = std::get_if<ProfilesInit>(&options.init)) {
    validate(profiles->profiles);
    if (profiles->profiles.vectors.rows() != k)
      throw std::invalid_argument(
          "profile count " +
          std::to_string(profiles->profiles.vectors.rows()) +
          " does not match k=" + std::to_string(k));
    if (profiles->profiles.vectors.cols() != data.cols())
      throw std::invalid_argument("profile dimension does not match data");
    model.centroids = profiles->profiles.vectors;
    model.source = CentroidSource::profile_init;
  } else {
    const auto& given = std::get<GivenCentroidsInit>(options.init);
    if (given.centroids.rows() != k || given.centroids.cols() != data.cols())
      throw std::invalid_argument("given centroids must be k x dim");
    if (!given.centroids.allFinite())
      throw std::invalid_argument("given centroids contain non-finite values");
    model.centroids = given.centroids;
    model.source = CentroidSource::random_init;
  }

  model.assignments = nearest_centroid(data, model.centroids);
  fill_empty_clusters(data, model.centroids, model.assignments);
  for (int iter = 0; iter < options.max_iter; ++iter) {
    const Eigen::MatrixXd next = cluster_means(data, model.assignments, k);
    const double shift = (next - model.centroids).rowwise().norm().maxCoeff();
    model.centroids = next;
    model.assignments = nearest_centroid(data, model.centroids);
    fill_empty_clusters(data, model.centroids, model.assignments);
    if (shift < options.tol) break;
  }
  return model;
}

std::vector<int> assign_to_centroids(const ClusterModel& model,
                                     const Eigen::MatrixXd& data) {
  if (model.centroids.cols() != data.cols())
    throw std::invalid_argument(
        "data dimension " + std::to_string(data.cols()) +
        " does not match centroid dimension " +
        std::to_string(model.centroids.cols()));
  if (!data.allFinite())
    throw std::invalid_argument("assignment data contains non-finite values");
  return nearest_centroid(data, model.centroids);
}

double kmeans_objective(const Eigen::MatrixXd& data,
                        const ClusterModel& model) {
  if (data.rows() != static_cast<Eigen::Index>(model.assignments.size()))
    throw std::invalid_argument("objective needs one assignment per sample");
  double sse = 0.0;
  for (Eigen::Index i = 0; i < data.rows(); ++i) {
    const int j = model.assignments[static_cast<std::size_t>(i)];
    sse += (data.row(i) - model.centroids.row(j)).squaredNorm();
  }
  return sse;
}

}  // namespace diarcluster
