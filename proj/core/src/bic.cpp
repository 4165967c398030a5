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

#include "diarcluster/bic.hpp"

#include <cmath>
#include <stdexcept>
#include <vector>

#include "diarcluster/kmeans.hpp"
#include "diarcluster/rng.hpp"

namespace diarcluster {

namespace {

constexpr double kVarianceFloor = 1e-12;
constexpr double kTwoPi = 2.0 * 3.14159265358979323846;

Eigen::MatrixXd rows_of_cluster(const Eigen::MatrixXd& data,
                                const std::vector<int>& labels, int cluster) {
  Eigen::Index count = 0;
  for (int label : labels)
    if (label == cluster) ++count;
  Eigen::MatrixXd subset(count, data.cols());
  Eigen::Index r = 0;
  for (Eigen::Index i = 0; i < data.rows(); ++i)
    if (labels[static_cast<std::size_t>(i)] == cluster)
      subset.row(r++) = data.row(i);
  return subset;
}

ClusterModel single_cluster_model(const Eigen::MatrixXd& data) {
  ClusterModel model;
  model.k = 1;
  model.centroids = data.colwise().mean();
  model.assignments.assign(static_cast<std::size_t>(data.rows()), 0);
  return model;
}

}  // namespace

BicReport bic_score(const Eigen::MatrixXd& data, const ClusterModel& model,
                    const std::string& model_id) {
  const Eigen::Index n = data.rows();
  const Eigen::Index d = data.cols();
  if (n < 1) throw std::invalid_argument("BIC needs at least one sample");
  if (model.centroids.cols() != d)
    throw std::invalid_argument("BIC model dimension does not match data");
  if (static_cast<Eigen::Index>(model.assignments.size()) != n)
    throw std::invalid_argument("BIC needs one assignment per sample");

  BicReport report;
  report.model_id = model_id;
  report.n_samples = n;
  report.n_params = model.k * static_cast<int>(d) + model.k;

  double sse = 0.0;
  std::vector<Eigen::Index> counts(static_cast<std::size_t>(model.k), 0);
  for (Eigen::Index i = 0; i < n; ++i) {
    const int j = model.assignments[static_cast<std::size_t>(i)];
    sse += (data.row(i) - model.centroids.row(j)).squaredNorm();
    ++counts[static_cast<std::size_t>(j)];
  }
  report.variance = sse / (static_cast<double>(n) * static_cast<double>(d));
  if (report.variance < kVarianceFloor) {
    report.variance = kVarianceFloor;
    report.variance_floored = true;
  }

  double ll = 0.0;
  for (Eigen::Index count : counts) {
    if (count == 0) continue;  // lim x->0 of x ln x
    const double nj = static_cast<double>(count);
    ll += nj * std::log(nj / static_cast<double>(n));
  }
  ll -= 0.5 * static_cast<double>(n) * static_cast<double>(d) *
        (std::log(kTwoPi * report.variance) + 1.0);
  report.log_likelihood = ll;
  report.bic =
      ll - 0.5 * report.n_params * std::log(static_cast<double>(n));
  return report;
}

ClusterModel xmeans(const Eigen::MatrixXd& data, const XmeansOptions& options) {
  const Eigen::Index n = data.rows();
  if (options.k_min < 1 || options.k_min > options.k_max ||
      static_cast<Eigen::Index>(options.k_max) > n)
    throw std::invalid_argument("xmeans needs 1 <= k_min <= k_max <= n");

  KmeansOptions base;
  base.k = options.k_min;
  base.seed = options.seed;
  base.max_iter = options.max_iter;
  base.tol = options.tol;
  ClusterModel model = kmeans(data, base);

  std::uint64_t stream = 0;
  auto split_cluster = [&](const Eigen::MatrixXd& subset) {
    KmeansOptions split;
    split.k = 2;
    split.seed = derive_seed(options.seed, ++stream);
    split.max_iter = options.max_iter;
    split.tol = options.tol;
    return kmeans(subset, split);
  };
  auto refine = [&](const Eigen::MatrixXd& centroids) {
    KmeansOptions refit;
    refit.k = static_cast<int>(centroids.rows());
    refit.init = GivenCentroidsInit{centroids};
    refit.seed = derive_seed(options.seed, ++stream);
    refit.max_iter = options.max_iter;
    refit.tol = options.tol;
    ClusterModel refined = kmeans(data, refit);
    refined.source = model.source;  // keep the original init provenance
    return refined;
  };

  while (model.k < options.k_max) {
    bool any_accepted = false;
    if (!options.global_bic) {
      std::vector<Eigen::RowVectorXd> rows;
      int k_now = model.k;
      for (int j = 0; j < model.k; ++j) {
        const Eigen::MatrixXd subset =
            rows_of_cluster(data, model.assignments, j);
        if (subset.rows() >= 2 && k_now < options.k_max) {
          const double parent =
              bic_score(subset, single_cluster_model(subset)).bic;
          const ClusterModel child = split_cluster(subset);
          if (bic_score(subset, child).bic > parent) {
            rows.emplace_back(child.centroids.row(0));
            rows.emplace_back(child.centroids.row(1));
            ++k_now;
            any_accepted = true;
            continue;
          }
        }
        rows.emplace_back(model.centroids.row(j));
      }
      if (!any_accepted) break;
      Eigen::MatrixXd centroids(static_cast<Eigen::Index>(rows.size()),
                                data.cols());
      for (std::size_t r = 0; r < rows.size(); ++r)
        centroids.row(static_cast<Eigen::Index>(r)) = rows[r];
      model = refine(centroids);
    } else {
      // Global mode: apply the single split that most improves the
      // whole-data score, if any.
      double best_bic = bic_score(data, model).bic;
      ClusterModel best;
      for (int j = 0; j < model.k; ++j) {
        const Eigen::MatrixXd subset =
            rows_of_cluster(data, model.assignments, j);
        if (subset.rows() < 2) continue;
        const ClusterModel child = split_cluster(subset);
        Eigen::MatrixXd centroids(model.k + 1, data.cols());
        Eigen::Index r = 0;
        for (int c = 0; c < model.k; ++c) {
          if (c == j) {
            centroids.row(r++) = child.centroids.row(0);
            centroids.row(r++) = child.centroids.row(1);
          } else {
            centroids.row(r++) = model.centroids.row(c);
          }
        }
        const ClusterModel candidate = refine(centroids);
        const double candidate_bic = bic_score(data, candidate).bic;
        if (candidate_bic > best_bic) {
          best_bic = candidate_bic;
          best = candidate;
          any_accepted = true;
        }
      }
      if (!any_accepted) break;
      model = best;
    }
  }
  validate(model);
  return model;
}

}  // namespace diarcluster
