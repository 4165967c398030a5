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

#ifndef DIARCLUSTER_BIC_HPP_
#define DIARCLUSTER_BIC_HPP_

#include <cstdint>
#include <string>

#include "diarcluster/types.hpp"

namespace diarcluster {

struct BicReport {
  std::string model_id;
  double log_likelihood = 0.0;
  int n_params = 0;
  Eigen::Index n_samples = 0;
  double bic = 0.0;  // log_likelihood - (n_params / 2) * ln(n_samples)
  double variance = 0.0;
  bool variance_floored = false;
};

// Spherical-Gaussian mixture score of the model on `data`, using the shared
// maximum-likelihood variance sigma^2 = SSE / (n * d) and natural logs:
//   LL = sum_j n_j ln(n_j / n) - (n d / 2) (ln(2 pi sigma^2) + 1)
// with parameter count k*d centroid coordinates + (k - 1) mixing weights
// + 1 shared variance = k*d + k.  Identical points drive the variance to
// zero; it is floored at 1e-12 and flagged in the report.
BicReport bic_score(const Eigen::MatrixXd& data, const ClusterModel& model,
                    const std::string& model_id = "");

struct XmeansOptions {
  int k_min = 1;
  int k_max = 16;
  std::uint64_t seed = 0;
  int max_iter = 300;
  double tol = 1e-6;
  // When false (default), a cluster split is kept iff the two-cluster score
  // beats the one-cluster score on that cluster's own points.  When true,
  // the best single split per round is kept iff it improves the whole-data
  // score.
  bool global_bic = false;
};

// Starts from k-means at k_min and repeatedly attempts to split clusters in
// two, accepting splits by the BIC rule above, until no split is accepted or
// k_max is reached.  With k_min == k_max this reduces to kmeans() with the
// same seed, bit for bit.
ClusterModel xmeans(const Eigen::MatrixXd& data, const XmeansOptions& options);

}  // namespace diarcluster

#endif  // DIARCLUSTER_BIC_HPP_
