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

#ifndef DIARCLUSTER_SPECTRAL_HPP_
#define DIARCLUSTER_SPECTRAL_HPP_

#include <cstdint>

#include "diarcluster/types.hpp"

namespace diarcluster {

// Symmetric pairwise-affinity matrix with non-negative entries and a unit
// diagonal.
struct SimilarityMatrix {
  Eigen::MatrixXd values;  // n x n

  Eigen::Index size() const { return values.rows(); }
};

// Throws std::invalid_argument when the matrix is not square/symmetric, has
// negative entries, or its diagonal deviates from 1.
void validate(const SimilarityMatrix& similarity);

// Clamped cosine affinity: max(0, cos(x_i, x_j)) with the diagonal forced to
// exactly 1.  A zero-norm row is an error naming the sample.
SimilarityMatrix cosine_similarity(const Eigen::MatrixXd& data);

// Clusters the rows of `data` through the spectrum of the symmetric
// normalized Laplacian L = I - D^(-1/2) A D^(-1/2) of the cosine affinity:
// the eigenvectors of the k smallest eigenvalues are row-normalized and
// k-means++ clustered.  Returned centroids are per-cluster means in the
// input space so the model can label new samples directly.
ClusterModel spectral_cluster(const Eigen::MatrixXd& data, int k,
                              std::uint64_t seed);

// Same pipeline starting from a precomputed affinity; `data` supplies the
// input-space rows used for the returned centroids.
ClusterModel spectral_cluster(const SimilarityMatrix& similarity,
                              const Eigen::MatrixXd& data, int k,
                              std::uint64_t seed);

}  // namespace diarcluster

#endif  // DIARCLUSTER_SPECTRAL_HPP_
