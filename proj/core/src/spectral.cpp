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

#include "diarcluster/spectral.hpp"

#include <stdexcept>
#include <string>

#include "diarcluster/kmeans.hpp"

namespace diarcluster {

void validate(const SimilarityMatrix& similarity) {
  const Eigen::MatrixXd& A = similarity.values;
  if (A.rows() < 1 || A.rows() != A.cols())
    throw std::invalid_argument("similarity matrix must be square and non-empty");
  if ((A - A.transpose()).cwiseAbs().maxCoeff() >= 1e-10)
    throw std::invalid_argument("similarity matrix is not symmetric");
  if (A.minCoeff() < 0.0)
    throw std::invalid_argument("similarity matrix has negative entries");
  if ((A.diagonal().array() - 1.0).abs().maxCoeff() > 1e-12)
    throw std::invalid_argument("similarity matrix diagonal must be 1");
}

SimilarityMatrix cosine_similarity(const Eigen::MatrixXd& data) {
  if (!data.allFinite())
    throw std::invalid_argument("similarity data contains non-finite values");
  const Eigen::Index n = data.rows();
  const Eigen::VectorXd norms = data.rowwise().norm();
  for (Eigen::Index i = 0; i < n; ++i)
    if (norms(i) == 0.0)
      throw std::invalid_argument("sample " + std::to_string(i) +
                                  " has zero norm; cosine is undefined");
  SimilarityMatrix similarity;
  similarity.values =
      ((data * data.transpose()).array() /
       (norms * norms.transpose()).array())
          .max(0.0)
          .matrix();
  // Force exact symmetry and unit diagonal against round-off.
  similarity.values =
      0.5 * (similarity.values + similarity.values.transpose());
  similarity.values.diagonal().setOnes();
  validate(similarity);
  return similarity;
}

ClusterModel spectral_cluster(const SimilarityMatrix& similarity,
                              const Eigen::MatrixXd& data, int k,
                              std::uint64_t seed) {
  validate(similarity);
  const Eigen::Index n = similarity.size();
  if (k < 2)
    throw std::invalid_argument("spectral clustering needs k >= 2, got " +
                                std::to_string(k));
  if (n < k)
    throw std::invalid_argument("spectral clustering needs at least k=" +
                                std::to_string(k) + " samples, got " +
                                std::to_string(n));
  if (data.rows() != n)
    throw std::invalid_argument("affinity size does not match sample count");

  const Eigen::VectorXd degrees = similarity.values.rowwise().sum();
  for (Eigen::Index i = 0; i < n; ++i)
    if (degrees(i) <= 0.0)
      throw std::invalid_argument("sample " + std::to_string(i) +
                                  " is disconnected (zero degree)");
  const Eigen::VectorXd inv_sqrt = degrees.cwiseSqrt().cwiseInverse();
  Eigen::MatrixXd laplacian =
      Eigen::MatrixXd::Identity(n, n) -
      (inv_sqrt * inv_sqrt.transpose()).cwiseProduct(similarity.values);
  laplacian = 0.5 * (laplacian + laplacian.transpose());

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(laplacian);
  if (solver.info() != Eigen::Success)
    throw std::runtime_error("Laplacian eigendecomposition failed");
  // Eigenvalues come in increasing order; keep the k lowest directions and
  // fix each eigenvector's sign for determinism.
  Eigen::MatrixXd embedding = solver.eigenvectors().leftCols(k);
  for (Eigen::Index j = 0; j < embedding.cols(); ++j) {
    Eigen::Index peak = 0;
    embedding.col(j).cwiseAbs().maxCoeff(&peak);
    if (embedding(peak, j) < 0.0) embedding.col(j) = -embedding.col(j);
  }
  for (Eigen::Index i = 0; i < n; ++i) {
    const double norm = embedding.row(i).norm();
    if (norm > 0.0) embedding.row(i) /= norm;
  }

  KmeansOptions options;
  options.k = k;
  options.seed = seed;
  ClusterModel model = kmeans(embedding, options);

  // Replace spectral-space centroids with input-space cluster means so the
  // model can be applied to samples that were not part of the affinity.
  Eigen::MatrixXd sums = Eigen::MatrixXd::Zero(k, data.cols());
  Eigen::VectorXd counts = Eigen::VectorXd::Zero(k);
  for (Eigen::Index i = 0; i < n; ++i) {
    const int j = model.assignments[static_cast<std::size_t>(i)];
    sums.row(j) += data.row(i);
    counts(j) += 1.0;
  }
  for (int j = 0; j < k; ++j) sums.row(j) /= counts(j);
  model.centroids = sums;
  validate(model);
  return model;
}

ClusterModel spectral_cluster(const Eigen::MatrixXd& data, int k,
                              std::uint64_t seed) {
  return spectral_cluster(cosine_similarity(data), data, k, seed);
}

}  // namespace diarcluster
