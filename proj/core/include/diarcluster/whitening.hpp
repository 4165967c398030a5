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

#ifndef DIARCLUSTER_WHITENING_HPP_
#define DIARCLUSTER_WHITENING_HPP_

#include <Eigen/Dense>

namespace diarcluster {

// PCA projection with per-component variance normalisation.  Components are
// ordered by decreasing variance; each eigenvector's sign is fixed so that
// its largest-magnitude entry is positive, which makes the projection
// deterministic across eigensolver implementations.
class PcaWhitener {
 public:
  // Fits on the rows of `data` (one observation per row) and keeps the top
  // `out_dim` components (out_dim <= data dimension; 0 keeps every
  // component).  Covariance uses the population convention (divide by n).
  // Standard deviations are floored at 1e-8 times the largest one before
  // inversion so near-null directions cannot blow up the projection.
  void fit(const Eigen::MatrixXd& data, Eigen::Index out_dim = 0);

  bool fitted() const { return components_.size() > 0; }
  Eigen::Index input_dim() const { return mean_.size(); }
  Eigen::Index output_dim() const { return components_.cols(); }

  const Eigen::VectorXd& mean() const { return mean_; }
  // input_dim x output_dim, column j is the j-th principal axis.
  const Eigen::MatrixXd& components() const { return components_; }
  // Per-component standard deviations after flooring.
  const Eigen::VectorXd& stddevs() const { return stddevs_; }

  // Projects rows of `data`: ((x - mean) . component_j) / stddev_j.
  Eigen::MatrixXd apply(const Eigen::MatrixXd& data) const;
  Eigen::VectorXd apply_vector(const Eigen::VectorXd& x) const;

 private:
  Eigen::VectorXd mean_;
  Eigen::MatrixXd components_;
  Eigen::VectorXd stddevs_;
};

}  // namespace diarcluster

#endif  // DIARCLUSTER_WHITENING_HPP_
