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

#include "diarcluster/whitening.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace diarcluster {

void PcaWhitener::fit(const Eigen::MatrixXd& data, Eigen::Index out_dim) {
  const Eigen::Index n = data.rows();
  const Eigen::Index d = data.cols();
  if (n < 1) throw std::invalid_argument("PCA fit needs at least one row");
  if (out_dim < 0 || out_dim > d)
    throw std::invalid_argument("PCA output dimension " +
                                std::to_string(out_dim) +
                                " out of range for input dimension " +
                                std::to_string(d));
  if (!data.allFinite())
    throw std::invalid_argument("PCA fit data contains non-finite values");
  if (out_dim == 0) out_dim = d;
  if (out_dim > n)
    throw std::invalid_argument(
        "PCA output dimension " + std::to_string(out_dim) + " exceeds the " +
        std::to_string(n) +
        " training samples; lower the dimension or the duration threshold");

  mean_ = data.colwise().mean().transpose();
  const Eigen::MatrixXd centered = data.rowwise() - mean_.transpose();
  const Eigen::MatrixXd cov =
      (centered.transpose() * centered) / static_cast<double>(n);

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(cov);
  if (solver.info() != Eigen::Success)
    throw std::runtime_error("PCA eigendecomposition failed to converge");

  // Eigen returns eigenvalues in increasing order; take the top out_dim.
  components_.resize(d, out_dim);
  Eigen::VectorXd variances(out_dim);
  for (Eigen::Index j = 0; j < out_dim; ++j) {
    const Eigen::Index src = d - 1 - j;
    Eigen::VectorXd axis = solver.eigenvectors().col(src);
    Eigen::Index peak = 0;
    axis.cwiseAbs().maxCoeff(&peak);
    if (axis(peak) < 0.0) axis = -axis;
    components_.col(j) = axis;
    variances(j) = std::max(solver.eigenvalues()(src), 0.0);
  }

  stddevs_ = variances.cwiseSqrt();
  const double floor_value = 1e-8 * stddevs_.maxCoeff();
  stddevs_ = stddevs_.cwiseMax(floor_value);
  if (stddevs_.maxCoeff() <= 0.0)
    throw std::runtime_error("PCA fit data has zero variance everywhere");
}

Eigen::MatrixXd PcaWhitener::apply(const Eigen::MatrixXd& data) const {
  if (!fitted()) throw std::logic_error("PCA whitener has not been fitted");
  if (data.cols() != input_dim())
    throw std::invalid_argument("PCA apply dimension " +
                                std::to_string(data.cols()) +
                                " does not match fit dimension " +
                                std::to_string(input_dim()));
  const Eigen::MatrixXd projected =
      (data.rowwise() - mean_.transpose()) * components_;
  return (projected.array().rowwise() / stddevs_.transpose().array())
      .matrix();
}

Eigen::VectorXd PcaWhitener::apply_vector(const Eigen::VectorXd& x) const {
  return apply(x.transpose()).row(0).transpose();
}

}  // namespace diarcluster
