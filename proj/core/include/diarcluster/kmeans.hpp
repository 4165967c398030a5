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

#ifndef DIARCLUSTER_KMEANS_HPP_
#define DIARCLUSTER_KMEANS_HPP_

#include <cstdint>
#include <variant>
#include <vector>

#include "diarcluster/types.hpp"

namespace diarcluster {

// Initial-centroid strategies for Lloyd's algorithm.
struct PlusPlusInit {};                              // k-means++ seeding
struct ProfilesInit { SpeakerProfiles profiles; };   // known-speaker centroids
struct GivenCentroidsInit { Eigen::MatrixXd centroids; };
using KmeansInit = std::variant<PlusPlusInit, ProfilesInit, GivenCentroidsInit>;

struct KmeansOptions {
  int k = 1;
  KmeansInit init = PlusPlusInit{};
  std::uint64_t seed = 0;
  int max_iter = 300;
  double tol = 1e-6;  // convergence threshold on max centroid movement
};

// Lloyd iterations until the largest centroid shift drops below tol or
// max_iter is reached.  The within-cluster sum of squares is non-increasing
// across iterations.  A cluster left empty by an assignment step is re-seeded
// at the sample currently farthest from its own centroid (deterministic;
// ties break toward the lowest sample index).  Bit-reproducible per seed.
ClusterModel kmeans(const Eigen::MatrixXd& data, const KmeansOptions& options);

// Nearest-centroid label per row of `data` (squared Euclidean); equidistant
// samples take the lowest cluster index.
std::vector<int> assign_to_centroids(const ClusterModel& model,
                                     const Eigen::MatrixXd& data);

// Within-cluster sum of squared distances for the model's own assignment.
double kmeans_objective(const Eigen::MatrixXd& data, const ClusterModel& model);

}  // namespace diarcluster

#endif  // DIARCLUSTER_KMEANS_HPP_
