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

#ifndef DIARCLUSTER_AGGREGATE_HPP_
#define DIARCLUSTER_AGGREGATE_HPP_

#include <vector>

#include "diarcluster/types.hpp"

namespace diarcluster {

enum class Aggregation { median, mean };

const char* to_string(Aggregation aggregation);
Aggregation aggregation_from_string(const std::string& name);

// Component-wise median of the frames covered by the segment.  An even
// number of frames takes the midpoint of the two central values per
// dimension.  Throws std::invalid_argument if the segment covers no frames.
Eigen::VectorXd aggregate_median(const FrameMatrix& frames,
                                 const Segment& segment);

// Component-wise mean over the same frame span.
Eigen::VectorXd aggregate_mean(const FrameMatrix& frames,
                               const Segment& segment);

// Aggregates every segment of the table against the session's frames.
// The result preserves segment order; each embedding records the segment's
// duration, index, and reference speaker (when present).
std::vector<SegmentEmbedding> aggregate_table(const FrameMatrix& frames,
                                              const SegmentTable& segments,
                                              Aggregation aggregation);

// Stacks segment embeddings into a row-per-segment matrix.
Eigen::MatrixXd embedding_matrix(const std::vector<SegmentEmbedding>& items);

}  // namespace diarcluster

#endif  // DIARCLUSTER_AGGREGATE_HPP_
