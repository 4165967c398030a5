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

#ifndef DIARCLUSTER_TYPES_HPP
#define DIARCLUSTER_TYPES_HPP

#include <Eigen/Dense>
#include <optional>
#include <string>
#include <vector>

namespace diarcluster {

// Per-session sequence of frame-level embeddings. Row n is the embedding of
// frame n; frame n covers session time [start_time + n*frame_period,
// start_time + (n+1)*frame_period).
struct FrameMatrix {
  std::string session_id;
  Eigen::MatrixXd frames;  // N x D
  double frame_period = 0.01;
  double start_time = 0.0;

  Eigen::Index n_frames() const { return frames.rows(); }
  Eigen::Index dim() const { return frames.cols(); }
};

// Throws std::invalid_argument if N < 1, D < 1, frame_period <= 0 or any
// entry is non-finite.
void validate(const FrameMatrix& frames);

struct Segment {
  double start = 0.0;
  double end = 0.0;
  std::optional<std::string> ref_speaker;

  double duration() const { return end - start; }
};

// Ordered, non-overlapping speaker turns for one session. Tables are oracle
// segmentations: overlap is a validation error, never resolved silently.
struct SegmentTable {
  std::string session_id;
  std::vector<Segment> segments;
};

void validate(const SegmentTable& table);

// Inclusive frame index range [first, last] covered by a segment:
// first = floor((start - start_time)/period), last = ceil((end -
// start_time)/period) - 1, clamped to the matrix. Throws
// std::invalid_argument if the segment covers no frame.
struct FrameSpan {
  Eigen::Index first = 0;
  Eigen::Index last = 0;

  Eigen::Index count() const { return last - first + 1; }
};

FrameSpan frame_span(const FrameMatrix& frames, const Segment& seg);

// One aggregated embedding per segment.
struct SegmentEmbedding {
  Eigen::VectorXd vector;
  double duration = 0.0;
  int segment_index = 0;
  std::optional<std::string> ref_speaker;
};

enum class CentroidSource { random_init, plusplus_init, profile_init };

const char* to_string(CentroidSource source);
CentroidSource centroid_source_from_string(const std::string& name);

// k centroids plus the per-sample assignment that defines the cluster sets.
// `source` records the initial-centroid provenance; explicitly supplied
// centroids are recorded as random_init.
struct ClusterModel {
  int k = 0;
  Eigen::MatrixXd centroids;     // k x D
  std::vector<int> assignments;  // values in [0, k)
  CentroidSource source = CentroidSource::plusplus_init;
};

void validate(const ClusterModel& model);

// Known-speaker centroids usable as a clustering initializer.
struct SpeakerProfiles {
  std::vector<std::string> labels;
  Eigen::MatrixXd vectors;  // labels.size() x D
};

void validate(const SpeakerProfiles& profiles);

}  // namespace diarcluster

#endif  // DIARCLUSTER_TYPES_HPP
