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

#include "diarcluster/aggregate.hpp"

#include <algorithm>
#include <stdexcept>
#include <string>

namespace diarcluster {

const char* to_string(Aggregation aggregation) {
  switch (aggregation) {
    case Aggregation::median:
      return "median";
    case Aggregation::mean:
      return "mean";
  }
  throw std::invalid_argument("unknown aggregation value");
}

Aggregation aggregation_from_string(const std::string& name) {
  if (name == "median") return Aggregation::median;
  if (name == "mean") return Aggregation::mean;
  throw std::invalid_argument("unknown aggregation '" + name +
                              "' (expected median or mean)");
}

Eigen::VectorXd aggregate_median(const FrameMatrix& frames,
                                 const Segment& segment) {
  const FrameSpan span = frame_span(frames, segment);
  const Eigen::Index count = span.count();
  Eigen::VectorXd result(frames.dim());
  std::vector<double> column(static_cast<std::size_t>(count));
  for (Eigen::Index c = 0; c < frames.dim(); ++c) {
    for (Eigen::Index i = 0; i < count; ++i)
      column[static_cast<std::size_t>(i)] = frames.frames(span.first + i, c);
    const std::size_t mid = column.size() / 2;
    std::nth_element(column.begin(), column.begin() + mid, column.end());
    double median = column[mid];
    if (column.size() % 2 == 0) {
      // Midpoint of the two central order statistics.
      const double below =
          *std::max_element(column.begin(), column.begin() + mid);
      median = 0.5 * (below + median);
    }
    result(c) = median;
  }
  return result;
}

Eigen::VectorXd aggregate_mean(const FrameMatrix& frames,
                               const Segment& segment) {
  const FrameSpan span = frame_span(frames, segment);
  return frames.frames.middleRows(span.first, span.count())
      .colwise()
      .mean()
      .transpose();
}

std::vector<SegmentEmbedding> aggregate_table(const FrameMatrix& frames,
                                              const SegmentTable& segments,
                                              Aggregation aggregation) {
  validate(frames);
  validate(segments);
  std::vector<SegmentEmbedding> items;
  items.reserve(segments.segments.size());
  for (std::size_t i = 0; i < segments.segments.size(); ++i) {
    const Segment& segment = segments.segments[i];
    SegmentEmbedding item;
    item.vector = aggregation == Aggregation::median
                      ? aggregate_median(frames, segment)
                      : aggregate_mean(frames, segment);
    item.duration = segment.duration();
    item.segment_index = static_cast<int>(i);
    item.ref_speaker = segment.ref_speaker;
    items.push_back(std::move(item));
  }
  return items;
}

Eigen::MatrixXd embedding_matrix(const std::vector<SegmentEmbedding>& items) {
  if (items.empty())
    throw std::invalid_argument("no segment embeddings to stack");
  Eigen::MatrixXd matrix(static_cast<Eigen::Index>(items.size()),
                         items.front().vector.size());
  for (std::size_t i = 0; i < items.size(); ++i) {
    if (items[i].vector.size() != matrix.cols())
      throw std::invalid_argument("segment embeddings have mixed dimensions");
    matrix.row(static_cast<Eigen::Index>(i)) = items[i].vector.transpose();
  }
  return matrix;
}

}  // namespace diarcluster
