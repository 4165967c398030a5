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

#include "diarcluster/types.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

namespace diarcluster {

namespace {

[[noreturn]] void fail(const std::string& msg) {
  throw std::invalid_argument(msg);
}

std::string describe(const Segment& seg) {
  std::ostringstream os;
  os << "[" << seg.start << ", " << seg.end << "]";
  if (seg.ref_speaker) os << " (" << *seg.ref_speaker << ")";
  return os.str();
}

}  // namespace

void validate(const FrameMatrix& frames) {
  if (frames.n_frames() < 1) fail("FrameMatrix: need at least one frame");
  if (frames.dim() < 1) fail("FrameMatrix: need at least one coefficient");
  if (!(frames.frame_period > 0.0))
    fail("FrameMatrix: frame_period must be > 0");
  if (!frames.frames.allFinite())
    fail("FrameMatrix: non-finite frame coefficient in session '" +
         frames.session_id + "'");
}

void validate(const SegmentTable& table) {
  for (std::size_t i = 0; i < table.segments.size(); ++i) {
    const Segment& seg = table.segments[i];
    if (!(seg.start >= 0.0) || !(seg.start < seg.end))
      fail("SegmentTable '" + table.session_id + "': bad segment " +
           describe(seg));
    if (i > 0) {
      const Segment& prev = table.segments[i - 1];
      if (seg.start < prev.start)
        fail("SegmentTable '" + table.session_id +
             "': segments not sorted by start: " + describe(prev) +
             " before " + describe(seg));
      // Sub-nanosecond overlap is parsing noise (e.g. tbeg + tdur of an
      // abutting RTTM line), not a real overlap.
      if (seg.start < prev.end - 1e-9)
        fail("SegmentTable '" + table.session_id + "': segments " +
             describe(prev) + " and " + describe(seg) + " overlap");
    }
  }
}

FrameSpan frame_span(const FrameMatrix& frames, const Segment& seg) {
  const double period = frames.frame_period;
  const double rel_start = seg.start - frames.start_time;
  const double rel_end = seg.end - frames.start_time;
  const auto n = frames.n_frames();
  const auto raw_first =
      static_cast<Eigen::Index>(std::floor(rel_start / period));
  const auto raw_last =
      static_cast<Eigen::Index>(std::ceil(rel_end / period)) - 1;
  if (raw_last < 0 || raw_first >= n || raw_last < raw_first) {
    std::ostringstream os;
    os << "segment " << describe(seg) << " covers no frame of session '"
       << frames.session_id << "' (" << n << " frames, period " << period
       << "s)";
    fail(os.str());
  }
  FrameSpan span;
  span.first = std::max<Eigen::Index>(raw_first, 0);
  span.last = std::min<Eigen::Index>(raw_last, n - 1);
  return span;
}

const char* to_string(CentroidSource source) {
  switch (source) {
    case CentroidSource::random_init:
      return "random_init";
    case CentroidSource::plusplus_init:
      return "plusplus_init";
    case CentroidSource::profile_init:
      return "profile_init";
  }
  return "unknown";
}

CentroidSource centroid_source_from_string(const std::string& name) {
  if (name == "random_init") return CentroidSource::random_init;
  if (name == "plusplus_init") return CentroidSource::plusplus_init;
  if (name == "profile_init") return CentroidSource::profile_init;
  fail("unknown centroid source '" + name + "'");
}

void validate(const ClusterModel& model) {
  if (model.k < 1) fail("ClusterModel: k must be >= 1");
  if (model.centroids.rows() != model.k)
    fail("ClusterModel: centroid row count does not match k");
  if (!model.centroids.allFinite()) fail("ClusterModel: non-finite centroid");
  for (int a : model.assignments)
    if (a < 0 || a >= model.k)
      fail("ClusterModel: assignment " + std::to_string(a) +
           " outside [0, k)");
}

void validate(const SpeakerProfiles& profiles) {
  if (profiles.vectors.rows() !=
      static_cast<Eigen::Index>(profiles.labels.size()))
    fail("SpeakerProfiles: row count does not match label count");
  for (std::size_t i = 0; i < profiles.labels.size(); ++i)
    for (std::size_t j = i + 1; j < profiles.labels.size(); ++j)
      if (profiles.labels[i] == profiles.labels[j])
        fail("SpeakerProfiles: duplicate label '" + profiles.labels[i] + "'");
}

}  // namespace diarcluster
