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

#ifndef DIARCLUSTER_SCORING_HPP_
#define DIARCLUSTER_SCORING_HPP_

#include <map>
#include <string>
#include <vector>

#include "diarcluster/types.hpp"

namespace diarcluster {

// Duration-weighted clustering score under the optimal one-to-one mapping of
// hypothesis clusters to reference speakers.  Segmentation is taken as
// oracle, so missed and false-alarm speech are structurally zero and the
// error is pure speaker confusion.
struct ScoreReport {
  double total_speech = 0.0;  // seconds
  double correct = 0.0;       // seconds matched under the mapping
  double recall_pct = 0.0;    // 100 * correct / total_speech
  double error_pct = 0.0;     // 100 - recall_pct
  double missed_speech = 0.0;     // structurally zero, reported explicitly
  double false_alarm = 0.0;       // structurally zero, reported explicitly
  std::map<int, std::string> mapping;  // hypothesis cluster -> speaker
  std::vector<std::string> speakers;   // column order of `confusion`
  Eigen::MatrixXd confusion;  // clusters x speakers, seconds
};

// Scores per-segment cluster ids against the reference labels of `ref`.
// `hyp` must hold one cluster id (>= 0) per reference segment.  The mapping
// maximizes matched duration; with more clusters than speakers the unmapped
// clusters count entirely as error.
ScoreReport score(const SegmentTable& ref, const std::vector<int>& hyp);

enum class DurationFilter { keep_longer, keep_shorter };

// As score(), restricted to segments with duration > min_duration
// (keep_longer) or duration <= min_duration (keep_shorter).  An empty
// retained set is an error.
ScoreReport score_filtered(const SegmentTable& ref,
                           const std::vector<int>& hyp, double min_duration,
                           DurationFilter filter =
                               DurationFilter::keep_longer);

// Minimum-cost assignment on a square cost matrix; returns the column chosen
// for each row.  Exposed so the optimal-mapping guarantee can be checked
// against exhaustive search.
std::vector<int> hungarian_min(const Eigen::MatrixXd& cost);

// JSON rendering of a report (stable key order).
std::string to_json(const ScoreReport& report);

}  // namespace diarcluster

#endif  // DIARCLUSTER_SCORING_HPP_
