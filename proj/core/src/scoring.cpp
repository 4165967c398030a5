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

#include "diarcluster/scoring.hpp"

#include <algorithm>
#include <limits>
#include <stdexcept>

#include <json.hpp>

namespace diarcluster {

namespace {

ScoreReport score_segments(const std::vector<Segment>& segments,
                           const std::vector<int>& hyp) {
  int k = 0;
  for (int id : hyp) {
    if (id < 0)
      throw std::invalid_argument("cluster ids must be non-negative");
    k = std::max(k, id + 1);
  }

  ScoreReport report;
  std::map<std::string, int> speaker_index;
  for (std::size_t s = 0; s < segments.size(); ++s) {
    if (!segments[s].ref_speaker)
      throw std::invalid_argument("segment " + std::to_string(s) +
                                  " has no reference speaker label");
    const std::string& label = *segments[s].ref_speaker;
    if (speaker_index.emplace(label,
                              static_cast<int>(report.speakers.size()))
            .second)
      report.speakers.push_back(label);
  }
  const int m = static_cast<int>(report.speakers.size());

  report.confusion = Eigen::MatrixXd::Zero(k, m);
  for (std::size_t s = 0; s < segments.size(); ++s) {
    const int cluster = hyp[s];
    const int speaker = speaker_index[*segments[s].ref_speaker];
    report.confusion(cluster, speaker) += segments[s].duration();
    report.total_speech += segments[s].duration();
  }

  // Maximize matched duration via min-cost assignment on the negated,
  // zero-padded square matrix.
  const int size = std::max(k, m);
  Eigen::MatrixXd cost = Eigen::MatrixXd::Zero(size, size);
  cost.topLeftCorner(k, m) = -report.confusion;
  const std::vector<int> row_to_col = hungarian_min(cost);
  for (int cluster = 0; cluster < k; ++cluster) {
    const int speaker = row_to_col[static_cast<std::size_t>(cluster)];
    if (speaker >= m) continue;  // surplus cluster: all of it is error
    report.mapping[cluster] = report.speakers[static_cast<std::size_t>(speaker)];
    report.correct += report.confusion(cluster, speaker);
  }
  report.recall_pct = report.total_speech > 0.0
                          ? 100.0 * report.correct / report.total_speech
                          : 0.0;
  report.error_pct = 100.0 - report.recall_pct;
  return report;
}

}  // namespace

ScoreReport score(const SegmentTable& ref, const std::vector<int>& hyp) {
  validate(ref);
  if (hyp.size() != ref.segments.size())
    throw std::invalid_argument(
        "hypothesis covers " + std::to_string(hyp.size()) +
        " segments but the reference has " +
        std::to_string(ref.segments.size()));
  return score_segments(ref.segments, hyp);
}

ScoreReport score_filtered(const SegmentTable& ref,
                           const std::vector<int>& hyp, double min_duration,
                           DurationFilter filter) {
  validate(ref);
  if (hyp.size() != ref.segments.size())
    throw std::invalid_argument(
        "hypothesis covers " + std::to_string(hyp.size()) +
        " segments but the reference has " +
        std::to_string(ref.segments.size()));
  std::vector<Segment> kept_segments;
  std::vector<int> kept_hyp;
  for (std::size_t s = 0; s < ref.segments.size(); ++s) {
    const double duration = ref.segments[s].duration();
    const bool keep = filter == DurationFilter::keep_longer
                          ? duration > min_duration
                          : duration <= min_duration;
    if (keep) {
      kept_segments.push_back(ref.segments[s]);
      kept_hyp.push_back(hyp[s]);
    }
  }
  if (kept_segments.empty())
    throw std::invalid_argument(
        "duration filter at " + std::to_string(min_duration) +
        "s retains no segments");
  return score_segments(kept_segments, kept_hyp);
}

std::vector<int> hungarian_min(const Eigen::MatrixXd& cost) {
  const int n = static_cast<int>(cost.rows());
  if (cost.cols() != n || n < 1)
    throw std::invalid_argument("assignment needs a non-empty square matrix");
  if (!cost.allFinite())
    throw std::invalid_argument("assignment costs must be finite");

  // Potentials-based shortest augmenting path, 1-indexed internally.
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> u(static_cast<std::size_t>(n) + 1, 0.0);
  std::vector<double> v(static_cast<std::size_t>(n) + 1, 0.0);
  std::vector<int> match(static_cast<std::size_t>(n) + 1, 0);  // col -> row
  std::vector<int> way(static_cast<std::size_t>(n) + 1, 0);
  for (int i = 1; i <= n; ++i) {
    match[0] = i;
    int j0 = 0;
    std::vector<double> minv(static_cast<std::size_t>(n) + 1, inf);
    std::vector<bool> used(static_cast<std::size_t>(n) + 1, false);
    do {
      used[static_cast<std::size_t>(j0)] = true;
      const int i0 = match[static_cast<std::size_t>(j0)];
      double delta = inf;
      int j1 = 0;
      for (int j = 1; j <= n; ++j) {
        if (used[static_cast<std::size_t>(j)]) continue;
        const double cur = cost(i0 - 1, j - 1) -
                           u[static_cast<std::size_t>(i0)] -
                           v[static_cast<std::size_t>(j)];
        if (cur < minv[static_cast<std::size_t>(j)]) {
          minv[static_cast<std::size_t>(j)] = cur;
          way[static_cast<std::size_t>(j)] = j0;
        }
        if (minv[static_cast<std::size_t>(j)] < delta) {
          delta = minv[static_cast<std::size_t>(j)];
          j1 = j;
        }
      }
      for (int j = 0; j <= n; ++j) {
        if (used[static_cast<std::size_t>(j)]) {
          u[static_cast<std::size_t>(match[static_cast<std::size_t>(j)])] +=
              delta;
          v[static_cast<std::size_t>(j)] -= delta;
        } else {
          minv[static_cast<std::size_t>(j)] -= delta;
        }
      }
      j0 = j1;
    } while (match[static_cast<std::size_t>(j0)] != 0);
    do {
      const int j1 = way[static_cast<std::size_t>(j0)];
      match[static_cast<std::size_t>(j0)] = match[static_cast<std::size_t>(j1)];
      j0 = j1;
    } while (j0 != 0);
  }

  std::vector<int> row_to_col(static_cast<std::size_t>(n), -1);
  for (int j = 1; j <= n; ++j)
    row_to_col[static_cast<std::size_t>(match[static_cast<std::size_t>(j)]) -
               1] = j - 1;
  return row_to_col;
}

std::string to_json(const ScoreReport& report) {
  nlohmann::ordered_json doc;
  doc["total_speech"] = report.total_speech;
  doc["correct"] = report.correct;
  doc["recall_pct"] = report.recall_pct;
  doc["error_pct"] = report.error_pct;
  doc["missed_speech"] = report.missed_speech;
  doc["false_alarm"] = report.false_alarm;
  nlohmann::ordered_json mapping = nlohmann::ordered_json::object();
  for (const auto& [cluster, speaker] : report.mapping)
    mapping[std::to_string(cluster)] = speaker;
  doc["mapping"] = std::move(mapping);
  doc["speakers"] = report.speakers;
  nlohmann::ordered_json confusion = nlohmann::ordered_json::array();
  for (Eigen::Index r = 0; r < report.confusion.rows(); ++r) {
    nlohmann::ordered_json row = nlohmann::ordered_json::array();
    for (Eigen::Index c = 0; c < report.confusion.cols(); ++c)
      row.push_back(report.confusion(r, c));
    confusion.push_back(std::move(row));
  }
  doc["confusion"] = std::move(confusion);
  return doc.dump(2);
}

}  // namespace diarcluster
