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

#include "diarcluster/synthgen.hpp"

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "diarcluster/rng.hpp"

namespace diarcluster {

namespace {

constexpr double kPi = 3.14159265358979323846;
constexpr int kDriftComponents = 3;

void validate_config(const SynthConfig& c) {
  if (c.n_speakers < 1) {
    throw std::invalid_argument("synth: n_speakers must be >= 1, got " +
                                std::to_string(c.n_speakers));
  }
  if (c.dim < 1) {
    throw std::invalid_argument("synth: dim must be >= 1, got " +
                                std::to_string(c.dim));
  }
  if (c.n_speakers > c.dim) {
    throw std::invalid_argument(
        "synth: cannot place " + std::to_string(c.n_speakers) +
        " equidistant speaker means in " + std::to_string(c.dim) +
        " dimensions");
  }
  if (!(c.speaker_separation >= 0.0) || !std::isfinite(c.speaker_separation)) {
    throw std::invalid_argument("synth: speaker_separation must be >= 0");
  }
  if (!(c.frame_noise_std >= 0.0) || !std::isfinite(c.frame_noise_std)) {
    throw std::invalid_argument("synth: frame_noise_std must be >= 0");
  }
  if (!(c.outlier_rate >= 0.0 && c.outlier_rate < 1.0)) {
    throw std::invalid_argument("synth: outlier_rate must be in [0, 1)");
  }
  if (!(c.outlier_scale >= 0.0) || !std::isfinite(c.outlier_scale)) {
    throw std::invalid_argument("synth: outlier_scale must be >= 0");
  }
  if (!(c.duration.min > 0.0) || !(c.duration.max >= c.duration.min)) {
    throw std::invalid_argument(
        "synth: need 0 < duration.min <= duration.max");
  }
  if (!(c.duration.shape > 0.0)) {
    throw std::invalid_argument("synth: duration.shape must be > 0");
  }
  if (c.n_segments < 1) {
    throw std::invalid_argument("synth: n_segments must be >= 1");
  }
  if (!(c.markov_p_stay >= 0.0 && c.markov_p_stay <= 1.0)) {
    throw std::invalid_argument("synth: markov_p_stay must be in [0, 1]");
  }
  if (!(c.frame_period > 0.0)) {
    throw std::invalid_argument("synth: frame_period must be > 0");
  }
}

Eigen::VectorXd random_unit(Rng& rng, int dim) {
  Eigen::VectorXd v(dim);
  for (int i = 0; i < dim; ++i) v[i] = rng.gaussian();
  const double norm = v.norm();
  if (norm < 1e-12) {
    v.setZero();
    v[0] = 1.0;
    return v;
  }
  return v / norm;
}

}  // namespace

SynthSession generate_session(const SynthConfig& config) {
  validate_config(config);
  const int k = config.n_speakers;
  const int d = config.dim;
  const int n_segments = config.n_segments;
  const double sigma_ref =
      config.frame_noise_std > 0.0 ? config.frame_noise_std : 1.0;

  // Means at scale * e_i are pairwise scale*sqrt(2) apart, so this yields the
  // requested separation (in sigma_ref multiples) between every pair.
  const double scale =
      config.speaker_separation * sigma_ref / std::sqrt(2.0);
  Eigen::MatrixXd means = Eigen::MatrixXd::Zero(k, d);
  for (int s = 0; s < k; ++s) means(s, s) = scale;

  Rng rng(config.seed);

  // Pass 1: speaker turns, then quantized durations, then frames.  The fixed
  // draw order makes the whole session a pure function of the config.
  std::vector<int> speaker(static_cast<std::size_t>(n_segments), 0);
  if (config.turn_process == TurnKind::round_robin) {
    for (int i = 0; i < n_segments; ++i) speaker[i] = i % k;
  } else {
    int prev = static_cast<int>(rng.uniform_int(k));
    speaker[0] = prev;
    for (int i = 1; i < n_segments; ++i) {
      if (k > 1 && rng.uniform() >= config.markov_p_stay) {
        const int j = static_cast<int>(rng.uniform_int(k - 1));
        prev = j >= prev ? j + 1 : j;
      }
      speaker[i] = prev;
    }
  }

  // Durations on a 10 ms grid: boundaries accumulate as exact centisecond
  // counts, so written and re-read segment times agree to the last digit.
  std::vector<long long> start_cs(static_cast<std::size_t>(n_segments) + 1, 0);
  for (int i = 0; i < n_segments; ++i) {
    const double u = rng.uniform();
    const double dur = config.duration.min +
                       (config.duration.max - config.duration.min) *
                           std::pow(u, config.duration.shape);
    const long long cs = std::max(1LL, std::llround(dur * 100.0));
    start_cs[i + 1] = start_cs[i] + cs;
  }
  const double total_duration = static_cast<double>(start_cs[n_segments]) / 100.0;
  const Eigen::Index n_frames = static_cast<Eigen::Index>(
      std::llround(total_duration / config.frame_period));

  SegmentTable table;
  table.session_id = config.session_id;
  table.segments.reserve(static_cast<std::size_t>(n_segments));
  for (int i = 0; i < n_segments; ++i) {
    Segment seg;
    seg.start = static_cast<double>(start_cs[i]) / 100.0;
    seg.end = static_cast<double>(start_cs[i + 1]) / 100.0;
    seg.ref_speaker = "spk" + std::to_string(speaker[i]);
    table.segments.push_back(std::move(seg));
  }

  FrameMatrix frames;
  frames.session_id = config.session_id;
  frames.frame_period = config.frame_period;
  frames.start_time = 0.0;
  frames.frames.resize(n_frames, d);

  const double drift_amp = 0.3 * config.frame_noise_std /
                           std::sqrt(static_cast<double>(kDriftComponents));
  Eigen::VectorXd row(d);
  for (int i = 0; i < n_segments; ++i) {
    // Fresh low-frequency drift character per turn: a few sinusoids along
    // random unit directions, amplitude tied to the frame noise level.
    Eigen::MatrixXd drift_dir(kDriftComponents, d);
    double freq[kDriftComponents];
    double phase[kDriftComponents];
    for (int h = 0; h < kDriftComponents; ++h) {
      drift_dir.row(h) = random_unit(rng, d).transpose();
      freq[h] = 0.2 + rng.uniform();
      phase[h] = 2.0 * kPi * rng.uniform();
    }

    const Eigen::Index first = static_cast<Eigen::Index>(
        std::llround(static_cast<double>(start_cs[i]) / 100.0 /
                     config.frame_period));
    const Eigen::Index last =
        i + 1 == n_segments
            ? n_frames
            : static_cast<Eigen::Index>(
                  std::llround(static_cast<double>(start_cs[i + 1]) / 100.0 /
                               config.frame_period));
    for (Eigen::Index f = first; f < last; ++f) {
      const double t =
          (static_cast<double>(f - first) + 0.5) * config.frame_period;
      row = means.row(speaker[i]).transpose();
      for (int h = 0; h < kDriftComponents; ++h) {
        row += drift_amp * std::sin(2.0 * kPi * freq[h] * t + phase[h]) *
               drift_dir.row(h).transpose();
      }
      for (int c = 0; c < d; ++c) {
        row[c] += config.frame_noise_std * rng.gaussian();
      }
      if (rng.uniform() < config.outlier_rate) {
        row += config.outlier_scale * sigma_ref * random_unit(rng, d);
      }
      frames.frames.row(f) = row.transpose();
    }
  }

  SynthSession session;
  session.config = config;
  session.frames = std::move(frames);
  session.segments = std::move(table);
  session.profiles.labels.reserve(static_cast<std::size_t>(k));
  for (int s = 0; s < k; ++s) {
    session.profiles.labels.push_back("spk" + std::to_string(s));
  }
  session.profiles.vectors = means;

  validate(session.frames);
  validate(session.segments);
  validate(session.profiles);
  return session;
}

SynthConfig suite_base_config(const std::string& name) {
  SynthConfig c;
  if (name == "easy") {
    c.n_speakers = 4;
    c.speaker_separation = 20.0;
    c.frame_noise_std = 1.0;
    c.n_segments = 200;
    c.duration = DurationDist{0.5, 4.0, 1.0};
    c.turn_process = TurnKind::round_robin;
  } else if (name == "noisy") {
    // Low-dimensional short-turn regime where heavy outlier frames dominate
    // plain mean aggregation but not the median.
    c.n_speakers = 4;
    c.dim = 32;
    c.speaker_separation = 15.0;
    c.frame_noise_std = 1.0;
    c.outlier_rate = 0.2;
    c.outlier_scale = 50.0;
    c.n_segments = 150;
    c.duration = DurationDist{0.2, 0.6, 1.0};
    c.turn_process = TurnKind::round_robin;
  } else if (name == "short_segments") {
    // Mostly sub-second turns at tight separation: embeddings from the
    // short tail are noisy enough to spoil a fit that includes them.
    c.n_speakers = 4;
    c.dim = 50;
    c.speaker_separation = 4.5;
    c.frame_noise_std = 1.0;
    c.n_segments = 200;
    c.duration = DurationDist{0.3, 3.0, 4.0};
    c.turn_process = TurnKind::round_robin;
  } else if (name == "many_speakers") {
    c.n_speakers = 6;  // sessions alternate 6 and 8
    c.speaker_separation = 12.0;
    c.frame_noise_std = 1.0;
    c.n_segments = 240;
    c.duration = DurationDist{0.5, 2.0, 1.0};
    c.turn_process = TurnKind::markov;
    c.markov_p_stay = 0.6;
  } else {
    throw std::invalid_argument(
        "unknown suite '" + name +
        "' (expected easy, noisy, short_segments or many_speakers)");
  }
  return c;
}

std::vector<SynthSession> generate_suite(const std::string& name,
                                         std::uint64_t seed) {
  const SynthConfig base = suite_base_config(name);
  int n_sessions = 5;
  if (name == "many_speakers") n_sessions = 4;

  std::vector<SynthSession> sessions;
  sessions.reserve(static_cast<std::size_t>(n_sessions));
  for (int i = 0; i < n_sessions; ++i) {
    SynthConfig c = base;
    c.session_id = name + "-s" + std::to_string(i);
    c.seed = derive_seed(seed, static_cast<std::uint64_t>(i));
    if (name == "many_speakers") c.n_speakers = i % 2 == 0 ? 6 : 8;
    sessions.push_back(generate_session(c));
  }
  return sessions;
}

}  // namespace diarcluster
