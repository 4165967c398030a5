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

#ifndef DIARCLUSTER_SYNTHGEN_HPP_
#define DIARCLUSTER_SYNTHGEN_HPP_

#include <cstdint>
#include <string>
#include <vector>

#include "diarcluster/types.hpp"

namespace diarcluster {

// Segment durations are drawn as min + (max - min) * u^shape with
// u ~ U(0, 1), quantized to centiseconds; shape > 1 skews the mass toward
// short segments.
struct DurationDist {
  double min = 0.5;
  double max = 4.0;
  double shape = 1.0;
};

enum class TurnKind { round_robin, markov };

struct SynthConfig {
  std::string session_id = "synth";
  int n_speakers = 4;
  int dim = 200;
  // Pairwise distance between speaker means, in multiples of
  // frame_noise_std (of absolute units when the noise is zero).
  double speaker_separation = 20.0;
  double frame_noise_std = 1.0;
  double outlier_rate = 0.0;   // per-frame spike probability, in [0, 1)
  double outlier_scale = 0.0;  // spike magnitude in multiples of the noise
  DurationDist duration;
  int n_segments = 200;
  TurnKind turn_process = TurnKind::round_robin;
  double markov_p_stay = 0.7;  // used by the markov turn process
  double frame_period = 0.01;
  std::uint64_t seed = 0;
};

struct SynthSession {
  SynthConfig config;  // the fully resolved per-session configuration
  FrameMatrix frames;
  SegmentTable segments;     // reference labels spk0..spk{k-1}
  SpeakerProfiles profiles;  // the true speaker means
};

// Deterministic synthetic session: speaker means at the configured pairwise
// distance (requires n_speakers <= dim), frames = mean + low-frequency
// sinusoidal drift + white noise + sporadic fixed-magnitude spikes in random
// directions.  Segments abut with no silences.  Identical config (seed
// included) reproduces identical bytes.
SynthSession generate_session(const SynthConfig& config);

// Named, versioned presets: "easy" (5 sessions, k=4, weak noise),
// "noisy" (heavy outliers: rate 0.2, scale 50), "short_segments"
// (duration shape 4, most segments under 1 s), "many_speakers"
// (k alternating 6 and 8).  Per-session seeds are derived from `seed`.
std::vector<SynthSession> generate_suite(const std::string& name,
                                         std::uint64_t seed);

// The base configuration each suite applies to its sessions, exposed so
// experiments can vary single parameters (for example the speaker count)
// while staying inside a suite's regime.
SynthConfig suite_base_config(const std::string& name);

}  // namespace diarcluster

#endif  // DIARCLUSTER_SYNTHGEN_HPP_
