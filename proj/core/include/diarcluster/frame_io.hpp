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

#ifndef DIARCLUSTER_FRAME_IO_HPP
#define DIARCLUSTER_FRAME_IO_HPP

#include <string>
#include <vector>

#include "diarcluster/types.hpp"

namespace diarcluster {

// On-disk frame container: a little-endian uint32 header length, a JSON
// header {dim, frame_period, n_frames, start_time}, then row-major
// little-endian float32 coefficients. Coefficients are stored at float32
// precision; read->write->read is lossless.
void write_frames(const FrameMatrix& frames, const std::string& path);
FrameMatrix read_frames(const std::string& path,
                        const std::string& session_id);

// CSV interoperability path: one frame per row, comma-separated
// coefficients. Timing metadata is not part of the CSV and must be supplied.
FrameMatrix read_frames_csv(const std::string& path,
                            const std::string& session_id,
                            double frame_period, double start_time = 0.0);

// One session of a manifest. frames_path/rttm_path are resolved relative to
// the manifest file's directory when not absolute. frame_period/start_time
// apply only to CSV frame files (the binary container carries its own).
struct SessionSpec {
  std::string session_id;
  std::string frames_path;
  std::string rttm_path;
  int num_speakers = 0;
  double frame_period = 0.01;
  double start_time = 0.0;
};

std::vector<SessionSpec> read_manifest(const std::string& path);
void write_manifest(const std::vector<SessionSpec>& sessions,
                    const std::string& path);

FrameMatrix load_session_frames(const SessionSpec& spec);

// Speaker-profile JSON files: {"labels": [...], "vectors": [[...], ...]}.
SpeakerProfiles read_profiles(const std::string& path);
void write_profiles(const SpeakerProfiles& profiles, const std::string& path);

}  // namespace diarcluster

#endif  // DIARCLUSTER_FRAME_IO_HPP
