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

#include "diarcluster/frame_io.hpp"

#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace diarcluster {

namespace {

using nlohmann::json;

// The container is only ever written/read on little-endian hosts here; the
// explicit byte packing keeps the format well-defined regardless.
void put_u32(std::string& out, std::uint32_t v) {
  out.push_back(static_cast<char>(v & 0xff));
  out.push_back(static_cast<char>((v >> 8) & 0xff));
  out.push_back(static_cast<char>((v >> 16) & 0xff));
  out.push_back(static_cast<char>((v >> 24) & 0xff));
}

std::uint32_t get_u32(const unsigned char* p) {
  return static_cast<std::uint32_t>(p[0]) |
         (static_cast<std::uint32_t>(p[1]) << 8) |
         (static_cast<std::uint32_t>(p[2]) << 16) |
         (static_cast<std::uint32_t>(p[3]) << 24);
}

std::string read_file_bytes(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open '" + path + "'");
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

std::string resolve_path(const std::string& base_dir, const std::string& p) {
  std::filesystem::path path(p);
  if (path.is_absolute() || base_dir.empty()) return p;
  return (std::filesystem::path(base_dir) / path).string();
}

}  // namespace

void write_frames(const FrameMatrix& frames, const std::string& path) {
  validate(frames);
  json header;
  header["dim"] = frames.dim();
  header["frame_period"] = frames.frame_period;
  header["n_frames"] = frames.n_frames();
  header["start_time"] = frames.start_time;
  const std::string header_text = header.dump();

  std::string blob;
  blob.reserve(4 + header_text.size() +
               static_cast<std::size_t>(frames.frames.size()) * 4);
  put_u32(blob, static_cast<std::uint32_t>(header_text.size()));
  blob += header_text;
  for (Eigen::Index r = 0; r < frames.n_frames(); ++r) {
    for (Eigen::Index c = 0; c < frames.dim(); ++c) {
      const float value = static_cast<float>(frames.frames(r, c));
      std::uint32_t bits;
      std::memcpy(&bits, &value, 4);
      put_u32(blob, bits);
    }
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open '" + path + "' for writing");
  out.write(blob.data(), static_cast<std::streamsize>(blob.size()));
  if (!out) throw std::runtime_error("short write to '" + path + "'");
}

FrameMatrix read_frames(const std::string& path,
                        const std::string& session_id) {
  const std::string blob = read_file_bytes(path);
  if (blob.size() < 4)
    throw std::runtime_error("'" + path + "': truncated frame container");
  const auto* bytes = reinterpret_cast<const unsigned char*>(blob.data());
  const std::uint32_t header_len = get_u32(bytes);
  if (blob.size() < 4 + static_cast<std::size_t>(header_len))
    throw std::runtime_error("'" + path + "': truncated header");
  json header;
  try {
    header = json::parse(blob.substr(4, header_len));
  } catch (const json::exception& e) {
    throw std::runtime_error("'" + path + "': bad header: " + e.what());
  }
  const auto n_frames = header.at("n_frames").get<Eigen::Index>();
  const auto dim = header.at("dim").get<Eigen::Index>();
  const std::size_t payload = 4 + header_len;
  const std::size_t expected =
      static_cast<std::size_t>(n_frames) * static_cast<std::size_t>(dim) * 4;
  if (blob.size() - payload != expected)
    throw std::runtime_error("'" + path + "': payload size mismatch");

  FrameMatrix frames;
  frames.session_id = session_id;
  frames.frame_period = header.at("frame_period").get<double>();
  frames.start_time = header.at("start_time").get<double>();
  frames.frames.resize(n_frames, dim);
  const unsigned char* p = bytes + payload;
  for (Eigen::Index r = 0; r < n_frames; ++r) {
    for (Eigen::Index c = 0; c < dim; ++c, p += 4) {
      const std::uint32_t bits = get_u32(p);
      float value;
      std::memcpy(&value, &bits, 4);
      frames.frames(r, c) = value;
    }
  }
  validate(frames);
  return frames;
}

FrameMatrix read_frames_csv(const std::string& path,
                            const std::string& session_id,
                            double frame_period, double start_time) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open '" + path + "'");
  std::vector<std::vector<double>> rows;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::vector<double> row;
    std::istringstream cells(line);
    std::string cell;
    while (std::getline(cells, cell, ',')) {
      try {
        row.push_back(std::stod(cell));
      } catch (const std::exception&) {
        throw std::runtime_error("'" + path + "' line " +
                                 std::to_string(line_no) +
                                 ": cannot parse '" + cell + "'");
      }
    }
    if (!rows.empty() && row.size() != rows.front().size())
      throw std::runtime_error("'" + path + "' line " +
                               std::to_string(line_no) +
                               ": inconsistent column count");
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw std::runtime_error("'" + path + "': no frames");
  FrameMatrix frames;
  frames.session_id = session_id;
  frames.frame_period = frame_period;
  frames.start_time = start_time;
  frames.frames.resize(static_cast<Eigen::Index>(rows.size()),
                       static_cast<Eigen::Index>(rows.front().size()));
  for (std::size_t r = 0; r < rows.size(); ++r)
    for (std::size_t c = 0; c < rows[r].size(); ++c)
      frames.frames(static_cast<Eigen::Index>(r),
                    static_cast<Eigen::Index>(c)) =
          static_cast<float>(rows[r][c]);
  validate(frames);
  return frames;
}

std::vector<SessionSpec> read_manifest(const std::string& path) {
  json doc;
  try {
    doc = json::parse(read_file_bytes(path));
  } catch (const json::exception& e) {
    throw std::runtime_error("'" + path + "': bad manifest: " + e.what());
  }
  const std::string base_dir =
      std::filesystem::path(path).parent_path().string();
  std::vector<SessionSpec> sessions;
  for (const json& entry : doc.at("sessions")) {
    SessionSpec spec;
    spec.session_id = entry.at("session_id").get<std::string>();
    spec.frames_path =
        resolve_path(base_dir, entry.at("frames_path").get<std::string>());
    spec.rttm_path =
        resolve_path(base_dir, entry.at("rttm_path").get<std::string>());
    spec.num_speakers = entry.at("num_speakers").get<int>();
    spec.frame_period = entry.value("frame_period", 0.01);
    spec.start_time = entry.value("start_time", 0.0);
    sessions.push_back(std::move(spec));
  }
  if (sessions.empty())
    throw std::runtime_error("'" + path + "': manifest lists no sessions");
  return sessions;
}

void write_manifest(const std::vector<SessionSpec>& sessions,
                    const std::string& path) {
  json doc;
  doc["sessions"] = json::array();
  for (const SessionSpec& spec : sessions) {
    json entry;
    entry["session_id"] = spec.session_id;
    entry["frames_path"] = spec.frames_path;
    entry["rttm_path"] = spec.rttm_path;
    entry["num_speakers"] = spec.num_speakers;
    doc["sessions"].push_back(std::move(entry));
  }
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open '" + path + "' for writing");
  out << doc.dump(2) << '\n';
}

FrameMatrix load_session_frames(const SessionSpec& spec) {
  if (spec.frames_path.size() > 4 &&
      spec.frames_path.substr(spec.frames_path.size() - 4) == ".csv")
    return read_frames_csv(spec.frames_path, spec.session_id,
                           spec.frame_period, spec.start_time);
  return read_frames(spec.frames_path, spec.session_id);
}

SpeakerProfiles read_profiles(const std::string& path) {
  json doc;
  try {
    doc = json::parse(read_file_bytes(path));
  } catch (const json::exception& e) {
    throw std::runtime_error("'" + path + "': bad profiles: " + e.what());
  }
  SpeakerProfiles profiles;
  profiles.labels = doc.at("labels").get<std::vector<std::string>>();
  const json& rows = doc.at("vectors");
  if (rows.empty()) throw std::runtime_error("'" + path + "': no profiles");
  profiles.vectors.resize(static_cast<Eigen::Index>(rows.size()),
                          static_cast<Eigen::Index>(rows[0].size()));
  for (std::size_t r = 0; r < rows.size(); ++r) {
    const auto row = rows[r].get<std::vector<double>>();
    if (row.size() != static_cast<std::size_t>(profiles.vectors.cols()))
      throw std::runtime_error("'" + path + "': ragged profile vectors");
    for (std::size_t c = 0; c < row.size(); ++c)
      profiles.vectors(static_cast<Eigen::Index>(r),
                       static_cast<Eigen::Index>(c)) = row[c];
  }
  validate(profiles);
  return profiles;
}

void write_profiles(const SpeakerProfiles& profiles,
                    const std::string& path) {
  validate(profiles);
  json doc;
  doc["labels"] = profiles.labels;
  doc["vectors"] = json::array();
  for (Eigen::Index r = 0; r < profiles.vectors.rows(); ++r) {
    json row = json::array();
    for (Eigen::Index c = 0; c < profiles.vectors.cols(); ++c)
      row.push_back(profiles.vectors(r, c));
    doc["vectors"].push_back(std::move(row));
  }
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open '" + path + "' for writing");
  out << doc.dump(2) << '\n';
}

}  // namespace diarcluster
