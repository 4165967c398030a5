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

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <unistd.h>

#include "diarcluster/frame_io.hpp"
#include "diarcluster/rng.hpp"
#include "diarcluster/rttm.hpp"
#include "diarcluster/types.hpp"

using namespace diarcluster;

namespace {

std::filesystem::path temp_dir(const std::string& tag) {
  const auto dir = std::filesystem::temp_directory_path() /
                   ("diarcluster_core_" + tag + "_" + std::to_string(getpid()));
  std::filesystem::create_directories(dir);
  return dir;
}

SegmentTable make_table(std::vector<Segment> segments) {
  SegmentTable table;
  table.session_id = "t";
  table.segments = std::move(segments);
  return table;
}

}  // namespace

// ---------------------------------------------------------------------------
// Domain type validation

TEST_CASE("frame matrix validation rejects degenerate shapes and values") {
  FrameMatrix ok;
  ok.session_id = "s";
  ok.frames = Eigen::MatrixXd::Zero(3, 2);
  CHECK_NOTHROW(validate(ok));

  FrameMatrix empty = ok;
  empty.frames.resize(0, 2);
  CHECK_THROWS_AS(validate(empty), std::invalid_argument);

  FrameMatrix bad_period = ok;
  bad_period.frame_period = 0.0;
  CHECK_THROWS_AS(validate(bad_period), std::invalid_argument);

  FrameMatrix non_finite = ok;
  non_finite.frames(1, 1) = std::numeric_limits<double>::quiet_NaN();
  CHECK_THROWS_AS(validate(non_finite), std::invalid_argument);
}

TEST_CASE("segment tables must be sorted and non-overlapping") {
  CHECK_NOTHROW(validate(make_table({{0.0, 1.0, "a"}, {1.0, 2.0, "b"}})));
  CHECK_THROWS_AS(validate(make_table({{0.0, 1.5, "a"}, {1.0, 2.0, "b"}})),
                  std::invalid_argument);
  CHECK_THROWS_AS(validate(make_table({{1.0, 2.0, "a"}, {0.0, 0.5, "b"}})),
                  std::invalid_argument);
  CHECK_THROWS_AS(validate(make_table({{1.0, 1.0, "a"}})),
                  std::invalid_argument);
}

TEST_CASE("cluster model validation checks assignment range") {
  ClusterModel model;
  model.k = 2;
  model.centroids = Eigen::MatrixXd::Zero(2, 3);
  model.assignments = {0, 1, 1};
  CHECK_NOTHROW(validate(model));
  model.assignments = {0, 2, 1};
  CHECK_THROWS_AS(validate(model), std::invalid_argument);
}

// ---------------------------------------------------------------------------
// Frame spans

TEST_CASE("frame spans use floor/ceil boundaries clamped to the matrix") {
  // A binary-exact frame period keeps the division artifacts out of the
  // boundary checks.
  FrameMatrix frames;
  frames.session_id = "s";
  frames.frames = Eigen::MatrixXd::Zero(100, 1);
  frames.frame_period = 0.25;

  SUBCASE("exact grid alignment") {
    const FrameSpan span = frame_span(frames, {0.0, 1.25, {}});
    CHECK(span.first == 0);
    CHECK(span.last == 4);
    CHECK(span.count() == 5);
  }
  SUBCASE("interior fractional boundaries") {
    const FrameSpan span = frame_span(frames, {0.3, 0.7, {}});
    CHECK(span.first == 1);
    CHECK(span.last == 2);
  }
  SUBCASE("clamped to the end of the session") {
    const FrameSpan span = frame_span(frames, {24.0, 30.0, {}});
    CHECK(span.first == 96);
    CHECK(span.last == 99);
  }
  SUBCASE("a nonzero session start shifts the indexing") {
    FrameMatrix shifted = frames;
    shifted.start_time = 1.0;
    const FrameSpan span = frame_span(shifted, {1.0, 1.5, {}});
    CHECK(span.first == 0);
    CHECK(span.last == 1);
  }
  SUBCASE("a segment before the first frame covers nothing") {
    FrameMatrix shifted = frames;
    shifted.start_time = 10.0;
    CHECK_THROWS_AS(frame_span(shifted, {0.0, 0.5, {}}),
                    std::invalid_argument);
  }
}

// ---------------------------------------------------------------------------
// RTTM I/O

TEST_CASE("a single SPEAKER line maps onto one segment") {
  std::istringstream in("SPEAKER m1 1 0.00 2.50 <NA> <NA> spkA <NA>\n");
  const SegmentTable table = read_rttm(in);
  REQUIRE(table.segments.size() == 1);
  CHECK(table.segments[0].start == doctest::Approx(0.0));
  CHECK(table.segments[0].end == doctest::Approx(2.5));
  CHECK(table.segments[0].ref_speaker == "spkA");
  CHECK(table.session_id == "m1");
}

TEST_CASE("two speaker lines come back as a sorted two-segment table") {
  std::istringstream in(
      "SPEAKER m1 1 0.00 2.00 <NA> <NA> spkA <NA>\n"
      "SPEAKER m1 1 2.00 3.00 <NA> <NA> spkB <NA>\n");
  const SegmentTable table = read_rttm(in);
  REQUIRE(table.segments.size() == 2);
  CHECK(table.segments[0].ref_speaker == "spkA");
  CHECK(table.segments[1].ref_speaker == "spkB");
  CHECK(table.segments[1].start == doctest::Approx(2.0));
  CHECK(table.segments[1].end == doctest::Approx(5.0));
}

TEST_CASE("lines out of order in the file still produce a sorted table") {
  std::istringstream in(
      "SPEAKER m1 1 2.00 3.00 <NA> <NA> spkB <NA>\n"
      "SPEAKER m1 1 0.00 2.00 <NA> <NA> spkA <NA>\n");
  const SegmentTable table = read_rttm(in);
  REQUIRE(table.segments.size() == 2);
  CHECK(table.segments[0].start < table.segments[1].start);
  CHECK(table.segments[0].ref_speaker == "spkA");
}

TEST_CASE("the optional trailing confidence field is accepted") {
  std::istringstream in("SPEAKER m1 1 0.00 2.50 <NA> <NA> spkA <NA> <NA>\n");
  CHECK(read_rttm(in).segments.size() == 1);
}

TEST_CASE("malformed lines are rejected with their line number") {
  std::istringstream in(
      "SPEAKER m1 1 0.00 2.00 <NA> <NA> spkA <NA>\n"
      "SPEAKER m1 1 nonsense\n");
  CHECK_THROWS_WITH_AS(read_rttm(in),
                       doctest::Contains("line 2"), std::runtime_error);
}

TEST_CASE("overlapping reference segments are a validation error") {
  std::istringstream in(
      "SPEAKER m1 1 0.00 2.00 <NA> <NA> spkA <NA>\n"
      "SPEAKER m1 1 1.50 2.00 <NA> <NA> spkB <NA>\n");
  CHECK_THROWS(read_rttm(in));
}

TEST_CASE("write then read reproduces the table at 2-decimal precision") {
  const SegmentTable table =
      make_table({{0.0, 2.0, "spkA"}, {2.0, 5.0, "spkB"}});
  std::ostringstream out;
  write_rttm(table, {"spkA", "spkB"}, out);
  std::istringstream in(out.str());
  const SegmentTable round = read_rttm(in);
  REQUIRE(round.segments.size() == table.segments.size());
  for (std::size_t i = 0; i < table.segments.size(); ++i) {
    CHECK(round.segments[i].start ==
          doctest::Approx(table.segments[i].start).epsilon(1e-12));
    CHECK(round.segments[i].end ==
          doctest::Approx(table.segments[i].end).epsilon(1e-12));
    CHECK(round.segments[i].ref_speaker == table.segments[i].ref_speaker);
  }
}

TEST_CASE("rttm round-trip identity holds for generated tables") {
  Rng rng(42);
  for (int trial = 0; trial < 25; ++trial) {
    std::vector<Segment> segments;
    std::vector<std::string> labels;
    double t = 0.0;
    for (int i = 0; i < 20; ++i) {
      // Work on the centisecond grid so 2-decimal formatting is lossless.
      t += 0.01 * static_cast<double>(rng.uniform_int(50));
      const double dur = 0.01 * static_cast<double>(1 + rng.uniform_int(300));
      const std::string label = "spk" + std::to_string(rng.uniform_int(4));
      segments.push_back({t, t + dur, label});
      labels.push_back(label);
      t += dur;
    }
    const SegmentTable table = make_table(std::move(segments));
    std::ostringstream out;
    write_rttm(table, labels, out);
    std::istringstream in(out.str());
    const SegmentTable round = read_rttm(in);
    REQUIRE(round.segments.size() == table.segments.size());
    std::ostringstream out2;
    write_rttm(round, labels, out2);
    CHECK(out.str() == out2.str());
  }
}

TEST_CASE("an empty table writes no lines") {
  std::ostringstream out;
  write_rttm(make_table({}), {}, out);
  CHECK(out.str().empty());
}

TEST_CASE("label list length must match the segment count") {
  const SegmentTable table = make_table({{0.0, 1.0, "a"}});
  std::ostringstream out;
  CHECK_THROWS_AS(write_rttm(table, {"x", "y"}, out), std::invalid_argument);
}

TEST_CASE("a duration of 1.005 renders as 1.00 and stays stable") {
  // The binary double closest to 1.005 lies just below it, so fixed
  // two-decimal formatting rounds down.  The exact string matters only in
  // that it must never change between runs or builds.
  const SegmentTable table = make_table({{0.0, 1.005, "a"}});
  std::ostringstream out;
  write_rttm(table, {"a"}, out);
  CHECK(out.str().find(" 0.00 1.00 ") != std::string::npos);
}

TEST_CASE("rttm_to_string emits reference labels with <NA> fallback") {
  SegmentTable table = make_table({{0.0, 1.0, "a"}, {1.0, 2.0, {}}});
  const std::string text = rttm_to_string(table);
  CHECK(text.find(" a ") != std::string::npos);
  CHECK(text.find("<NA>") != std::string::npos);
}

// ---------------------------------------------------------------------------
// Silence merging

TEST_CASE("sub-collar same-speaker gaps merge into one segment") {
  const SegmentTable table =
      make_table({{0.0, 1.0, "spkA"}, {1.1, 2.0, "spkA"}});
  const SegmentTable merged = merge_short_silences(table, 0.25);
  REQUIRE(merged.segments.size() == 1);
  CHECK(merged.segments[0].start == doctest::Approx(0.0));
  CHECK(merged.segments[0].end == doctest::Approx(2.0));
  CHECK(merged.segments[0].ref_speaker == "spkA");
}

TEST_CASE("gaps at or above the collar are left alone") {
  const SegmentTable table =
      make_table({{0.0, 1.0, "spkA"}, {1.5, 2.0, "spkA"}});
  const SegmentTable merged = merge_short_silences(table, 0.25);
  CHECK(merged.segments.size() == 2);
}

TEST_CASE("sub-collar different-speaker gaps split at the midpoint") {
  const SegmentTable table =
      make_table({{0.0, 1.0, "spkA"}, {1.1, 2.0, "spkB"}});
  const SegmentTable merged = merge_short_silences(table, 0.25);
  REQUIRE(merged.segments.size() == 2);
  CHECK(merged.segments[0].end == doctest::Approx(1.05));
  CHECK(merged.segments[1].start == doctest::Approx(1.05));
}

TEST_CASE("silence merging is idempotent on randomized tables") {
  Rng rng(7);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<Segment> segments;
    double t = 0.0;
    for (int i = 0; i < 30; ++i) {
      t += rng.uniform(0.0, 0.5);
      const double dur = rng.uniform(0.2, 2.0);
      segments.push_back(
          {t, t + dur, "spk" + std::to_string(rng.uniform_int(3))});
      t += dur;
    }
    const SegmentTable once =
        merge_short_silences(make_table(std::move(segments)), 0.25);
    const SegmentTable twice = merge_short_silences(once, 0.25);
    REQUIRE(once.segments.size() == twice.segments.size());
    for (std::size_t i = 0; i < once.segments.size(); ++i) {
      CHECK(once.segments[i].start ==
            doctest::Approx(twice.segments[i].start).epsilon(1e-12));
      CHECK(once.segments[i].end ==
            doctest::Approx(twice.segments[i].end).epsilon(1e-12));
    }
    CHECK_NOTHROW(validate(once));
  }
}

TEST_CASE("unlabeled segments never merge") {
  const SegmentTable table = make_table({{0.0, 1.0, {}}, {1.1, 2.0, {}}});
  CHECK(merge_short_silences(table, 0.25).segments.size() == 2);
}

// ---------------------------------------------------------------------------
// Frame container I/O

TEST_CASE("frame binaries round-trip exactly at 32-bit precision") {
  const auto dir = temp_dir("frames");
  FrameMatrix frames;
  frames.session_id = "s1";
  frames.frames.resize(7, 3);
  // Values exactly representable in float so the round-trip is bit-exact.
  for (Eigen::Index r = 0; r < 7; ++r)
    for (Eigen::Index c = 0; c < 3; ++c)
      frames.frames(r, c) = static_cast<double>(r * 3 + c) * 0.25 - 2.0;
  frames.frame_period = 0.02;
  frames.start_time = 1.5;

  const std::string path = (dir / "frames.bin").string();
  write_frames(frames, path);
  const FrameMatrix round = read_frames(path, "s1");
  CHECK(round.frames == frames.frames);
  CHECK(round.frame_period == doctest::Approx(0.02));
  CHECK(round.start_time == doctest::Approx(1.5));
  CHECK(round.session_id == "s1");

  // Same content, same bytes.
  const std::string path2 = (dir / "frames2.bin").string();
  write_frames(frames, path2);
  std::ifstream a(path, std::ios::binary), b(path2, std::ios::binary);
  std::stringstream sa, sb;
  sa << a.rdbuf();
  sb << b.rdbuf();
  CHECK(sa.str() == sb.str());
  std::filesystem::remove_all(dir);
}

TEST_CASE("csv import reads one frame per row") {
  const auto dir = temp_dir("csv");
  const std::string path = (dir / "frames.csv").string();
  std::ofstream(path) << "1.0,2.0\n3.0,4.0\n5.5,-1.25\n";
  const FrameMatrix frames = read_frames_csv(path, "s", 0.01);
  REQUIRE(frames.n_frames() == 3);
  REQUIRE(frames.dim() == 2);
  CHECK(frames.frames(2, 1) == doctest::Approx(-1.25));
  std::filesystem::remove_all(dir);
}

TEST_CASE("manifests round-trip through json") {
  const auto dir = temp_dir("manifest");
  std::vector<SessionSpec> sessions(2);
  sessions[0] = {"a", "a.bin", "a.rttm", 4, 0.01, 0.0};
  sessions[1] = {"b", "b.bin", "b.rttm", 0, 0.02, 1.0};
  const std::string path = (dir / "manifest.json").string();
  write_manifest(sessions, path);
  const std::vector<SessionSpec> round = read_manifest(path);
  REQUIRE(round.size() == 2);
  CHECK(round[0].session_id == "a");
  CHECK(round[0].num_speakers == 4);
  CHECK(round[1].frames_path == "b.bin");
  CHECK(round[1].frame_period == doctest::Approx(0.02));
  CHECK(round[1].start_time == doctest::Approx(1.0));
  std::filesystem::remove_all(dir);
}

TEST_CASE("speaker profiles round-trip through json") {
  const auto dir = temp_dir("profiles");
  SpeakerProfiles profiles;
  profiles.labels = {"x", "y"};
  profiles.vectors.resize(2, 3);
  profiles.vectors << 1.0, -2.5, 0.125, 4.0, 5.0, -6.75;
  const std::string path = (dir / "profiles.json").string();
  write_profiles(profiles, path);
  const SpeakerProfiles round = read_profiles(path);
  CHECK(round.labels == profiles.labels);
  CHECK(round.vectors == profiles.vectors);
  std::filesystem::remove_all(dir);
}

// ---------------------------------------------------------------------------
// Deterministic randomness

TEST_CASE("the rng is reproducible and respects its bounds") {
  Rng a(123), b(123);
  for (int i = 0; i < 1000; ++i) {
    CHECK(a.next_u64() == b.next_u64());
  }
  Rng r(5);
  for (int i = 0; i < 1000; ++i) {
    const double u = r.uniform();
    CHECK(u >= 0.0);
    CHECK(u < 1.0);
    const int n = r.uniform_int(7);
    CHECK(n >= 0);
    CHECK(n < 7);
  }
}

TEST_CASE("gaussian draws have roughly standard moments") {
  Rng r(11);
  const int n = 20000;
  double sum = 0.0, sum2 = 0.0;
  for (int i = 0; i < n; ++i) {
    const double g = r.gaussian();
    sum += g;
    sum2 += g * g;
  }
  const double mean = sum / n;
  const double var = sum2 / n - mean * mean;
  CHECK(std::abs(mean) < 0.05);
  CHECK(var == doctest::Approx(1.0).epsilon(0.05));
}

TEST_CASE("derived seeds separate streams") {
  CHECK(derive_seed(1, 0) != derive_seed(1, 1));
  CHECK(derive_seed(1, 0) != derive_seed(2, 0));
  CHECK(derive_seed(1, 5) == derive_seed(1, 5));
}
