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

#include "diarcluster/rttm.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace diarcluster {

namespace {

[[noreturn]] void parse_fail(int line_no, const std::string& what) {
  throw std::runtime_error("RTTM parse error at line " +
                           std::to_string(line_no) + ": " + what);
}

double parse_seconds(const std::string& token, int line_no,
                     const char* field) {
  std::size_t pos = 0;
  double value = 0.0;
  try {
    value = std::stod(token, &pos);
  } catch (const std::exception&) {
    pos = 0;
  }
  if (pos != token.size())
    parse_fail(line_no, std::string("cannot parse ") + field + " '" + token +
                            "' as seconds");
  return value;
}

std::string format_seconds(double value) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.2f", value);
  return buf;
}

}  // namespace

SegmentTable read_rttm(std::istream& in) {
  SegmentTable table;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::istringstream tokens(line);
    std::vector<std::string> fields;
    std::string token;
    while (tokens >> token) fields.push_back(token);
    if (fields.empty()) continue;
    if (fields[0] != "SPEAKER")
      parse_fail(line_no, "expected SPEAKER record, got '" + fields[0] + "'");
    if (fields.size() < 8 || fields.size() > 10)
      parse_fail(line_no, "expected 8-10 fields, got " +
                              std::to_string(fields.size()));
    if (table.segments.empty()) {
      table.session_id = fields[1];
    } else if (fields[1] != table.session_id) {
      parse_fail(line_no, "mixed session ids '" + table.session_id +
                              "' and '" + fields[1] + "'");
    }
    const double tbeg = parse_seconds(fields[3], line_no, "tbeg");
    const double tdur = parse_seconds(fields[4], line_no, "tdur");
    if (tdur <= 0.0)
      parse_fail(line_no, "non-positive duration " + fields[4]);
    Segment seg;
    seg.start = tbeg;
    seg.end = tbeg + tdur;
    seg.ref_speaker = fields[7];
    table.segments.push_back(std::move(seg));
  }
  std::stable_sort(table.segments.begin(), table.segments.end(),
                   [](const Segment& a, const Segment& b) {
                     return a.start < b.start;
                   });
  validate(table);
  return table;
}

SegmentTable read_rttm_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open RTTM file '" + path + "'");
  try {
    return read_rttm(in);
  } catch (const std::exception& e) {
    throw std::runtime_error(path + ": " + e.what());
  }
}

void write_rttm(const SegmentTable& table,
                const std::vector<std::string>& labels, std::ostream& out) {
  if (labels.size() != table.segments.size())
    throw std::invalid_argument(
        "write_rttm: " + std::to_string(labels.size()) + " labels for " +
        std::to_string(table.segments.size()) + " segments");
  for (std::size_t i = 0; i < table.segments.size(); ++i) {
    const Segment& seg = table.segments[i];
    out << "SPEAKER " << table.session_id << " 1 "
        << format_seconds(seg.start) << ' '
        << format_seconds(seg.duration()) << " <NA> <NA> " << labels[i]
        << " <NA>\n";
  }
}

void write_rttm_file(const SegmentTable& table,
                     const std::vector<std::string>& labels,
                     const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open '" + path + "' for writing");
  write_rttm(table, labels, out);
}

std::string rttm_to_string(const SegmentTable& table) {
  std::vector<std::string> labels;
  labels.reserve(table.segments.size());
  for (const Segment& seg : table.segments)
    labels.push_back(seg.ref_speaker.value_or("<NA>"));
  std::ostringstream os;
  write_rttm(table, labels, os);
  return os.str();
}

SegmentTable merge_short_silences(const SegmentTable& table, double collar) {
  if (collar < 0.0)
    throw std::invalid_argument("merge_short_silences: collar must be >= 0");
  validate(table);
  SegmentTable out;
  out.session_id = table.session_id;
  for (const Segment& next : table.segments) {
    if (out.segments.empty()) {
      out.segments.push_back(next);
      continue;
    }
    Segment& cur = out.segments.back();
    const double gap = next.start - cur.end;
    const bool same_speaker =
        cur.ref_speaker && next.ref_speaker &&
        *cur.ref_speaker == *next.ref_speaker;
    if (gap < collar && same_speaker) {
      cur.end = next.end;
    } else if (gap > 0.0 && gap < collar) {
      Segment widened = next;
      cur.end += gap / 2.0;
      widened.start = cur.end;
      out.segments.push_back(widened);
    } else {
      out.segments.push_back(next);
    }
  }
  validate(out);
  return out;
}

}  // namespace diarcluster
