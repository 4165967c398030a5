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

#ifndef DIARCLUSTER_RTTM_HPP
#define DIARCLUSTER_RTTM_HPP

#include <iosfwd>
#include <string>
#include <vector>

#include "diarcluster/types.hpp"

namespace diarcluster {

// Parses RTTM SPEAKER lines:
//   SPEAKER <file> <chan> <tbeg> <tdur> <NA> <NA> <spkr> <NA> [<NA>]
// The confidence field is optional on read. Segments are returned sorted by
// start time; overlapping segments are a validation error (tables are oracle
// segmentations).
SegmentTable read_rttm(std::istream& in);
SegmentTable read_rttm_file(const std::string& path);

// One SPEAKER line per segment, tbeg/tdur formatted with exactly two decimal
// places ("%.2f", so ties on the binary value round to even). The confidence
// field is emitted as <NA>. Round-trips bit-exactly at 2-decimal precision.
void write_rttm(const SegmentTable& table,
                const std::vector<std::string>& labels, std::ostream& out);
void write_rttm_file(const SegmentTable& table,
                     const std::vector<std::string>& labels,
                     const std::string& path);

// Writes the table's own reference labels (missing labels become "<NA>").
std::string rttm_to_string(const SegmentTable& table);

// Absorbs inter-segment silences shorter than `collar`: same-speaker gaps
// merge the two segments into one, different-speaker gaps are split at the
// midpoint. Segments without a reference label never merge. Idempotent.
SegmentTable merge_short_silences(const SegmentTable& table,
                                  double collar = 0.25);

}  // namespace diarcluster

#endif  // DIARCLUSTER_RTTM_HPP
