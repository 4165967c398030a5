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

#ifndef DIARCLUSTER_SMOOTHING_HPP_
#define DIARCLUSTER_SMOOTHING_HPP_

#include <vector>

#include "diarcluster/types.hpp"

namespace diarcluster {

// Low-pass FIR kernel obtained by repeatedly convolving the two-tap
// averaging filter [1/2, 1/2] with itself.  `order` counts the number of
// self-convolutions, so order 0 is the two-tap averager itself and order N
// has N + 2 taps with coefficients C(N+1, m) / 2^(N+1).
struct FilterKernel {
  int order = 0;
  std::vector<double> taps;

  int length() const { return static_cast<int>(taps.size()); }
  // Alignment offset for same-length filtering: output sample t is the
  // kernel applied to inputs [t - center, t - center + length - 1].
  int center() const { return (length() - 1) / 2; }
};

// Builds the binomial kernel of the given order (>= 0).
FilterKernel build_filter(int order);

// Applies the kernel along time (rows) to every embedding dimension
// independently.  Output has the same shape as the input; samples beyond
// either edge are taken as copies of the nearest real frame.
FrameMatrix smooth_frames(const FrameMatrix& frames,
                          const FilterKernel& kernel);

inline FrameMatrix smooth_frames(const FrameMatrix& frames, int order) {
  return smooth_frames(frames, build_filter(order));
}

}  // namespace diarcluster

#endif  // DIARCLUSTER_SMOOTHING_HPP_
