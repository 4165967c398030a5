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

#include "diarcluster/smoothing.hpp"

#include <algorithm>
#include <stdexcept>
#include <string>

namespace diarcluster {

FilterKernel build_filter(int order) {
  if (order < 0)
    throw std::invalid_argument("filter order must be >= 0, got " +
                                std::to_string(order));
  FilterKernel kernel;
  kernel.order = order;
  kernel.taps = {0.5, 0.5};
  for (int j = 0; j < order; ++j) {
    // Convolve the current kernel with [1/2, 1/2]: each new tap is the
    // average of the two neighbouring old taps (zero beyond the ends).
    std::vector<double> next(kernel.taps.size() + 1, 0.0);
    for (std::size_t m = 0; m < next.size(); ++m) {
      double acc = 0.0;
      if (m < kernel.taps.size()) acc += kernel.taps[m];
      if (m >= 1) acc += kernel.taps[m - 1];
      next[m] = 0.5 * acc;
    }
    kernel.taps = std::move(next);
  }
  return kernel;
}

FrameMatrix smooth_frames(const FrameMatrix& frames,
                          const FilterKernel& kernel) {
  validate(frames);
  if (kernel.taps.empty())
    throw std::invalid_argument("filter kernel has no taps");
  const Eigen::Index n = frames.n_frames();
  const int length = kernel.length();
  const int center = kernel.center();

  FrameMatrix out = frames;
  for (Eigen::Index t = 0; t < n; ++t) {
    Eigen::RowVectorXd acc = Eigen::RowVectorXd::Zero(frames.dim());
    for (int m = 0; m < length; ++m) {
      Eigen::Index src = t - center + m;
      src = std::clamp<Eigen::Index>(src, 0, n - 1);
      acc += kernel.taps[static_cast<std::size_t>(m)] * frames.frames.row(src);
    }
    out.frames.row(t) = acc;
  }
  return out;
}

}  // namespace diarcluster
