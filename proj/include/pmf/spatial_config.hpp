/* Copyright 2026 The PMFNet Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/
#ifndef PMF_SPATIAL_CONFIG_HPP_
#define PMF_SPATIAL_CONFIG_HPP_

#include <Eigen/Core>

#include <array>
#include <filesystem>
#include <utility>
#include <vector>

#include "pmf/geometry.hpp"

namespace pmf {

// m x m grid indexed (row, col).
using Grid = Eigen::ArrayXXd;

// Ordered limb list with one rendering intensity per limb. Intensities run
// uniformly from 0.05 (first limb) to 0.95 (last limb).
struct Skeleton {
  std::vector<std::pair<int, int>> edges;
  std::vector<double> intensities;

  // The 19 limbs of the COCO person skeleton, 0-based joint indices.
  static Skeleton coco();
  static std::vector<double> uniform_intensities(std::size_t num_edges);
};

// Channel 0 human mask, channel 1 object mask, channel 2 pose rendering, all
// in the union frame of the pair stretched to m x m.
struct SpatialConfigurationMap {
  int m = 0;
  std::array<Grid, 3> channels;

  // Cell-major flattening: index (row * m + col) * 3 + channel.
  template <typename Scalar>
  Eigen::Matrix<Scalar, 1, Eigen::Dynamic> flatten() const {
    Eigen::Matrix<Scalar, 1, Eigen::Dynamic> out(3 * m * m);
    for (int r = 0; r < m; ++r) {
      for (int c = 0; c < m; ++c) {
        for (int ch = 0; ch < 3; ++ch) {
          out((r * m + c) * 3 + ch) = static_cast<Scalar>(channels[ch](r, c));
        }
      }
    }
    return out;
  }

  friend bool operator==(const SpatialConfigurationMap& a,
                         const SpatialConfigurationMap& b) {
    if (a.m != b.m) return false;
    for (int ch = 0; ch < 3; ++ch) {
      if ((a.channels[ch] != b.channels[ch]).any()) return false;
    }
    return true;
  }
};

// Cell (r, c) is 1 iff its centre, mapped through the union -> m x m affine
// frame, lies in [x1, x2) x [y1, y2) of `box`.
Grid rasterize_mask(const Box& box, const Box& union_region, int m);

// Draws each skeleton edge in order as a capsule of radius pen_width / 2
// (measured in the m x m frame); later edges overwrite earlier ones.
// Edges touching a joint whose confidence is below `min_confidence` are
// skipped; the default of 0 disables gating.
Grid rasterize_pose(const Pose& pose, const Box& union_region, int m,
                    const Skeleton& skeleton, double pen_width,
                    double min_confidence = 0.0);

SpatialConfigurationMap build_scm(const HOIProposal& proposal, int m,
                                  const Skeleton& skeleton, double pen_width,
                                  double min_confidence = 0.0);

// Golden grid files. Layout (little-endian):
//   bytes 0-3   magic "PMFS"
//   u32         format version (1)
//   u32         height, u32 width, u32 channels
//   4 bytes     channel order tag "HOP\0" (human, object, pose)
//   f32[]       channel-planar payload, row-major within a channel
void write_scm_file(const std::filesystem::path& path,
                    const SpatialConfigurationMap& scm);
SpatialConfigurationMap read_scm_file(const std::filesystem::path& path);

}  // namespace pmf

#endif  // PMF_SPATIAL_CONFIG_HPP_
