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
#ifndef PMF_FEATURES_HPP_
#define PMF_FEATURES_HPP_

#include <stdexcept>
#include <vector>

#include "pmf/geometry.hpp"
#include "pmf/roi_align.hpp"
#include "pmf/tensor.hpp"

namespace pmf {

// Two-channel map over the feature grid: cell (r, c) holds
// ((x - ox) / ow, (y - oy) / oh) for the cell centre (x, y) in image pixels,
// relative to the object centre and scaled by the object size.
template <typename Scalar>
FeatureMap<Scalar> coordinate_map(int height, int width, const Box& object,
                                  int stride) {
  if (!object.valid()) throw std::domain_error("coordinate_map: invalid object box");
  FeatureMap<Scalar> out(height, width, 2, stride);
  const double ox = object.center_x(), oy = object.center_y();
  const double ow = object.width(), oh = object.height();
  for (int r = 0; r < height; ++r) {
    const double y = (r + 0.5) * stride;
    for (int c = 0; c < width; ++c) {
      const double x = (c + 0.5) * stride;
      out.at(r, c, 0) = static_cast<Scalar>((x - ox) / ow);
      out.at(r, c, 1) = static_cast<Scalar>((y - oy) / oh);
    }
  }
  return out;
}

template <typename Scalar>
struct PartCrops {
  std::vector<RowMatrix<Scalar>> parts;         // K crops, (r*r) x D
  RowMatrix<Scalar> object;                     // (r*r) x D
  std::vector<RowMatrix<Scalar>> part_offsets;  // K crops, (r*r) x 2
  RowMatrix<Scalar> object_offset;              // (r*r) x 2
  std::vector<RoiSampling> samplings;           // K parts, then the object
};

// K part regions from the pose plus the object region, pooled from both the
// feature map and the coordinate map at resolution r.
template <typename Scalar>
PartCrops<Scalar> crop_part_features(const FeatureMap<Scalar>& fm,
                                     const FeatureMap<Scalar>& cmap,
                                     const HOIProposal& prop, double gamma,
                                     int resolution, int sampling_ratio = 2) {
  if (cmap.height != fm.height || cmap.width != fm.width || cmap.channels() != 2) {
    throw std::domain_error("crop_part_features: coordinate map shape mismatch");
  }
  const ImageExtent extent{static_cast<double>(fm.width) * fm.stride,
                           static_cast<double>(fm.height) * fm.stride};
  const auto boxes = part_boxes(prop.pose, prop.human, gamma, extent);

  PartCrops<Scalar> out;
  out.parts.reserve(kNumKeypoints);
  out.part_offsets.reserve(kNumKeypoints);
  out.samplings.reserve(kNumKeypoints + 1);
  for (const Box& b : boxes) {
    out.samplings.push_back(roi_sampling(fm, b, resolution, sampling_ratio));
    out.parts.push_back(roi_align(fm, out.samplings.back()));
    out.part_offsets.push_back(roi_align(cmap, out.samplings.back()));
  }
  out.samplings.push_back(roi_sampling(fm, prop.object, resolution, sampling_ratio));
  out.object = roi_align(fm, out.samplings.back());
  out.object_offset = roi_align(cmap, out.samplings.back());
  return out;
}

}  // namespace pmf

#endif  // PMF_FEATURES_HPP_
