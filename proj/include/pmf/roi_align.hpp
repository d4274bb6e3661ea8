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
#ifndef PMF_ROI_ALIGN_HPP_
#define PMF_ROI_ALIGN_HPP_

#include <vector>

#include "pmf/geometry.hpp"
#include "pmf/tensor.hpp"

namespace pmf {

// One bilinear tap: output cell `out` receives weight * input cell `in`.
struct RoiTap {
  int out = 0;
  int in = 0;
  double weight = 0.0;
};

// RoI-Align as a sparse linear map from a feature map to an r x r crop. The
// average over the sampling grid is folded into the tap weights, so the
// forward pass is out = S * in and the backward pass is d_in += S^T * d_out.
struct RoiSampling {
  int resolution = 0;
  int source_cells = 0;
  std::vector<RoiTap> taps;
};

// Half-pixel aligned RoI-Align: the box is mapped to feature coordinates by
// x / stride - 0.5, each of the r x r bins averages a sampling_ratio^2 grid
// of bilinear samples. Throws std::domain_error when the box misses the
// feature extent entirely.
RoiSampling roi_sampling(int fm_height, int fm_width, int stride,
                         const Box& box, int resolution,
                         int sampling_ratio = 2);

template <typename Scalar>
RoiSampling roi_sampling(const FeatureMap<Scalar>& fm, const Box& box,
                         int resolution, int sampling_ratio = 2) {
  return roi_sampling(fm.height, fm.width, fm.stride, box, resolution,
                      sampling_ratio);
}

// (r * r) x D crop, row-major over output cells.
template <typename Scalar>
RowMatrix<Scalar> roi_align(const FeatureMap<Scalar>& fm,
                            const RoiSampling& sampling) {
  RowMatrix<Scalar> out =
      RowMatrix<Scalar>::Zero(sampling.resolution * sampling.resolution,
                              fm.channels());
  const Eigen::Index d = fm.channels();
  const Scalar* src = fm.data.data();
  Scalar* dst = out.data();
  for (const RoiTap& t : sampling.taps) {
    const Scalar w = static_cast<Scalar>(t.weight);
    const Scalar* in = src + t.in * d;
    Scalar* o = dst + t.out * d;
    for (Eigen::Index k = 0; k < d; ++k) o[k] += w * in[k];
  }
  return out;
}

template <typename Scalar>
RowMatrix<Scalar> roi_align(const FeatureMap<Scalar>& fm, const Box& box,
                            int resolution, int sampling_ratio = 2) {
  return roi_align(fm, roi_sampling(fm, box, resolution, sampling_ratio));
}

// Accumulates d_in += S^T * d_out into `grad_fm` ((H' * W') x D).
template <typename Scalar, typename Derived>
void roi_align_backward(const RoiSampling& sampling,
                        const Eigen::MatrixBase<Derived>& grad_out,
                        RowMatrix<Scalar>& grad_fm) {
  for (const RoiTap& t : sampling.taps) {
    grad_fm.row(t.in) += static_cast<Scalar>(t.weight) * grad_out.row(t.out);
  }
}

}  // namespace pmf

#endif  // PMF_ROI_ALIGN_HPP_
