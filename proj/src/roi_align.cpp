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
#include "pmf/roi_align.hpp"

#include <cmath>
#include <stdexcept>

namespace pmf {
namespace {

struct Bilinear {
  int lo = 0;
  int hi = 0;
  double w_lo = 0.0;
  double w_hi = 0.0;
  bool inside = false;
};

// Standard RoI-Align boundary handling: samples more than one cell outside
// contribute zero, samples in the border band are clamped.
Bilinear interpolate_axis(double p, int size) {
  Bilinear b;
  if (p < -1.0 || p > size) return b;
  b.inside = true;
  if (p <= 0.0) p = 0.0;
  b.lo = static_cast<int>(p);
  if (b.lo >= size - 1) {
    b.lo = b.hi = size - 1;
    p = b.lo;
  } else {
    b.hi = b.lo + 1;
  }
  const double frac = p - b.lo;
  b.w_lo = 1.0 - frac;
  b.w_hi = frac;
  return b;
}

}  // namespace

RoiSampling roi_sampling(int fm_height, int fm_width, int stride,
                         const Box& box, int resolution, int sampling_ratio) {
  if (!box.valid()) throw std::domain_error("roi_align: invalid box");
  if (resolution < 1 || sampling_ratio < 1 || stride < 1) {
    throw std::domain_error("roi_align: resolution, sampling, stride must be >= 1");
  }
  const double extent_w = static_cast<double>(fm_width) * stride;
  const double extent_h = static_cast<double>(fm_height) * stride;
  if (box.x2 <= 0.0 || box.y2 <= 0.0 || box.x1 >= extent_w || box.y1 >= extent_h) {
    throw std::domain_error("roi_align: box lies outside the feature extent");
  }

  const double scale = 1.0 / stride;
  const double x0 = box.x1 * scale - 0.5;
  const double y0 = box.y1 * scale - 0.5;
  const double bin_w = (box.x2 - box.x1) * scale / resolution;
  const double bin_h = (box.y2 - box.y1) * scale / resolution;
  const double norm = 1.0 / (sampling_ratio * sampling_ratio);

  RoiSampling s;
  s.resolution = resolution;
  s.source_cells = fm_height * fm_width;
  s.taps.reserve(static_cast<std::size_t>(resolution * resolution) *
                 sampling_ratio * sampling_ratio * 4);
  for (int ph = 0; ph < resolution; ++ph) {
    for (int pw = 0; pw < resolution; ++pw) {
      const int out = ph * resolution + pw;
      for (int iy = 0; iy < sampling_ratio; ++iy) {
        const double y = y0 + ph * bin_h + (iy + 0.5) * bin_h / sampling_ratio;
        const Bilinear by = interpolate_axis(y, fm_height);
        if (!by.inside) continue;
        for (int ix = 0; ix < sampling_ratio; ++ix) {
          const double x = x0 + pw * bin_w + (ix + 0.5) * bin_w / sampling_ratio;
          const Bilinear bx = interpolate_axis(x, fm_width);
          if (!bx.inside) continue;
          const int ys[2] = {by.lo, by.hi};
          const double wy[2] = {by.w_lo, by.w_hi};
          const int xs[2] = {bx.lo, bx.hi};
          const double wx[2] = {bx.w_lo, bx.w_hi};
          for (int a = 0; a < 2; ++a) {
            for (int b = 0; b < 2; ++b) {
              const double w = wy[a] * wx[b] * norm;
              if (w != 0.0) s.taps.push_back({out, ys[a] * fm_width + xs[b], w});
            }
          }
        }
      }
    }
  }
  return s;
}

}  // namespace pmf
