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
#ifndef PMF_TENSOR_HPP_
#define PMF_TENSOR_HPP_

#include <Eigen/Core>

#include <stdexcept>

namespace pmf {

template <typename Scalar>
using RowMatrix =
    Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

template <typename Scalar>
using RowVector = Eigen::Matrix<Scalar, 1, Eigen::Dynamic>;

// Dense H' x W' x D map stored as a (H' * W') x D matrix; row y * W' + x holds
// the channel vector of cell (y, x). `stride` is image pixels per cell.
template <typename Scalar>
struct FeatureMap {
  int height = 0;
  int width = 0;
  int stride = 1;
  RowMatrix<Scalar> data;

  FeatureMap() = default;
  FeatureMap(int h, int w, int channels, int s = 1)
      : height(h), width(w), stride(s), data(RowMatrix<Scalar>::Zero(h * w, channels)) {
    if (h < 1 || w < 1 || channels < 1 || s < 1) {
      throw std::domain_error("FeatureMap: dimensions must be positive");
    }
  }

  int channels() const { return static_cast<int>(data.cols()); }
  int cells() const { return height * width; }
  Scalar& at(int y, int x, int c) { return data(y * width + x, c); }
  Scalar at(int y, int x, int c) const { return data(y * width + x, c); }

  template <typename Other>
  FeatureMap<Other> cast() const {
    FeatureMap<Other> out;
    out.height = height;
    out.width = width;
    out.stride = stride;
    out.data = data.template cast<Other>();
    return out;
  }
};

}  // namespace pmf

#endif  // PMF_TENSOR_HPP_
