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
#ifndef PMF_BACKBONE_HPP_
#define PMF_BACKBONE_HPP_

#include "pmf/layers.hpp"
#include "pmf/parameters.hpp"
#include "pmf/tensor.hpp"

namespace pmf {

// conv -> relu -> pool -> conv -> relu -> pool -> conv. Overall stride 4.
// The last convolution is affine so zero weights give an all-bias output.
template <typename Scalar>
class Backbone {
 public:
  static constexpr int kStride = 4;

  struct Cache {
    RowMatrix<Scalar> cols1, cols2, cols3;
    FeatureMap<Scalar> act1, act2;  // post-rectifier, pre-pool
    int in_height = 0, in_width = 0;
  };

  Backbone() = default;
  Backbone(ParameterSet<Scalar>& ps, int in_channels, int c1, int c2, int out)
      : conv1_(ps, "backbone.conv1", in_channels, c1),
        conv2_(ps, "backbone.conv2", c1, c2),
        conv3_(ps, "backbone.conv3", c2, out) {}

  int out_channels() const { return conv3_.out(); }

  FeatureMap<Scalar> forward(const ParameterSet<Scalar>& ps,
                             const FeatureMap<Scalar>& image, Cache& cache) const {
    if (image.height % kStride != 0 || image.width % kStride != 0) {
      throw std::domain_error("backbone: image size must be divisible by 4");
    }
    if (image.stride != 1) throw std::domain_error("backbone: input stride must be 1");
    cache.in_height = image.height;
    cache.in_width = image.width;
    cache.act1 = conv1_.forward(ps, image, cache.cols1);
    cache.act1.data = cache.act1.data.cwiseMax(Scalar(0));
    cache.act2 = conv2_.forward(ps, avg_pool2(cache.act1), cache.cols2);
    cache.act2.data = cache.act2.data.cwiseMax(Scalar(0));
    return conv3_.forward(ps, avg_pool2(cache.act2), cache.cols3);
  }

  FeatureMap<Scalar> forward(const ParameterSet<Scalar>& ps,
                             const FeatureMap<Scalar>& image) const {
    Cache cache;
    return forward(ps, image, cache);
  }

  // Accumulates parameter gradients from dL/d(feature map).
  void backward(ParameterSet<Scalar>& ps, const Cache& cache,
                const FeatureMap<Scalar>& grad) const {
    FeatureMap<Scalar> g = conv3_.backward(ps, cache.cols3, grad, grad.height,
                                           grad.width, true);
    g = avg_pool2_backward(g);
    g.data = (cache.act2.data.array() > Scalar(0)).select(g.data, Scalar(0));
    g = conv2_.backward(ps, cache.cols2, g, g.height, g.width, true);
    g = avg_pool2_backward(g);
    g.data = (cache.act1.data.array() > Scalar(0)).select(g.data, Scalar(0));
    conv1_.backward(ps, cache.cols1, g, g.height, g.width, false);
  }

 private:
  Conv3x3<Scalar> conv1_;
  Conv3x3<Scalar> conv2_;
  Conv3x3<Scalar> conv3_;
};

}  // namespace pmf

#endif  // PMF_BACKBONE_HPP_
