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
#ifndef PMF_LAYERS_HPP_
#define PMF_LAYERS_HPP_

#include <string>

#include "pmf/parameters.hpp"
#include "pmf/tensor.hpp"

namespace pmf {

// y = x W^T + b over a batch of row vectors. W is out x in.
template <typename Scalar>
class Linear {
 public:
  Linear() = default;
  Linear(ParameterSet<Scalar>& ps, const std::string& name, int in, int out)
      : in_(in), out_(out),
        weight_(ps.add(name + ".weight", out, in)),
        bias_(ps.add(name + ".bias", 1, out)) {}

  int in() const { return in_; }
  int out() const { return out_; }

  RowMatrix<Scalar> forward(const ParameterSet<Scalar>& ps,
                            const RowMatrix<Scalar>& x) const {
    if (x.cols() != in_) throw std::domain_error("Linear: input width mismatch");
    RowMatrix<Scalar> y = x * ps[weight_].value.transpose();
    y.rowwise() += ps[bias_].value.row(0);
    return y;
  }

  // Accumulates parameter gradients; returns dL/dx when requested.
  RowMatrix<Scalar> backward(ParameterSet<Scalar>& ps, const RowMatrix<Scalar>& x,
                             const RowMatrix<Scalar>& dy,
                             bool need_input_grad = true) const {
    ps[weight_].grad.noalias() += dy.transpose() * x;
    ps[bias_].grad.row(0) += dy.colwise().sum();
    if (!need_input_grad) return {};
    return dy * ps[weight_].value;
  }

 private:
  int in_ = 0;
  int out_ = 0;
  std::size_t weight_ = 0;
  std::size_t bias_ = 0;
};

// affine -> rectifier -> affine
template <typename Scalar>
class Mlp2 {
 public:
  struct Cache {
    RowMatrix<Scalar> input;
    RowMatrix<Scalar> hidden;  // post-rectifier
  };

  Mlp2() = default;
  Mlp2(ParameterSet<Scalar>& ps, const std::string& name, int in, int hidden, int out)
      : fc1_(ps, name + ".fc1", in, hidden), fc2_(ps, name + ".fc2", hidden, out) {}

  int in() const { return fc1_.in(); }
  int out() const { return fc2_.out(); }

  RowMatrix<Scalar> forward(const ParameterSet<Scalar>& ps,
                            const RowMatrix<Scalar>& x, Cache& cache) const {
    cache.input = x;
    cache.hidden = fc1_.forward(ps, x).cwiseMax(Scalar(0));
    return fc2_.forward(ps, cache.hidden);
  }

  RowMatrix<Scalar> backward(ParameterSet<Scalar>& ps, const Cache& cache,
                             const RowMatrix<Scalar>& dy,
                             bool need_input_grad = true) const {
    RowMatrix<Scalar> dh = fc2_.backward(ps, cache.hidden, dy);
    dh = (cache.hidden.array() > Scalar(0)).select(dh, Scalar(0));
    return fc1_.backward(ps, cache.input, dh, need_input_grad);
  }

 private:
  Linear<Scalar> fc1_;
  Linear<Scalar> fc2_;
};

// 3x3 convolution, zero "same" padding, unit stride, via im2col. The weight
// is out x (9 * in) with column index (ky * 3 + kx) * in + c.
template <typename Scalar>
class Conv3x3 {
 public:
  Conv3x3() = default;
  Conv3x3(ParameterSet<Scalar>& ps, const std::string& name, int in, int out)
      : in_(in), out_(out),
        weight_(ps.add(name + ".weight", out, 9 * in)),
        bias_(ps.add(name + ".bias", 1, out)) {}

  int in() const { return in_; }
  int out() const { return out_; }

  static RowMatrix<Scalar> im2col(const FeatureMap<Scalar>& x) {
    const int c = x.channels();
    RowMatrix<Scalar> cols = RowMatrix<Scalar>::Zero(x.cells(), 9 * c);
    for (int y = 0; y < x.height; ++y) {
      for (int xx = 0; xx < x.width; ++xx) {
        const int row = y * x.width + xx;
        for (int ky = 0; ky < 3; ++ky) {
          const int sy = y + ky - 1;
          if (sy < 0 || sy >= x.height) continue;
          for (int kx = 0; kx < 3; ++kx) {
            const int sx = xx + kx - 1;
            if (sx < 0 || sx >= x.width) continue;
            cols.row(row).segment((ky * 3 + kx) * c, c) = x.data.row(sy * x.width + sx);
          }
        }
      }
    }
    return cols;
  }

  static void col2im(const RowMatrix<Scalar>& dcols, FeatureMap<Scalar>& dx) {
    const int c = dx.channels();
    for (int y = 0; y < dx.height; ++y) {
      for (int xx = 0; xx < dx.width; ++xx) {
        const int row = y * dx.width + xx;
        for (int ky = 0; ky < 3; ++ky) {
          const int sy = y + ky - 1;
          if (sy < 0 || sy >= dx.height) continue;
          for (int kx = 0; kx < 3; ++kx) {
            const int sx = xx + kx - 1;
            if (sx < 0 || sx >= dx.width) continue;
            dx.data.row(sy * dx.width + sx) += dcols.row(row).segment((ky * 3 + kx) * c, c);
          }
        }
      }
    }
  }

  FeatureMap<Scalar> forward(const ParameterSet<Scalar>& ps,
                             const FeatureMap<Scalar>& x,
                             RowMatrix<Scalar>& cols) const {
    if (x.channels() != in_) throw std::domain_error("Conv3x3: channel mismatch");
    cols = im2col(x);
    FeatureMap<Scalar> y;
    y.height = x.height;
    y.width = x.width;
    y.stride = x.stride;
    y.data = cols * ps[weight_].value.transpose();
    y.data.rowwise() += ps[bias_].value.row(0);
    return y;
  }

  // Returns dL/dx shaped like the input when requested.
  FeatureMap<Scalar> backward(ParameterSet<Scalar>& ps, const RowMatrix<Scalar>& cols,
                              const FeatureMap<Scalar>& dy, int height, int width,
                              bool need_input_grad) const {
    ps[weight_].grad.noalias() += dy.data.transpose() * cols;
    ps[bias_].grad.row(0) += dy.data.colwise().sum();
    if (!need_input_grad) return {};
    FeatureMap<Scalar> dx(height, width, in_, dy.stride);
    const RowMatrix<Scalar> dcols = dy.data * ps[weight_].value;
    col2im(dcols, dx);
    return dx;
  }

 private:
  int in_ = 0;
  int out_ = 0;
  std::size_t weight_ = 0;
  std::size_t bias_ = 0;
};

// 2x2 average pooling with stride 2; doubles the map stride.
template <typename Scalar>
FeatureMap<Scalar> avg_pool2(const FeatureMap<Scalar>& x) {
  if (x.height % 2 != 0 || x.width % 2 != 0) {
    throw std::domain_error("avg_pool2: odd spatial size");
  }
  FeatureMap<Scalar> y(x.height / 2, x.width / 2, x.channels(), x.stride * 2);
  for (int r = 0; r < y.height; ++r) {
    for (int c = 0; c < y.width; ++c) {
      const int i = 2 * r * x.width + 2 * c;
      y.data.row(r * y.width + c) =
          Scalar(0.25) * (x.data.row(i) + x.data.row(i + 1) +
                          x.data.row(i + x.width) + x.data.row(i + x.width + 1));
    }
  }
  return y;
}

template <typename Scalar>
FeatureMap<Scalar> avg_pool2_backward(const FeatureMap<Scalar>& dy) {
  FeatureMap<Scalar> dx(dy.height * 2, dy.width * 2, dy.channels(), dy.stride / 2);
  for (int r = 0; r < dy.height; ++r) {
    for (int c = 0; c < dy.width; ++c) {
      const auto g = (Scalar(0.25) * dy.data.row(r * dy.width + c)).eval();
      const int i = 2 * r * dx.width + 2 * c;
      dx.data.row(i) = g;
      dx.data.row(i + 1) = g;
      dx.data.row(i + dx.width) = g;
      dx.data.row(i + dx.width + 1) = g;
    }
  }
  return dx;
}

}  // namespace pmf

#endif  // PMF_LAYERS_HPP_
