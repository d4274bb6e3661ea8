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
#ifndef PMF_LOSS_HPP_
#define PMF_LOSS_HPP_

#include <algorithm>
#include <cmath>
#include <span>
#include <stdexcept>
#include <vector>

#include "pmf/tensor.hpp"

namespace pmf {

// Multi-label relation targets y and the interaction-affinity target z.
// z is 1 exactly when some entry of y is 1.
struct TrainingLabel {
  std::vector<int> y;
  int z = 0;

  static TrainingLabel from_relations(std::vector<int> y) {
    TrainingLabel t;
    t.y = std::move(y);
    t.z = std::any_of(t.y.begin(), t.y.end(), [](int v) { return v != 0; }) ? 1 : 0;
    return t;
  }
  friend bool operator==(const TrainingLabel&, const TrainingLabel&) = default;
};

inline constexpr double kProbabilityClamp = 1e-7;

struct LossValue {
  double total = 0.0;
  double relation = 0.0;  // mean over the batch of the summed per-action terms
  double affinity = 0.0;  // mean over the batch, before the mu weight
};

// BCE(t, p) = -(t log p + (1 - t) log(1 - p)) with p clamped to [eps, 1 - eps].
inline double binary_cross_entropy(double target, double p) {
  const double q = std::clamp(p, kProbabilityClamp, 1.0 - kProbabilityClamp);
  return -(target * std::log(q) + (1.0 - target) * std::log(1.0 - q));
}

// d BCE / d p; zero where the clamp is active.
inline double binary_cross_entropy_grad(double target, double p) {
  if (p <= kProbabilityClamp || p >= 1.0 - kProbabilityClamp) return 0.0;
  return -target / p + (1.0 - target) / (1.0 - p);
}

template <typename Scalar>
struct LossGradient {
  RowMatrix<Scalar> d_s_local;     // N x A
  RowMatrix<Scalar> d_s_affinity;  // N x 1
};

// mean_i [ sum_a BCE(y_i^a, s_L^{i,a}) + mu BCE(z_i, s_G^i) ]. With
// `use_affinity` false the affinity term is dropped (s_G is then a constant).
template <typename Scalar>
LossValue hoi_loss(const RowMatrix<Scalar>& s_local, const RowMatrix<Scalar>& s_affinity,
                   std::span<const TrainingLabel> labels, double mu,
                   LossGradient<Scalar>* grad = nullptr, bool use_affinity = true) {
  const Eigen::Index n = s_local.rows();
  const Eigen::Index a = s_local.cols();
  if (static_cast<Eigen::Index>(labels.size()) != n || s_affinity.rows() != n ||
      s_affinity.cols() != 1) {
    throw std::domain_error("hoi_loss: batch shape mismatch");
  }
  if (n == 0) throw std::domain_error("hoi_loss: empty batch");
  if (grad != nullptr) {
    grad->d_s_local = RowMatrix<Scalar>::Zero(n, a);
    grad->d_s_affinity = RowMatrix<Scalar>::Zero(n, 1);
  }
  const double inv_n = 1.0 / static_cast<double>(n);
  LossValue loss;
  for (Eigen::Index i = 0; i < n; ++i) {
    const TrainingLabel& t = labels[static_cast<std::size_t>(i)];
    if (static_cast<Eigen::Index>(t.y.size()) != a) {
      throw std::domain_error("hoi_loss: label width mismatch");
    }
    for (Eigen::Index j = 0; j < a; ++j) {
      const double p = static_cast<double>(s_local(i, j));
      loss.relation += binary_cross_entropy(t.y[j], p);
      if (grad != nullptr) {
        grad->d_s_local(i, j) =
            static_cast<Scalar>(inv_n * binary_cross_entropy_grad(t.y[j], p));
      }
    }
    if (use_affinity) {
      const double p = static_cast<double>(s_affinity(i, 0));
      loss.affinity += binary_cross_entropy(t.z, p);
      if (grad != nullptr) {
        grad->d_s_affinity(i, 0) =
            static_cast<Scalar>(mu * inv_n * binary_cross_entropy_grad(t.z, p));
      }
    }
  }
  loss.relation *= inv_n;
  loss.affinity *= inv_n;
  loss.total = loss.relation + mu * loss.affinity;
  return loss;
}

}  // namespace pmf

#endif  // PMF_LOSS_HPP_
