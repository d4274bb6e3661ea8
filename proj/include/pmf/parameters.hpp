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
#ifndef PMF_PARAMETERS_HPP_
#define PMF_PARAMETERS_HPP_

#include <cmath>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "pmf/tensor.hpp"

namespace pmf {

template <typename Scalar>
struct Parameter {
  std::string name;
  RowMatrix<Scalar> value;
  RowMatrix<Scalar> grad;
};

// Ordered, named parameter storage. Layers refer to entries by index so a
// copied set stays consistent with copied layers.
template <typename Scalar>
class ParameterSet {
 public:
  std::size_t add(std::string name, int rows, int cols) {
    if (find(name) != nullptr) {
      throw std::invalid_argument("duplicate parameter " + name);
    }
    params_.push_back({std::move(name), RowMatrix<Scalar>::Zero(rows, cols),
                       RowMatrix<Scalar>::Zero(rows, cols)});
    return params_.size() - 1;
  }

  std::size_t size() const { return params_.size(); }
  Parameter<Scalar>& operator[](std::size_t i) { return params_[i]; }
  const Parameter<Scalar>& operator[](std::size_t i) const { return params_[i]; }
  auto begin() { return params_.begin(); }
  auto end() { return params_.end(); }
  auto begin() const { return params_.begin(); }
  auto end() const { return params_.end(); }

  const Parameter<Scalar>* find(std::string_view name) const {
    for (const auto& p : params_) {
      if (p.name == name) return &p;
    }
    return nullptr;
  }
  Parameter<Scalar>* find(std::string_view name) {
    for (auto& p : params_) {
      if (p.name == name) return &p;
    }
    return nullptr;
  }

  std::size_t scalar_count() const {
    std::size_t n = 0;
    for (const auto& p : params_) n += static_cast<std::size_t>(p.value.size());
    return n;
  }

  void zero_grad() {
    for (auto& p : params_) p.grad.setZero();
  }

  // Weights (names ending in ".weight", laid out out x fan_in) are drawn from
  // U(-sqrt(6 / fan_in), sqrt(6 / fan_in)); everything else starts at zero.
  // Each tensor has its own stream keyed by (seed, name), so sets built with
  // different ablation flags agree on the tensors they share. Draws happen in
  // double so float and double sets agree up to rounding.
  void initialize(std::uint64_t seed) {
    for (auto& p : params_) {
      const bool is_weight = p.name.size() >= 7 &&
                             p.name.compare(p.name.size() - 7, 7, ".weight") == 0;
      if (!is_weight) {
        p.value.setZero();
        continue;
      }
      std::mt19937_64 rng(seed ^ name_hash(p.name));
      const double bound = std::sqrt(6.0 / static_cast<double>(p.value.cols()));
      std::uniform_real_distribution<double> dist(-bound, bound);
      for (Eigen::Index i = 0; i < p.value.size(); ++i) {
        p.value.data()[i] = static_cast<Scalar>(dist(rng));
      }
    }
    zero_grad();
  }

  // FNV-1a.
  static std::uint64_t name_hash(std::string_view name) {
    std::uint64_t h = 1469598103934665603ULL;
    for (unsigned char c : name) {
      h ^= c;
      h *= 1099511628211ULL;
    }
    return h;
  }

 private:
  std::vector<Parameter<Scalar>> params_;
};

}  // namespace pmf

#endif  // PMF_PARAMETERS_HPP_
