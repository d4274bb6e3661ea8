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
#ifndef PMF_CHECKPOINT_HPP_
#define PMF_CHECKPOINT_HPP_

#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

#include "pmf/config.hpp"
#include "pmf/parameters.hpp"
#include "pmf/tensor.hpp"

namespace pmf {

inline constexpr std::uint32_t kCheckpointVersion = 1;

enum class CheckpointErrorCode { kIo, kVersion, kTruncated, kName, kShape };

class CheckpointError : public std::runtime_error {
 public:
  CheckpointError(CheckpointErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}
  CheckpointErrorCode code() const { return code_; }

 private:
  CheckpointErrorCode code_;
};

template <typename Scalar>
struct NamedTensor {
  std::string name;
  RowMatrix<Scalar> value;
};

// Model parameters plus optional optimizer state ("momentum:<name>" entries).
template <typename Scalar>
struct Checkpoint {
  ModelConfig model;
  std::uint64_t iteration = 0;
  std::vector<NamedTensor<Scalar>> tensors;

  const NamedTensor<Scalar>* find(const std::string& name) const;
};

// Layout, little-endian:
//   "PMFCKPT\0", u32 version, u32 scalar bytes (4 or 8), u64 iteration,
//   u32 length + model config text,
//   u32 tensor count, then per tensor: u32 length + name, u32 rows, u32 cols,
//   rows * cols scalars in row-major order.
// Written to a sibling temporary file and renamed into place.
template <typename Scalar>
void save_checkpoint(const Checkpoint<Scalar>& ckpt, const std::filesystem::path& path);

// Payloads of the other precision are converted.
template <typename Scalar>
Checkpoint<Scalar> load_checkpoint(const std::filesystem::path& path);

template <typename Scalar>
Checkpoint<Scalar> make_checkpoint(const ModelConfig& model, const ParameterSet<Scalar>& params,
                                   std::uint64_t iteration = 0);

// Copies checkpoint values into `params`. Every parameter must be present with
// the same shape (kName / kShape otherwise); extra parameter entries are a
// kName error. "momentum:" entries are ignored.
template <typename Scalar>
void restore_parameters(const Checkpoint<Scalar>& ckpt, ParameterSet<Scalar>& params);

}  // namespace pmf

#endif  // PMF_CHECKPOINT_HPP_
