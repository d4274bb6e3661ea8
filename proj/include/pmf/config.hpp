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
#ifndef PMF_CONFIG_HPP_
#define PMF_CONFIG_HPP_

#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>

namespace pmf {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// The five switchable components: spatial configuration branch, part crops,
// spatial align, semantic attention, interaction affinity.
struct AblationFlags {
  bool scm = true;
  bool part_crop = true;
  bool spatial_align = true;
  bool semantic_attention = true;
  bool interaction_affinity = true;

  static AblationFlags holistic_baseline() {
    return {true, false, false, false, false};
  }
  friend bool operator==(const AblationFlags&, const AblationFlags&) = default;
};

struct ModelConfig {
  int scm_size = 64;              // M
  int holistic_resolution = 7;    // R_h
  int part_resolution = 5;        // R_p
  double part_scale = 0.1;        // gamma, fraction of human box height
  int feature_dim = 32;           // D
  int backbone_c1 = 8;
  int backbone_c2 = 16;
  int holistic_dim = 64;          // per-branch embedding width
  int local_dim = 128;            // zoom-in embedding width
  int fusion_dim = 64;            // hidden width of both fusion heads
  int attention_dim = 64;         // hidden width of the attention network
  int num_keypoints = 17;         // K, fixed by the COCO skeleton
  int num_actions = 4;            // A
  int num_object_classes = 3;     // C
  double pen_width = 3.0;         // w, in SCM cells
  int sampling_ratio = 2;         // RoI-Align samples per bin axis
  double min_joint_confidence = 0.0;  // 0 disables keypoint gating
  std::uint64_t seed = 1;
  AblationFlags flags;

  // Throws ConfigError naming the first bad key.
  void validate() const;
  friend bool operator==(const ModelConfig&, const ModelConfig&) = default;
};

struct TrainConfig {
  ModelConfig model;
  double mu = 1.0;                // affinity loss weight
  double learning_rate = 1e-2;
  double momentum = 0.9;
  double weight_decay = 1e-4;
  int iterations = 2000;
  int lr_drop_iteration = 1500;
  double lr_drop_factor = 0.1;
  int positive_ratio = 1;
  int negative_ratio = 3;
  int batch_size = 16;
  double match_threshold = 0.5;
  int checkpoint_every = 0;       // 0: only at the end
  int log_every = 10;
  std::uint64_t seed = 1;

  void validate() const;
};

// INI-style text: [model], [ablation] and [train] sections of key = value
// lines, ';' comments. Unknown keys are rejected; missing keys keep their
// defaults.
TrainConfig parse_train_config(const std::string& text);
TrainConfig load_train_config(const std::filesystem::path& path);
std::string format_train_config(const TrainConfig& config);

// Sets one key as if it appeared in the file; the caller re-validates.
void set_config_value(TrainConfig& config, const std::string& section, const std::string& key,
                      const std::string& value);

// Just the [model] and [ablation] sections, as stored in checkpoints.
ModelConfig parse_model_config(const std::string& text);
std::string format_model_config(const ModelConfig& config);

}  // namespace pmf

#endif  // PMF_CONFIG_HPP_
