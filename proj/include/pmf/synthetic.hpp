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
#ifndef PMF_SYNTHETIC_HPP_
#define PMF_SYNTHETIC_HPP_

#include <array>
#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "pmf/dataset.hpp"
#include "pmf/image.hpp"

namespace pmf {

class GenerationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct ActionBinding {
  std::string name;
  int anchor_joint = 0;  // COCO keypoint index
};

using Range = std::pair<double, double>;

// Procedural stick-figure scenes. Lengths marked "h" are fractions of the
// figure's height.
struct SyntheticSpec {
  int image_width = 96;
  int image_height = 96;
  int num_images = 200;
  std::uint64_t seed = 1;
  std::vector<std::string> object_classes = {"red_blob", "green_blob", "blue_blob"};
  std::vector<ActionBinding> actions = {{"hold", 10}, {"kick", 16}, {"look", 0}, {"sit", 11}};
  std::pair<int, int> humans_per_image = {1, 2};
  std::pair<int, int> objects_per_image = {1, 3};
  double positive_fraction = 0.7;
  Range human_height = {44.0, 72.0};   // pixels
  Range object_radius = {0.07, 0.10};  // h
  double proximity_radius = 0.15;      // h; an object this close to an anchor interacts
  double box_jitter = 0.0;             // max detector box error, fraction of box size
  double pose_noise = 0.0;             // std-dev of estimated joints, pixels
  Range score_range = {0.7, 1.0};
  int max_retries = 200;
  // Limb-length plausibility bounds, h.
  Range upper_arm = {0.15, 0.19};
  Range forearm = {0.13, 0.17};
  Range thigh = {0.22, 0.26};
  Range shin = {0.20, 0.24};

  void validate() const;  // throws GenerationError
};

SyntheticSpec synthetic_spec_from_json(const nlohmann::json& j);
nlohmann::json synthetic_spec_to_json(const SyntheticSpec& spec);
SyntheticSpec load_synthetic_spec(const std::filesystem::path& path);

// Deterministic given spec.seed. Throws GenerationError when an image cannot
// be laid out within max_retries attempts.
Dataset generate_synthetic(const SyntheticSpec& spec);

// The action a pair carries under the binding rule: the bound anchor joint
// nearest to the object centre, if it lies within proximity_radius * height.
// Returns -1 for no interaction.
int nearest_anchor_action(const Pose& pose, double human_height, const Box& object,
                          const SyntheticSpec& spec);

// Pixels for an image record: PNG from `path`, or the procedural rendering.
Image render_image(const Dataset& ds, int image_id);

Rgb object_class_color(int category);

}  // namespace pmf

#endif  // PMF_SYNTHETIC_HPP_
