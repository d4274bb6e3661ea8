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
#ifndef PMF_DATASET_HPP_
#define PMF_DATASET_HPP_

#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "pmf/geometry.hpp"

namespace pmf {

inline constexpr int kDatasetVersion = 1;

// Thrown by validation with one message per offending record.
class SchemaError : public std::runtime_error {
 public:
  explicit SchemaError(std::vector<std::string> problems);
  const std::vector<std::string>& problems() const { return problems_; }

 private:
  std::vector<std::string> problems_;
};

struct Category {
  int id = 0;
  std::string name;
  friend bool operator==(const Category&, const Category&) = default;
};

// Pixels come from a file (PNG) or are re-rendered procedurally from the
// annotations and a background seed.
struct ImageRecord {
  int id = 0;
  int width = 0;
  int height = 0;
  std::string path;
  std::optional<std::uint64_t> procedural_seed;
  friend bool operator==(const ImageRecord&, const ImageRecord&) = default;
};

// `box` is ground truth; `det_box`, `score` and `pose` are what the external
// detector and pose estimator reported. `true_pose` is kept when it differs
// from the estimate.
struct HumanRecord {
  int id = 0;
  int image_id = 0;
  Box box;
  Box det_box;
  double score = 1.0;
  Pose pose;
  std::optional<Pose> true_pose;
  friend bool operator==(const HumanRecord&, const HumanRecord&) = default;
};

struct ObjectRecord {
  int id = 0;
  int image_id = 0;
  int category = 1;
  Box box;
  Box det_box;
  double score = 1.0;
  friend bool operator==(const ObjectRecord&, const ObjectRecord&) = default;
};

struct InteractionRecord {
  int human_id = 0;
  int object_id = 0;
  std::vector<int> actions;  // 0-based action ids
  friend bool operator==(const InteractionRecord&, const InteractionRecord&) = default;
};

struct Dataset {
  int version = kDatasetVersion;
  std::vector<Category> object_categories;  // ids 1..C
  std::vector<Category> actions;            // ids 0..A-1
  std::vector<ImageRecord> images;
  std::vector<HumanRecord> humans;
  std::vector<ObjectRecord> objects;
  std::vector<InteractionRecord> interactions;

  int num_actions() const { return static_cast<int>(actions.size()); }
  int num_object_classes() const { return static_cast<int>(object_categories.size()); }
  const ImageRecord& image(int id) const;  // throws std::out_of_range

  friend bool operator==(const Dataset&, const Dataset&) = default;
};

// Every problem found is collected before throwing SchemaError.
void validate_dataset(const Dataset& ds);

nlohmann::json dataset_to_json(const Dataset& ds);
Dataset dataset_from_json(const nlohmann::json& j);  // validates
Dataset load_dataset(const std::filesystem::path& path);
void save_dataset(const Dataset& ds, const std::filesystem::path& path);

// Ground-truth pair with its action set, in ground-truth boxes.
struct LabeledPair {
  GroundTruthPair pair;
  std::vector<int> actions;
  int human_id = 0;
  int object_id = 0;
};

// Every detected human paired with every detected object of the image, using
// detector boxes, scores and estimated poses. Object lists may contain
// person-class entries; a human is never paired with itself otherwise.
std::vector<HOIProposal> pair_proposals(const Dataset& ds, int image_id);

// Source ids of pair_proposals' entries, in the same order.
std::vector<std::pair<int, int>> proposal_ids(const Dataset& ds, int image_id);

std::vector<LabeledPair> ground_truth_pairs(const Dataset& ds, int image_id);

}  // namespace pmf

#endif  // PMF_DATASET_HPP_
