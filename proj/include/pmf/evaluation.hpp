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
#ifndef PMF_EVALUATION_HPP_
#define PMF_EVALUATION_HPP_

#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "pmf/dataset.hpp"
#include "pmf/geometry.hpp"

namespace pmf {

struct Detection {
  int image_id = 0;
  Box human;
  Box object;
  int object_class = 1;
  int action = 0;
  double score = 0.0;
  friend bool operator==(const Detection&, const Detection&) = default;
};

// One record per (pair, action).
struct GroundTruthRecord {
  int image_id = 0;
  Box human;
  Box object;
  int object_class = 1;
  int action = 0;
  friend bool operator==(const GroundTruthRecord&, const GroundTruthRecord&) = default;
};

struct EvalOptions {
  double iou_threshold = 0.5;
  bool require_object_class = false;
  int num_actions = 0;  // 0: one past the largest action id seen
};

struct PrPoint {
  double score = 0.0;
  double recall = 0.0;
  double precision = 0.0;
};

struct ActionResult {
  int action = 0;
  int num_ground_truth = 0;
  int num_detections = 0;
  int true_positives = 0;
  std::optional<double> ap;  // undefined without ground truth
  std::vector<PrPoint> curve;
};

struct EvalReport {
  std::vector<ActionResult> actions;
  std::optional<double> map;  // mean over actions with ground truth
  std::vector<std::string> notices;
};

// All-point interpolated area under a PR curve given in detection order:
// sum_k (r_k - r_{k-1}) max_{j >= k} p_j with r_0 = 0.
double average_precision(std::span<const PrPoint> curve);

// Per action: detections sorted by descending score (ties by image id, then
// input order) are greedily matched to unmatched ground truth of the same
// image under the dual-IoU rule.
EvalReport evaluate(std::span<const Detection> detections,
                    std::span<const GroundTruthRecord> ground_truth,
                    const EvalOptions& options = {});

struct ActionGroup {
  std::string name;
  std::vector<int> actions;
};

struct SplitResult {
  std::string name;
  std::optional<double> map;  // undefined when no member action has ground truth
};

// Throws std::invalid_argument unless the groups partition the report's actions.
std::vector<SplitResult> split_report(const EvalReport& report,
                                      std::span<const ActionGroup> groups);

nlohmann::json report_to_json(const EvalReport& report, const Dataset* ds = nullptr,
                              std::span<const SplitResult> splits = {});
std::string report_table(const EvalReport& report, const Dataset* ds = nullptr,
                         std::span<const SplitResult> splits = {});

std::vector<GroundTruthRecord> ground_truth_records(const Dataset& ds);

// Line-delimited JSON: {image_id, human_box, object_box, object_class,
// action_id, score}; ground truth omits score.
nlohmann::json to_json(const Detection& d);
nlohmann::json to_json(const GroundTruthRecord& g);
void write_detections(const std::filesystem::path& path, std::span<const Detection> dets);
std::vector<Detection> read_detections(const std::filesystem::path& path);
void write_ground_truth(const std::filesystem::path& path,
                        std::span<const GroundTruthRecord> gts);
std::vector<GroundTruthRecord> read_ground_truth(const std::filesystem::path& path);

}  // namespace pmf

#endif  // PMF_EVALUATION_HPP_
