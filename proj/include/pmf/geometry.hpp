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
#ifndef PMF_GEOMETRY_HPP_
#define PMF_GEOMETRY_HPP_

#include <array>
#include <cstddef>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

namespace pmf {

// Axis-aligned box in continuous image coordinates, corner convention.
// Area is (x2 - x1) * (y2 - y1); there is no "+1" pixel convention.
struct Box {
  double x1 = 0.0;
  double y1 = 0.0;
  double x2 = 0.0;
  double y2 = 0.0;

  double width() const { return x2 - x1; }
  double height() const { return y2 - y1; }
  double area() const { return width() * height(); }
  double center_x() const { return 0.5 * (x1 + x2); }
  double center_y() const { return 0.5 * (y1 + y2); }

  // x2 > x1, y2 > y1 and every coordinate finite.
  bool valid() const;

  Box translated(double dx, double dy) const {
    return {x1 + dx, y1 + dy, x2 + dx, y2 + dy};
  }
  Box scaled(double s) const { return {x1 * s, y1 * s, x2 * s, y2 * s}; }

  friend bool operator==(const Box&, const Box&) = default;
};

struct ImageExtent {
  double width = 0.0;
  double height = 0.0;
};

// COCO keypoint order.
inline constexpr int kNumKeypoints = 17;

enum class Keypoint : int {
  kNose = 0,
  kLeftEye,
  kRightEye,
  kLeftEar,
  kRightEar,
  kLeftShoulder,
  kRightShoulder,
  kLeftElbow,
  kRightElbow,
  kLeftWrist,
  kRightWrist,
  kLeftHip,
  kRightHip,
  kLeftKnee,
  kRightKnee,
  kLeftAnkle,
  kRightAnkle,
};

std::string_view keypoint_name(int index);
// Returns -1 for unknown names.
int keypoint_index(std::string_view name);

struct Joint {
  double x = 0.0;
  double y = 0.0;
  double confidence = 1.0;

  friend bool operator==(const Joint&, const Joint&) = default;
};

struct Pose {
  std::array<Joint, kNumKeypoints> joints{};

  const Joint& operator[](int k) const { return joints[static_cast<std::size_t>(k)]; }
  Joint& operator[](int k) { return joints[static_cast<std::size_t>(k)]; }

  Pose translated(double dx, double dy) const;
  Pose scaled(double s) const;

  friend bool operator==(const Pose&, const Pose&) = default;
};

// One human box paired with one object box; the unit of classification.
struct HOIProposal {
  Box human;
  Box object;
  int object_class = 1;
  double human_score = 1.0;
  double object_score = 1.0;
  Pose pose;
};

struct GroundTruthPair {
  Box human;
  Box object;
  int object_class = 1;
};

// Throws std::domain_error on a box with zero or negative area.
double iou(const Box& a, const Box& b);

Box union_box(const Box& a, const Box& b);

// Square boxes of side gamma * human.height() centred on each joint. With an
// extent, boxes are clipped to [0, width] x [0, height]; a box that clips to
// nothing collapses to a one-pixel box at the nearest border.
std::array<Box, kNumKeypoints> part_boxes(
    const Pose& pose, const Box& human, double gamma,
    std::optional<ImageExtent> extent = std::nullopt);

// Picks the not-yet-taken ground truth maximising min(human IoU, object IoU)
// among those where both IoUs reach `thr`. `taken` may be empty (nothing
// taken) or have one entry per ground truth. Ties go to the lower index.
std::optional<std::size_t> match_pair(const Box& human, const Box& object,
                                      std::span<const GroundTruthPair> gts,
                                      double thr,
                                      const std::vector<bool>& taken = {});

inline std::optional<std::size_t> match_pair(
    const HOIProposal& pred, std::span<const GroundTruthPair> gts, double thr,
    const std::vector<bool>& taken = {}) {
  return match_pair(pred.human, pred.object, gts, thr, taken);
}

}  // namespace pmf

#endif  // PMF_GEOMETRY_HPP_
