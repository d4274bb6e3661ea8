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
#include "pmf/geometry.hpp"

#include <algorithm>
#include <tuple>
#include <utility>
#include <cmath>
#include <stdexcept>
#include <string>

namespace pmf {
namespace {

constexpr std::array<std::string_view, kNumKeypoints> kKeypointNames = {
    "nose",           "left_eye",      "right_eye",  "left_ear",
    "right_ear",      "left_shoulder", "right_shoulder", "left_elbow",
    "right_elbow",    "left_wrist",    "right_wrist", "left_hip",
    "right_hip",      "left_knee",     "right_knee", "left_ankle",
    "right_ankle"};

void require_valid(const Box& b, const char* what) {
  if (!b.valid()) {
    throw std::domain_error(std::string(what) + ": degenerate or non-finite box");
  }
}

// Clips [lo, hi] to [0, limit]; an empty result becomes a unit interval at
// the nearest border.
std::pair<double, double> clip_interval(double lo, double hi, double limit) {
  const double a = std::max(lo, 0.0);
  const double b = std::min(hi, limit);
  if (b > a) return {a, b};
  if (lo >= limit) return {std::max(limit - 1.0, 0.0), limit};
  return {0.0, std::min(1.0, limit)};
}

}  // namespace

bool Box::valid() const {
  return std::isfinite(x1) && std::isfinite(y1) && std::isfinite(x2) &&
         std::isfinite(y2) && x2 > x1 && y2 > y1;
}

std::string_view keypoint_name(int index) {
  if (index < 0 || index >= kNumKeypoints) {
    throw std::out_of_range("keypoint index " + std::to_string(index));
  }
  return kKeypointNames[static_cast<std::size_t>(index)];
}

int keypoint_index(std::string_view name) {
  const auto it = std::find(kKeypointNames.begin(), kKeypointNames.end(), name);
  return it == kKeypointNames.end()
             ? -1
             : static_cast<int>(it - kKeypointNames.begin());
}

Pose Pose::translated(double dx, double dy) const {
  Pose out = *this;
  for (auto& j : out.joints) {
    j.x += dx;
    j.y += dy;
  }
  return out;
}

Pose Pose::scaled(double s) const {
  Pose out = *this;
  for (auto& j : out.joints) {
    j.x *= s;
    j.y *= s;
  }
  return out;
}

double iou(const Box& a, const Box& b) {
  require_valid(a, "iou");
  require_valid(b, "iou");
  const double iw = std::min(a.x2, b.x2) - std::max(a.x1, b.x1);
  const double ih = std::min(a.y2, b.y2) - std::max(a.y1, b.y1);
  if (iw <= 0.0 || ih <= 0.0) return 0.0;
  const double inter = iw * ih;
  return inter / (a.area() + b.area() - inter);
}

Box union_box(const Box& a, const Box& b) {
  require_valid(a, "union_box");
  require_valid(b, "union_box");
  return {std::min(a.x1, b.x1), std::min(a.y1, b.y1), std::max(a.x2, b.x2),
          std::max(a.y2, b.y2)};
}

std::array<Box, kNumKeypoints> part_boxes(const Pose& pose, const Box& human,
                                          double gamma,
                                          std::optional<ImageExtent> extent) {
  if (!(gamma > 0.0)) throw std::domain_error("part_boxes: gamma must be > 0");
  if (!(human.height() > 0.0) || !std::isfinite(human.height())) {
    throw std::domain_error("part_boxes: human box height must be > 0");
  }
  const double half = 0.5 * gamma * human.height();
  std::array<Box, kNumKeypoints> boxes;
  for (int k = 0; k < kNumKeypoints; ++k) {
    const Joint& j = pose[k];
    Box b{j.x - half, j.y - half, j.x + half, j.y + half};
    if (extent) {
      std::tie(b.x1, b.x2) = clip_interval(b.x1, b.x2, extent->width);
      std::tie(b.y1, b.y2) = clip_interval(b.y1, b.y2, extent->height);
    }
    boxes[static_cast<std::size_t>(k)] = b;
  }
  return boxes;
}

std::optional<std::size_t> match_pair(const Box& human, const Box& object,
                                      std::span<const GroundTruthPair> gts,
                                      double thr,
                                      const std::vector<bool>& taken) {
  std::optional<std::size_t> best;
  double best_overlap = -1.0;
  for (std::size_t g = 0; g < gts.size(); ++g) {
    if (!taken.empty() && taken[g]) continue;
    const double ih = iou(human, gts[g].human);
    const double io = iou(object, gts[g].object);
    if (ih < thr || io < thr) continue;
    const double overlap = std::min(ih, io);
    if (overlap > best_overlap) {
      best_overlap = overlap;
      best = g;
    }
  }
  return best;
}

}  // namespace pmf
