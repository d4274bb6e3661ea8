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
#include "pmf/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <random>

namespace pmf {
namespace {

using nlohmann::json;
using Rng = std::mt19937_64;

constexpr double kDegree = std::numbers::pi / 180.0;

double uniform(Rng& rng, double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}
double uniform(Rng& rng, const Range& r) { return uniform(rng, r.first, r.second); }
int uniform_int(Rng& rng, int lo, int hi) {
  return std::uniform_int_distribution<int>(lo, hi)(rng);
}

struct Figure {
  Pose pose;
  Box box;
};

// Upright figure with its head top at (0, 0); the box is derived from the
// joints with a margin for the drawn limbs and head.
Figure make_figure(Rng& rng, double h, const SyntheticSpec& spec) {
  Pose p;
  const double head_y = 0.08 * h;
  const double facing = uniform(rng, -1.0, 1.0) * 0.015 * h;
  p[0] = {facing, head_y + 0.01 * h, 1.0};
  p[1] = {0.025 * h + facing, head_y - 0.01 * h, 1.0};
  p[2] = {-0.025 * h + facing, head_y - 0.01 * h, 1.0};
  p[3] = {0.05 * h, head_y, 1.0};
  p[4] = {-0.05 * h, head_y, 1.0};
  const double shoulder_w = uniform(rng, 0.20, 0.26) * h;
  const double hip_w = uniform(rng, 0.14, 0.18) * h;
  p[5] = {0.5 * shoulder_w, 0.19 * h, 1.0};
  p[6] = {-0.5 * shoulder_w, 0.19 * h, 1.0};
  p[11] = {0.5 * hip_w, 0.50 * h, 1.0};
  p[12] = {-0.5 * hip_w, 0.50 * h, 1.0};

  // side +1 is the figure's left (image right), -1 its right.
  for (int side : {+1, -1}) {
    const int shoulder = side > 0 ? 5 : 6, elbow = side > 0 ? 7 : 8, wrist = side > 0 ? 9 : 10;
    const int hip = side > 0 ? 11 : 12, knee = side > 0 ? 13 : 14, ankle = side > 0 ? 15 : 16;
    const double a1 = uniform(rng, -20.0, 160.0) * kDegree;
    const double a2 = a1 + uniform(rng, 0.0, 110.0) * kDegree;
    const double l1 = uniform(rng, spec.upper_arm) * h, l2 = uniform(rng, spec.forearm) * h;
    p[elbow] = {p[shoulder].x + side * l1 * std::sin(a1), p[shoulder].y + l1 * std::cos(a1), 1.0};
    p[wrist] = {p[elbow].x + side * l2 * std::sin(a2), p[elbow].y + l2 * std::cos(a2), 1.0};
    const double b1 = uniform(rng, -5.0, 40.0) * kDegree;
    const double b2 = b1 + uniform(rng, -40.0, 40.0) * kDegree;
    const double l3 = uniform(rng, spec.thigh) * h, l4 = uniform(rng, spec.shin) * h;
    p[knee] = {p[hip].x + side * l3 * std::sin(b1), p[hip].y + l3 * std::cos(b1), 1.0};
    p[ankle] = {p[knee].x + side * l4 * std::sin(b2), p[knee].y + l4 * std::cos(b2), 1.0};
  }

  Figure f;
  f.pose = p;
  double x1 = 1e300, x2 = -1e300, y2 = -1e300;
  for (const auto& j : p.joints) {
    x1 = std::min(x1, j.x);
    x2 = std::max(x2, j.x);
    y2 = std::max(y2, j.y);
  }
  const double pad = 0.04 * h;
  f.box = {x1 - pad, 0.0, x2 + pad, y2 + pad};
  return f;
}

bool inside_image(const Box& b, const SyntheticSpec& spec) {
  return b.x1 >= 0.0 && b.y1 >= 0.0 && b.x2 <= spec.image_width && b.y2 <= spec.image_height;
}

double distance(double ax, double ay, double bx, double by) {
  return std::hypot(ax - bx, ay - by);
}

struct PlacedObject {
  double cx, cy, radius;
  int category;
};

// Sorted distances from (cx, cy) to each bound anchor of `pose`.
std::vector<std::pair<double, int>> anchor_distances(const Pose& pose, double cx, double cy,
                                                     const SyntheticSpec& spec) {
  std::vector<std::pair<double, int>> d;
  for (std::size_t a = 0; a < spec.actions.size(); ++a) {
    const Joint& j = pose[spec.actions[a].anchor_joint];
    d.emplace_back(distance(j.x, j.y, cx, cy), static_cast<int>(a));
  }
  std::sort(d.begin(), d.end());
  return d;
}

Box jitter_box(Rng& rng, const Box& b, double amount, const SyntheticSpec& spec) {
  if (amount <= 0.0) return b;
  const double w = b.width(), h = b.height();
  Box out{b.x1 + uniform(rng, -amount, amount) * w, b.y1 + uniform(rng, -amount, amount) * h,
          b.x2 + uniform(rng, -amount, amount) * w, b.y2 + uniform(rng, -amount, amount) * h};
  out.x1 = std::clamp(out.x1, 0.0, static_cast<double>(spec.image_width) - 1.0);
  out.y1 = std::clamp(out.y1, 0.0, static_cast<double>(spec.image_height) - 1.0);
  out.x2 = std::clamp(out.x2, out.x1 + 1.0, static_cast<double>(spec.image_width));
  out.y2 = std::clamp(out.y2, out.y1 + 1.0, static_cast<double>(spec.image_height));
  return out;
}

Range range_from_json(const json& j, const Range& fallback) {
  if (j.is_null()) return fallback;
  if (!j.is_array() || j.size() != 2) throw GenerationError("range must be [lo, hi]");
  return {j[0].get<double>(), j[1].get<double>()};
}

}  // namespace

void SyntheticSpec::validate() const {
  auto require = [](bool ok, const std::string& what) {
    if (!ok) throw GenerationError("synthetic spec: " + what);
  };
  auto ordered = [](const Range& r) { return r.first > 0.0 && r.first <= r.second; };
  require(image_width >= 16 && image_height >= 16, "image size must be >= 16");
  require(image_width % 4 == 0 && image_height % 4 == 0, "image size must be a multiple of 4");
  require(num_images >= 0, "num_images must be >= 0");
  require(!object_classes.empty(), "need at least one object class");
  require(!actions.empty(), "need at least one action");
  for (const auto& a : actions) {
    require(a.anchor_joint >= 0 && a.anchor_joint < kNumKeypoints,
            "action '" + a.name + "' must bind exactly one valid anchor joint");
  }
  for (std::size_t i = 0; i < actions.size(); ++i) {
    for (std::size_t j = i + 1; j < actions.size(); ++j) {
      require(actions[i].anchor_joint != actions[j].anchor_joint,
              "actions must bind distinct anchor joints");
    }
  }
  require(humans_per_image.first >= 1 && humans_per_image.first <= humans_per_image.second,
          "humans_per_image");
  require(objects_per_image.first >= 0 && objects_per_image.first <= objects_per_image.second,
          "objects_per_image");
  require(positive_fraction >= 0.0 && positive_fraction <= 1.0, "positive_fraction");
  require(ordered(human_height) && ordered(object_radius), "height/radius ranges");
  require(ordered(upper_arm) && ordered(forearm) && ordered(thigh) && ordered(shin),
          "limb ranges");
  require(proximity_radius > 0.0, "proximity_radius");
  require(box_jitter >= 0.0 && box_jitter < 0.5, "box_jitter");
  require(pose_noise >= 0.0, "pose_noise");
  require(score_range.first >= 0.0 && score_range.first <= score_range.second &&
              score_range.second <= 1.0,
          "score_range");
  require(max_retries >= 1, "max_retries");
}

SyntheticSpec synthetic_spec_from_json(const json& j) {
  SyntheticSpec s;
  try {
    s.image_width = j.value("image_width", s.image_width);
    s.image_height = j.value("image_height", s.image_height);
    s.num_images = j.value("num_images", s.num_images);
    s.seed = j.value("seed", s.seed);
    if (j.contains("object_classes")) s.object_classes = j["object_classes"].get<std::vector<std::string>>();
    if (j.contains("actions")) {
      s.actions.clear();
      for (const auto& a : j["actions"]) {
        const std::string anchor = a.at("anchor").get<std::string>();
        const int idx = keypoint_index(anchor);
        if (idx < 0) throw GenerationError("unknown anchor joint '" + anchor + "'");
        s.actions.push_back({a.at("name").get<std::string>(), idx});
      }
    }
    if (j.contains("humans_per_image")) s.humans_per_image = j["humans_per_image"].get<std::pair<int, int>>();
    if (j.contains("objects_per_image")) s.objects_per_image = j["objects_per_image"].get<std::pair<int, int>>();
    s.positive_fraction = j.value("positive_fraction", s.positive_fraction);
    s.human_height = range_from_json(j.value("human_height", json()), s.human_height);
    s.object_radius = range_from_json(j.value("object_radius", json()), s.object_radius);
    s.proximity_radius = j.value("proximity_radius", s.proximity_radius);
    s.box_jitter = j.value("box_jitter", s.box_jitter);
    s.pose_noise = j.value("pose_noise", s.pose_noise);
    s.score_range = range_from_json(j.value("score_range", json()), s.score_range);
    s.max_retries = j.value("max_retries", s.max_retries);
    s.upper_arm = range_from_json(j.value("upper_arm", json()), s.upper_arm);
    s.forearm = range_from_json(j.value("forearm", json()), s.forearm);
    s.thigh = range_from_json(j.value("thigh", json()), s.thigh);
    s.shin = range_from_json(j.value("shin", json()), s.shin);
  } catch (const json::exception& e) {
    throw GenerationError(std::string("synthetic spec: ") + e.what());
  }
  s.validate();
  return s;
}

json synthetic_spec_to_json(const SyntheticSpec& s) {
  json actions = json::array();
  for (const auto& a : s.actions) {
    actions.push_back({{"name", a.name}, {"anchor", std::string(keypoint_name(a.anchor_joint))}});
  }
  auto range = [](const Range& r) { return json::array({r.first, r.second}); };
  return {{"image_width", s.image_width},
          {"image_height", s.image_height},
          {"num_images", s.num_images},
          {"seed", s.seed},
          {"object_classes", s.object_classes},
          {"actions", actions},
          {"humans_per_image", s.humans_per_image},
          {"objects_per_image", s.objects_per_image},
          {"positive_fraction", s.positive_fraction},
          {"human_height", range(s.human_height)},
          {"object_radius", range(s.object_radius)},
          {"proximity_radius", s.proximity_radius},
          {"box_jitter", s.box_jitter},
          {"pose_noise", s.pose_noise},
          {"score_range", range(s.score_range)},
          {"max_retries", s.max_retries},
          {"upper_arm", range(s.upper_arm)},
          {"forearm", range(s.forearm)},
          {"thigh", range(s.thigh)},
          {"shin", range(s.shin)}};
}

SyntheticSpec load_synthetic_spec(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw GenerationError("cannot read synthetic spec " + path.string());
  json j;
  try {
    in >> j;
  } catch (const json::parse_error& e) {
    throw GenerationError(std::string("synthetic spec: ") + e.what());
  }
  return synthetic_spec_from_json(j);
}

int nearest_anchor_action(const Pose& pose, double human_height, const Box& object,
                          const SyntheticSpec& spec) {
  const auto d = anchor_distances(pose, object.center_x(), object.center_y(), spec);
  if (d.empty() || d.front().first >= spec.proximity_radius * human_height) return -1;
  return d.front().second;
}

Dataset generate_synthetic(const SyntheticSpec& spec) {
  spec.validate();
  Rng rng(spec.seed);
  Dataset ds;
  for (std::size_t c = 0; c < spec.object_classes.size(); ++c) {
    ds.object_categories.push_back({static_cast<int>(c) + 1, spec.object_classes[c]});
  }
  for (std::size_t a = 0; a < spec.actions.size(); ++a) {
    ds.actions.push_back({static_cast<int>(a), spec.actions[a].name});
  }
  int next_human = 0, next_object = 0;

  for (int image_id = 0; image_id < spec.num_images; ++image_id) {
    bool placed = false;
    for (int attempt = 0; attempt < spec.max_retries && !placed; ++attempt) {
      // Humans.
      const int n_humans = uniform_int(rng, spec.humans_per_image.first, spec.humans_per_image.second);
      std::vector<Figure> figures;
      bool ok = true;
      for (int i = 0; i < n_humans && ok; ++i) {
        ok = false;
        for (int t = 0; t < spec.max_retries && !ok; ++t) {
          Figure f = make_figure(rng, uniform(rng, spec.human_height), spec);
          const double dx = uniform(rng, -f.box.x1, spec.image_width - f.box.x2);
          const double dy = uniform(rng, -f.box.y1, spec.image_height - f.box.y2);
          if (!(f.box.x2 - f.box.x1 < spec.image_width && f.box.y2 - f.box.y1 < spec.image_height)) continue;
          f.box = f.box.translated(dx, dy);
          f.pose = f.pose.translated(dx, dy);
          if (!inside_image(f.box, spec)) continue;
          const bool clear = std::all_of(figures.begin(), figures.end(), [&](const Figure& g) {
            return iou(g.box, f.box) < 0.2;
          });
          if (clear) {
            figures.push_back(f);
            ok = true;
          }
        }
      }
      if (!ok) continue;

      // Objects: bound to an anchor of one figure, or clear of every anchor.
      const int n_objects = uniform_int(rng, spec.objects_per_image.first, spec.objects_per_image.second);
      std::vector<PlacedObject> objects;
      for (int i = 0; i < n_objects && ok; ++i) {
        ok = false;
        const bool positive = uniform(rng, 0.0, 1.0) < spec.positive_fraction;
        const int target = uniform_int(rng, 0, n_humans - 1);
        const int action = uniform_int(rng, 0, static_cast<int>(spec.actions.size()) - 1);
        const int category = uniform_int(rng, 1, static_cast<int>(spec.object_classes.size()));
        for (int t = 0; t < spec.max_retries && !ok; ++t) {
          const Figure& f = figures[static_cast<std::size_t>(target)];
          const double h = f.box.height();
          const double radius = uniform(rng, spec.object_radius) * h;
          double cx, cy;
          if (positive) {
            const Joint& anchor = f.pose[spec.actions[static_cast<std::size_t>(action)].anchor_joint];
            const double r = std::sqrt(uniform(rng, 0.0, 1.0)) * 0.3 * spec.proximity_radius * h;
            const double phi = uniform(rng, 0.0, 2.0 * std::numbers::pi);
            cx = anchor.x + r * std::cos(phi);
            cy = anchor.y + r * std::sin(phi);
          } else {
            cx = uniform(rng, radius, spec.image_width - radius);
            cy = uniform(rng, radius, spec.image_height - radius);
          }
          const Box box{cx - radius, cy - radius, cx + radius, cy + radius};
          if (!inside_image(box, spec)) continue;
          bool valid = true;
          for (int j = 0; j < n_humans && valid; ++j) {
            const Figure& g = figures[static_cast<std::size_t>(j)];
            const double rr = spec.proximity_radius * g.box.height();
            const auto d = anchor_distances(g.pose, cx, cy, spec);
            if (positive && j == target) {
              valid = d[0].second == action && d[0].first < 0.5 * rr &&
                      (d.size() < 2 || d[1].first >= 1.5 * rr);
            } else {
              valid = d[0].first >= 1.5 * rr;
            }
          }
          for (const auto& o : objects) {
            if (distance(o.cx, o.cy, cx, cy) < o.radius + radius + 1.0) valid = false;
          }
          if (valid) {
            objects.push_back({cx, cy, radius, category});
            ok = true;
          }
        }
      }
      if (!ok) continue;

      // Commit.
      ImageRecord img;
      img.id = image_id;
      img.width = spec.image_width;
      img.height = spec.image_height;
      img.procedural_seed = rng();
      ds.images.push_back(img);
      std::vector<int> human_ids, object_ids;
      for (const Figure& f : figures) {
        HumanRecord h;
        h.id = next_human++;
        h.image_id = image_id;
        h.box = f.box;
        h.det_box = jitter_box(rng, f.box, spec.box_jitter, spec);
        h.score = uniform(rng, spec.score_range.first, spec.score_range.second);
        h.pose = f.pose;
        if (spec.pose_noise > 0.0) {
          std::normal_distribution<double> noise(0.0, spec.pose_noise);
          for (auto& j : h.pose.joints) {
            j.x += noise(rng);
            j.y += noise(rng);
          }
          h.true_pose = f.pose;
        }
        human_ids.push_back(h.id);
        ds.humans.push_back(h);
      }
      for (const PlacedObject& o : objects) {
        ObjectRecord rec;
        rec.id = next_object++;
        rec.image_id = image_id;
        rec.category = o.category;
        rec.box = {o.cx - o.radius, o.cy - o.radius, o.cx + o.radius, o.cy + o.radius};
        rec.det_box = jitter_box(rng, rec.box, spec.box_jitter, spec);
        rec.score = uniform(rng, spec.score_range.first, spec.score_range.second);
        object_ids.push_back(rec.id);
        ds.objects.push_back(rec);
      }
      for (std::size_t hi = 0; hi < figures.size(); ++hi) {
        for (std::size_t oi = 0; oi < objects.size(); ++oi) {
          const Box& ob = ds.objects[ds.objects.size() - objects.size() + oi].box;
          const int action =
              nearest_anchor_action(figures[hi].pose, figures[hi].box.height(), ob, spec);
          if (action >= 0) ds.interactions.push_back({human_ids[hi], object_ids[oi], {action}});
        }
      }
      placed = true;
    }
    if (!placed) {
      throw GenerationError("could not lay out image " + std::to_string(image_id) + " within " +
                            std::to_string(spec.max_retries) + " attempts");
    }
  }
  validate_dataset(ds);
  return ds;
}

Rgb object_class_color(int category) {
  static const Rgb kPalette[] = {{0.90f, 0.10f, 0.10f}, {0.10f, 0.75f, 0.20f},
                                 {0.15f, 0.25f, 0.90f}, {0.90f, 0.80f, 0.10f},
                                 {0.70f, 0.15f, 0.80f}, {0.10f, 0.80f, 0.80f}};
  constexpr int n = static_cast<int>(std::size(kPalette));
  return kPalette[((category - 1) % n + n) % n];
}

Image render_image(const Dataset& ds, int image_id) {
  const ImageRecord& rec = ds.image(image_id);
  if (!rec.path.empty()) {
    Image img = read_png(rec.path);
    if (img.width != rec.width || img.height != rec.height) {
      throw std::runtime_error("image " + std::to_string(image_id) + ": size differs from record");
    }
    return img;
  }
  if (!rec.procedural_seed) throw std::runtime_error("image has no pixel source");
  Image img = make_image(rec.width, rec.height, {0.45f, 0.45f, 0.45f});
  Rng rng(*rec.procedural_seed);
  std::uniform_real_distribution<float> grain(-0.03f, 0.03f);
  for (Eigen::Index i = 0; i < img.data.size(); ++i) img.data.data()[i] += grain(rng);

  const Rgb skin = {0.95f, 0.80f, 0.65f};
  const Skeleton limbs = Skeleton::coco();
  for (const auto& h : ds.humans) {
    if (h.image_id != image_id) continue;
    const Pose& p = h.true_pose ? *h.true_pose : h.pose;
    const double height = h.box.height();
    const double thickness = std::max(2.0, 0.035 * height);
    for (const auto& [a, b] : limbs.edges) {
      draw_line(img, p[a].x, p[a].y, p[b].x, p[b].y, thickness, skin);
    }
    const double hx = (p[0].x + p[3].x + p[4].x) / 3.0;
    const double hy = (p[0].y + p[3].y + p[4].y) / 3.0;
    fill_circle(img, hx, hy, 0.07 * height, skin);
  }
  for (const auto& o : ds.objects) {
    if (o.image_id != image_id) continue;
    fill_circle(img, o.box.center_x(), o.box.center_y(), 0.5 * o.box.width(),
                object_class_color(o.category));
  }
  return img;
}

}  // namespace pmf
