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
#include "pmf/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <numeric>
#include <set>
#include <sstream>
#include <stdexcept>

namespace pmf {
namespace {

using nlohmann::json;

json box_json(const Box& b) { return json::array({b.x1, b.y1, b.x2, b.y2}); }

Box box_from(const json& j) {
  if (!j.is_array() || j.size() != 4) throw std::invalid_argument("box must be [x1, y1, x2, y2]");
  return {j[0].get<double>(), j[1].get<double>(), j[2].get<double>(), j[3].get<double>()};
}

template <typename T, typename Parse>
std::vector<T> read_jsonl(const std::filesystem::path& path, Parse parse) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read " + path.string());
  std::vector<T> out;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      out.push_back(parse(json::parse(line)));
    } catch (const std::exception& e) {
      throw std::invalid_argument(path.string() + ":" + std::to_string(line_no) + ": " + e.what());
    }
  }
  return out;
}

template <typename T>
void write_jsonl(const std::filesystem::path& path, std::span<const T> records) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  for (const T& r : records) out << to_json(r).dump() << '\n';
}

std::string action_name(const Dataset* ds, int action) {
  if (ds != nullptr && action >= 0 && action < ds->num_actions()) {
    return ds->actions[static_cast<std::size_t>(action)].name;
  }
  return "action_" + std::to_string(action);
}

std::string format_value(const std::optional<double>& v) {
  if (!v) return "undefined";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4f", *v);
  return buf;
}

}  // namespace

double average_precision(std::span<const PrPoint> curve) {
  std::vector<double> best(curve.size() + 1, 0.0);
  for (std::size_t k = curve.size(); k-- > 0;) best[k] = std::max(best[k + 1], curve[k].precision);
  double ap = 0.0;
  double prev_recall = 0.0;
  for (std::size_t k = 0; k < curve.size(); ++k) {
    ap += (curve[k].recall - prev_recall) * best[k];
    prev_recall = curve[k].recall;
  }
  return ap;
}

EvalReport evaluate(std::span<const Detection> detections,
                    std::span<const GroundTruthRecord> ground_truth, const EvalOptions& options) {
  if (!(options.iou_threshold > 0.0 && options.iou_threshold <= 1.0)) {
    throw std::invalid_argument("evaluate: IoU threshold must lie in (0, 1]");
  }
  int num_actions = options.num_actions;
  if (num_actions <= 0) {
    for (const auto& d : detections) num_actions = std::max(num_actions, d.action + 1);
    for (const auto& g : ground_truth) num_actions = std::max(num_actions, g.action + 1);
  }
  for (const auto& d : detections) {
    if (d.action < 0 || d.action >= num_actions) throw std::out_of_range("detection action id");
    if (!std::isfinite(d.score)) throw std::invalid_argument("detection score is not finite");
  }
  for (const auto& g : ground_truth) {
    if (g.action < 0 || g.action >= num_actions) throw std::out_of_range("ground truth action id");
  }

  EvalReport report;
  double sum = 0.0;
  int defined = 0;
  for (int a = 0; a < num_actions; ++a) {
    ActionResult res;
    res.action = a;
    // Ground truth of this action, grouped by image.
    std::map<int, std::vector<GroundTruthPair>> gts;
    for (const auto& g : ground_truth) {
      if (g.action != a) continue;
      gts[g.image_id].push_back({g.human, g.object, g.object_class});
      ++res.num_ground_truth;
    }
    std::vector<std::size_t> order;
    for (std::size_t i = 0; i < detections.size(); ++i) {
      if (detections[i].action == a) order.push_back(i);
    }
    std::stable_sort(order.begin(), order.end(), [&](std::size_t l, std::size_t r) {
      const Detection& dl = detections[l];
      const Detection& dr = detections[r];
      if (dl.score != dr.score) return dl.score > dr.score;
      return dl.image_id < dr.image_id;
    });
    res.num_detections = static_cast<int>(order.size());

    std::map<int, std::vector<bool>> taken;
    int tp = 0, fp = 0;
    for (std::size_t idx : order) {
      const Detection& d = detections[idx];
      bool hit = false;
      auto it = gts.find(d.image_id);
      if (it != gts.end()) {
        std::vector<bool>& used = taken[d.image_id];
        used.resize(it->second.size(), false);
        std::vector<bool> blocked = used;
        if (options.require_object_class) {
          for (std::size_t g = 0; g < it->second.size(); ++g) {
            if (it->second[g].object_class != d.object_class) blocked[g] = true;
          }
        }
        const auto m = match_pair(d.human, d.object, it->second, options.iou_threshold, blocked);
        if (m) {
          used[*m] = true;
          hit = true;
        }
      }
      hit ? ++tp : ++fp;
      if (res.num_ground_truth > 0) {
        res.curve.push_back({d.score, static_cast<double>(tp) / res.num_ground_truth,
                             static_cast<double>(tp) / (tp + fp)});
      }
    }
    res.true_positives = tp;
    if (res.num_ground_truth > 0) {
      res.ap = average_precision(res.curve);
      sum += *res.ap;
      ++defined;
    } else {
      report.notices.push_back("action " + std::to_string(a) +
                               " has no ground truth; AP undefined and excluded from mAP");
    }
    report.actions.push_back(std::move(res));
  }
  if (defined > 0) {
    report.map = sum / defined;
  } else {
    report.notices.push_back("no ground truth interactions; mAP undefined");
  }
  return report;
}

std::vector<SplitResult> split_report(const EvalReport& report,
                                      std::span<const ActionGroup> groups) {
  std::set<int> seen;
  for (const auto& g : groups) {
    for (int a : g.actions) {
      if (a < 0 || a >= static_cast<int>(report.actions.size())) {
        throw std::invalid_argument("split '" + g.name + "' names unknown action " +
                                    std::to_string(a));
      }
      if (!seen.insert(a).second) {
        throw std::invalid_argument("action " + std::to_string(a) + " appears in two groups");
      }
    }
  }
  if (seen.size() != report.actions.size()) {
    throw std::invalid_argument("groups do not cover every action");
  }
  std::vector<SplitResult> out;
  for (const auto& g : groups) {
    double sum = 0.0;
    int n = 0;
    for (int a : g.actions) {
      const auto& ap = report.actions[static_cast<std::size_t>(a)].ap;
      if (ap) {
        sum += *ap;
        ++n;
      }
    }
    out.push_back({g.name, n > 0 ? std::optional<double>(sum / n) : std::nullopt});
  }
  return out;
}

json report_to_json(const EvalReport& report, const Dataset* ds,
                    std::span<const SplitResult> splits) {
  json actions = json::array();
  for (const auto& a : report.actions) {
    json curve = json::array();
    for (const auto& p : a.curve) curve.push_back({p.score, p.recall, p.precision});
    actions.push_back({{"action_id", a.action},
                       {"name", action_name(ds, a.action)},
                       {"ground_truth", a.num_ground_truth},
                       {"detections", a.num_detections},
                       {"true_positives", a.true_positives},
                       {"ap", a.ap ? json(*a.ap) : json()},
                       {"pr_curve", curve}});
  }
  json split_json = json::array();
  for (const auto& s : splits) {
    split_json.push_back({{"name", s.name}, {"map", s.map ? json(*s.map) : json()}});
  }
  return {{"map", report.map ? json(*report.map) : json()},
          {"actions", actions},
          {"splits", split_json},
          {"notices", report.notices}};
}

std::string report_table(const EvalReport& report, const Dataset* ds,
                         std::span<const SplitResult> splits) {
  std::ostringstream out;
  char line[160];
  std::snprintf(line, sizeof line, "%-20s %6s %6s %6s %10s\n", "action", "gt", "dets", "tp", "AP");
  out << line;
  for (const auto& a : report.actions) {
    std::snprintf(line, sizeof line, "%-20s %6d %6d %6d %10s\n", action_name(ds, a.action).c_str(),
                  a.num_ground_truth, a.num_detections, a.true_positives,
                  format_value(a.ap).c_str());
    out << line;
  }
  std::snprintf(line, sizeof line, "%-20s %30s\n", "mAP", format_value(report.map).c_str());
  out << line;
  for (const auto& s : splits) {
    std::snprintf(line, sizeof line, "%-20s %30s\n", ("mAP[" + s.name + "]").c_str(),
                  format_value(s.map).c_str());
    out << line;
  }
  for (const auto& n : report.notices) out << "note: " << n << '\n';
  return out.str();
}

std::vector<GroundTruthRecord> ground_truth_records(const Dataset& ds) {
  std::vector<GroundTruthRecord> out;
  for (const ImageRecord& img : ds.images) {
    for (const LabeledPair& p : ground_truth_pairs(ds, img.id)) {
      for (int a : p.actions) {
        out.push_back({img.id, p.pair.human, p.pair.object, p.pair.object_class, a});
      }
    }
  }
  return out;
}

json to_json(const Detection& d) {
  return {{"image_id", d.image_id},     {"human_box", box_json(d.human)},
          {"object_box", box_json(d.object)}, {"object_class", d.object_class},
          {"action_id", d.action},      {"score", d.score}};
}

json to_json(const GroundTruthRecord& g) {
  return {{"image_id", g.image_id},
          {"human_box", box_json(g.human)},
          {"object_box", box_json(g.object)},
          {"object_class", g.object_class},
          {"action_id", g.action}};
}

void write_detections(const std::filesystem::path& path, std::span<const Detection> dets) {
  write_jsonl(path, dets);
}

std::vector<Detection> read_detections(const std::filesystem::path& path) {
  return read_jsonl<Detection>(path, [](const json& j) {
    return Detection{j.at("image_id").get<int>(),      box_from(j.at("human_box")),
                     box_from(j.at("object_box")),     j.at("object_class").get<int>(),
                     j.at("action_id").get<int>(),     j.at("score").get<double>()};
  });
}

void write_ground_truth(const std::filesystem::path& path,
                        std::span<const GroundTruthRecord> gts) {
  write_jsonl(path, gts);
}

std::vector<GroundTruthRecord> read_ground_truth(const std::filesystem::path& path) {
  return read_jsonl<GroundTruthRecord>(path, [](const json& j) {
    return GroundTruthRecord{j.at("image_id").get<int>(), box_from(j.at("human_box")),
                             box_from(j.at("object_box")), j.at("object_class").get<int>(),
                             j.at("action_id").get<int>()};
  });
}

}  // namespace pmf
