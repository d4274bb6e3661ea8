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
#include "pmf/dataset.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

namespace pmf {
namespace {

using nlohmann::json;

std::string join_problems(const std::vector<std::string>& problems) {
  std::ostringstream os;
  os << problems.size() << " schema problem(s)";
  for (const auto& p : problems) os << "\n  " << p;
  return os.str();
}

json box_to_json(const Box& b) { return json::array({b.x1, b.y1, b.x2, b.y2}); }

Box box_from_json(const json& j) {
  if (!j.is_array() || j.size() != 4) throw std::invalid_argument("box must be [x1, y1, x2, y2]");
  return {j[0].get<double>(), j[1].get<double>(), j[2].get<double>(), j[3].get<double>()};
}

json pose_to_json(const Pose& p) {
  json out = json::array();
  for (const auto& jt : p.joints) out.push_back(json::array({jt.x, jt.y, jt.confidence}));
  return out;
}

Pose pose_from_json(const json& j) {
  if (!j.is_array()) throw std::invalid_argument("pose must be an array of joints");
  if (j.size() != static_cast<std::size_t>(kNumKeypoints)) {
    throw std::invalid_argument("pose has " + std::to_string(j.size()) + " joints, expected " +
                                std::to_string(kNumKeypoints));
  }
  Pose p;
  for (int k = 0; k < kNumKeypoints; ++k) {
    const json& e = j[static_cast<std::size_t>(k)];
    if (!e.is_array() || e.size() < 2 || e.size() > 3) {
      throw std::invalid_argument("joint must be [x, y] or [x, y, confidence]");
    }
    p[k].x = e[0].get<double>();
    p[k].y = e[1].get<double>();
    p[k].confidence = e.size() == 3 ? e[2].get<double>() : 1.0;
  }
  return p;
}

bool inside(const Box& b, const ImageRecord& img) {
  return b.x1 >= 0.0 && b.y1 >= 0.0 && b.x2 <= img.width && b.y2 <= img.height;
}

// Parses each element of `arr` with `parse`, recording failures by position.
template <typename T, typename F>
std::vector<T> parse_records(const json& root, const char* key, F parse,
                             std::vector<std::string>& problems) {
  std::vector<T> out;
  if (!root.contains(key)) return out;
  const json& arr = root.at(key);
  if (!arr.is_array()) {
    problems.push_back(std::string("'") + key + "' must be an array");
    return out;
  }
  for (std::size_t i = 0; i < arr.size(); ++i) {
    const json& rec = arr[i];
    std::string label = std::string(key) + "[" + std::to_string(i) + "]";
    if (rec.is_object() && rec.contains("id")) {
      label = std::string(key) + " id " + rec["id"].dump();
    }
    try {
      out.push_back(parse(rec));
    } catch (const std::exception& e) {
      problems.push_back(label + ": " + e.what());
    }
  }
  return out;
}

}  // namespace

SchemaError::SchemaError(std::vector<std::string> problems)
    : std::runtime_error(join_problems(problems)), problems_(std::move(problems)) {}

const ImageRecord& Dataset::image(int id) const {
  for (const auto& img : images) {
    if (img.id == id) return img;
  }
  throw std::out_of_range("unknown image id " + std::to_string(id));
}

void validate_dataset(const Dataset& ds) {
  std::vector<std::string> problems;
  if (ds.version != kDatasetVersion) {
    problems.push_back("unsupported dataset version " + std::to_string(ds.version));
  }
  std::set<int> category_ids;
  for (const auto& c : ds.object_categories) {
    if (c.id < 1 || !category_ids.insert(c.id).second) {
      problems.push_back("category id " + std::to_string(c.id) + ": must be unique and >= 1");
    }
  }
  for (std::size_t a = 0; a < ds.actions.size(); ++a) {
    if (ds.actions[a].id != static_cast<int>(a)) {
      problems.push_back("action id " + std::to_string(ds.actions[a].id) +
                         ": actions must be numbered 0..A-1 in order");
    }
  }
  std::map<int, const ImageRecord*> images;
  for (const auto& img : ds.images) {
    const std::string tag = "image id " + std::to_string(img.id);
    if (!images.emplace(img.id, &img).second) problems.push_back(tag + ": duplicate id");
    if (img.width < 1 || img.height < 1) problems.push_back(tag + ": non-positive size");
    if (img.path.empty() && !img.procedural_seed) {
      problems.push_back(tag + ": needs a path or a procedural seed");
    }
  }
  auto check_box = [&](const std::string& tag, const char* which, const Box& b,
                       const ImageRecord* img, bool require_inside) {
    if (!b.valid()) {
      problems.push_back(tag + ": " + which + " is degenerate or non-finite");
    } else if (img != nullptr && require_inside && !inside(b, *img)) {
      problems.push_back(tag + ": " + which + " lies outside image " + std::to_string(img->id));
    }
  };
  std::map<int, int> human_image, object_image;
  for (const auto& h : ds.humans) {
    const std::string tag = "human id " + std::to_string(h.id);
    if (!human_image.emplace(h.id, h.image_id).second) problems.push_back(tag + ": duplicate id");
    const auto it = images.find(h.image_id);
    const ImageRecord* img = it == images.end() ? nullptr : it->second;
    if (img == nullptr) problems.push_back(tag + ": unknown image " + std::to_string(h.image_id));
    check_box(tag, "box", h.box, img, true);
    check_box(tag, "det_box", h.det_box, img, true);
    if (!(h.score >= 0.0 && h.score <= 1.0)) problems.push_back(tag + ": score outside [0, 1]");
    for (const auto& j : h.pose.joints) {
      if (!std::isfinite(j.x) || !std::isfinite(j.y) || !(j.confidence >= 0.0 && j.confidence <= 1.0)) {
        problems.push_back(tag + ": pose joint non-finite or confidence outside [0, 1]");
        break;
      }
    }
  }
  for (const auto& o : ds.objects) {
    const std::string tag = "object id " + std::to_string(o.id);
    if (!object_image.emplace(o.id, o.image_id).second) problems.push_back(tag + ": duplicate id");
    const auto it = images.find(o.image_id);
    const ImageRecord* img = it == images.end() ? nullptr : it->second;
    if (img == nullptr) problems.push_back(tag + ": unknown image " + std::to_string(o.image_id));
    check_box(tag, "box", o.box, img, true);
    check_box(tag, "det_box", o.det_box, img, true);
    if (!category_ids.contains(o.category)) {
      problems.push_back(tag + ": unknown category " + std::to_string(o.category));
    }
    if (!(o.score >= 0.0 && o.score <= 1.0)) problems.push_back(tag + ": score outside [0, 1]");
  }
  for (std::size_t i = 0; i < ds.interactions.size(); ++i) {
    const auto& r = ds.interactions[i];
    const std::string tag = "interaction " + std::to_string(i) + " (human " +
                            std::to_string(r.human_id) + ", object " +
                            std::to_string(r.object_id) + ")";
    const auto h = human_image.find(r.human_id);
    const auto o = object_image.find(r.object_id);
    if (h == human_image.end()) problems.push_back(tag + ": unknown human");
    if (o == object_image.end()) problems.push_back(tag + ": unknown object");
    if (h != human_image.end() && o != object_image.end() && h->second != o->second) {
      problems.push_back(tag + ": human and object belong to different images");
    }
    for (int a : r.actions) {
      if (a < 0 || a >= ds.num_actions()) {
        problems.push_back(tag + ": unknown action " + std::to_string(a));
      }
    }
  }
  if (!problems.empty()) throw SchemaError(std::move(problems));
}

json dataset_to_json(const Dataset& ds) {
  json j;
  j["version"] = ds.version;
  j["categories"] = json::array();
  for (const auto& c : ds.object_categories) j["categories"].push_back({{"id", c.id}, {"name", c.name}});
  j["actions"] = json::array();
  for (const auto& a : ds.actions) j["actions"].push_back({{"id", a.id}, {"name", a.name}});
  j["images"] = json::array();
  for (const auto& img : ds.images) {
    json r = {{"id", img.id}, {"width", img.width}, {"height", img.height}};
    if (!img.path.empty()) r["path"] = img.path;
    if (img.procedural_seed) r["procedural_seed"] = *img.procedural_seed;
    j["images"].push_back(std::move(r));
  }
  j["humans"] = json::array();
  for (const auto& h : ds.humans) {
    json r = {{"id", h.id},
              {"image_id", h.image_id},
              {"box", box_to_json(h.box)},
              {"det_box", box_to_json(h.det_box)},
              {"score", h.score},
              {"pose", pose_to_json(h.pose)}};
    if (h.true_pose) r["true_pose"] = pose_to_json(*h.true_pose);
    j["humans"].push_back(std::move(r));
  }
  j["objects"] = json::array();
  for (const auto& o : ds.objects) {
    j["objects"].push_back({{"id", o.id},
                            {"image_id", o.image_id},
                            {"category", o.category},
                            {"box", box_to_json(o.box)},
                            {"det_box", box_to_json(o.det_box)},
                            {"score", o.score}});
  }
  j["interactions"] = json::array();
  for (const auto& r : ds.interactions) {
    j["interactions"].push_back(
        {{"human_id", r.human_id}, {"object_id", r.object_id}, {"actions", r.actions}});
  }
  return j;
}

Dataset dataset_from_json(const json& j) {
  if (!j.is_object()) throw SchemaError({"dataset root must be a JSON object"});
  std::vector<std::string> problems;
  Dataset ds;
  if (!j.contains("version") || !j["version"].is_number_integer()) {
    throw SchemaError({"missing integer 'version'"});
  }
  ds.version = j["version"].get<int>();
  if (ds.version != kDatasetVersion) {
    throw SchemaError({"unsupported dataset version " + std::to_string(ds.version)});
  }
  auto parse_category = [](const json& r) {
    return Category{r.at("id").get<int>(), r.at("name").get<std::string>()};
  };
  ds.object_categories = parse_records<Category>(j, "categories", parse_category, problems);
  ds.actions = parse_records<Category>(j, "actions", parse_category, problems);
  ds.images = parse_records<ImageRecord>(
      j, "images",
      [](const json& r) {
        ImageRecord img;
        img.id = r.at("id").get<int>();
        img.width = r.at("width").get<int>();
        img.height = r.at("height").get<int>();
        if (r.contains("path")) img.path = r["path"].get<std::string>();
        if (r.contains("procedural_seed")) img.procedural_seed = r["procedural_seed"].get<std::uint64_t>();
        return img;
      },
      problems);
  ds.humans = parse_records<HumanRecord>(
      j, "humans",
      [](const json& r) {
        HumanRecord h;
        h.id = r.at("id").get<int>();
        h.image_id = r.at("image_id").get<int>();
        h.box = box_from_json(r.at("box"));
        h.det_box = r.contains("det_box") ? box_from_json(r["det_box"]) : h.box;
        h.score = r.value("score", 1.0);
        h.pose = pose_from_json(r.at("pose"));
        if (r.contains("true_pose")) h.true_pose = pose_from_json(r["true_pose"]);
        return h;
      },
      problems);
  ds.objects = parse_records<ObjectRecord>(
      j, "objects",
      [](const json& r) {
        ObjectRecord o;
        o.id = r.at("id").get<int>();
        o.image_id = r.at("image_id").get<int>();
        o.category = r.at("category").get<int>();
        o.box = box_from_json(r.at("box"));
        o.det_box = r.contains("det_box") ? box_from_json(r["det_box"]) : o.box;
        o.score = r.value("score", 1.0);
        return o;
      },
      problems);
  ds.interactions = parse_records<InteractionRecord>(
      j, "interactions",
      [](const json& r) {
        return InteractionRecord{r.at("human_id").get<int>(), r.at("object_id").get<int>(),
                                 r.at("actions").get<std::vector<int>>()};
      },
      problems);
  if (!problems.empty()) throw SchemaError(std::move(problems));
  validate_dataset(ds);
  return ds;
}

Dataset load_dataset(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw SchemaError({"cannot read dataset " + path.string()});
  json j;
  try {
    in >> j;
  } catch (const json::parse_error& e) {
    throw SchemaError({std::string("malformed JSON: ") + e.what()});
  }
  return dataset_from_json(j);
}

void save_dataset(const Dataset& ds, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write dataset " + path.string());
  out << dataset_to_json(ds).dump(1) << '\n';
  if (!out) throw std::runtime_error("write failed: " + path.string());
}

std::vector<HOIProposal> pair_proposals(const Dataset& ds, int image_id) {
  ds.image(image_id);
  std::vector<HOIProposal> out;
  for (const auto& h : ds.humans) {
    if (h.image_id != image_id) continue;
    for (const auto& o : ds.objects) {
      if (o.image_id != image_id) continue;
      out.push_back({h.det_box, o.det_box, o.category, h.score, o.score, h.pose});
    }
  }
  return out;
}

std::vector<std::pair<int, int>> proposal_ids(const Dataset& ds, int image_id) {
  std::vector<std::pair<int, int>> out;
  for (const auto& h : ds.humans) {
    if (h.image_id != image_id) continue;
    for (const auto& o : ds.objects) {
      if (o.image_id == image_id) out.emplace_back(h.id, o.id);
    }
  }
  return out;
}

std::vector<LabeledPair> ground_truth_pairs(const Dataset& ds, int image_id) {
  std::map<int, const HumanRecord*> humans;
  std::map<int, const ObjectRecord*> objects;
  for (const auto& h : ds.humans) {
    if (h.image_id == image_id) humans[h.id] = &h;
  }
  for (const auto& o : ds.objects) {
    if (o.image_id == image_id) objects[o.id] = &o;
  }
  std::vector<LabeledPair> out;
  for (const auto& r : ds.interactions) {
    const auto h = humans.find(r.human_id);
    const auto o = objects.find(r.object_id);
    if (h == humans.end() || o == objects.end() || r.actions.empty()) continue;
    out.push_back({{h->second->box, o->second->box, o->second->category},
                   r.actions, r.human_id, r.object_id});
  }
  return out;
}

}  // namespace pmf
