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
#include "pmf/config.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include <algorithm>
#include <cctype>
#include <charconv>
#include <fstream>
#include <set>
#include <sstream>
#include <variant>
#include <vector>

namespace pmf {
namespace {

namespace pt = boost::property_tree;

using Target = std::variant<int*, double*, bool*, std::uint64_t*>;

struct Binding {
  const char* section;
  const char* key;
  Target target;
};

std::vector<Binding> model_bindings(ModelConfig& m) {
  return {
      {"model", "scm_size", &m.scm_size},
      {"model", "holistic_resolution", &m.holistic_resolution},
      {"model", "part_resolution", &m.part_resolution},
      {"model", "part_scale", &m.part_scale},
      {"model", "feature_dim", &m.feature_dim},
      {"model", "backbone_c1", &m.backbone_c1},
      {"model", "backbone_c2", &m.backbone_c2},
      {"model", "holistic_dim", &m.holistic_dim},
      {"model", "local_dim", &m.local_dim},
      {"model", "fusion_dim", &m.fusion_dim},
      {"model", "attention_dim", &m.attention_dim},
      {"model", "num_keypoints", &m.num_keypoints},
      {"model", "num_actions", &m.num_actions},
      {"model", "num_object_classes", &m.num_object_classes},
      {"model", "pen_width", &m.pen_width},
      {"model", "sampling_ratio", &m.sampling_ratio},
      {"model", "min_joint_confidence", &m.min_joint_confidence},
      {"model", "seed", &m.seed},
      {"ablation", "SCM", &m.flags.scm},
      {"ablation", "PC", &m.flags.part_crop},
      {"ablation", "SpAlign", &m.flags.spatial_align},
      {"ablation", "SeAtten", &m.flags.semantic_attention},
      {"ablation", "IA", &m.flags.interaction_affinity},
  };
}

std::vector<Binding> train_bindings(TrainConfig& t) {
  std::vector<Binding> b = model_bindings(t.model);
  const std::vector<Binding> train = {
      {"train", "mu", &t.mu},
      {"train", "learning_rate", &t.learning_rate},
      {"train", "momentum", &t.momentum},
      {"train", "weight_decay", &t.weight_decay},
      {"train", "iterations", &t.iterations},
      {"train", "lr_drop_iteration", &t.lr_drop_iteration},
      {"train", "lr_drop_factor", &t.lr_drop_factor},
      {"train", "positive_ratio", &t.positive_ratio},
      {"train", "negative_ratio", &t.negative_ratio},
      {"train", "batch_size", &t.batch_size},
      {"train", "match_threshold", &t.match_threshold},
      {"train", "checkpoint_every", &t.checkpoint_every},
      {"train", "log_every", &t.log_every},
      {"train", "seed", &t.seed},
  };
  b.insert(b.end(), train.begin(), train.end());
  return b;
}

std::string trim(const std::string& s) {
  auto a = s.find_first_not_of(" \t\r\n");
  if (a == std::string::npos) return {};
  auto b = s.find_last_not_of(" \t\r\n");
  return s.substr(a, b - a + 1);
}

void assign(const Binding& b, const std::string& raw) {
  const std::string v = trim(raw);
  const std::string where = std::string("[") + b.section + "] " + b.key;
  auto fail = [&] { throw ConfigError(where + ": cannot parse '" + v + "'"); };
  std::visit(
      [&](auto* p) {
        using T = std::remove_pointer_t<decltype(p)>;
        if constexpr (std::is_same_v<T, bool>) {
          std::string lower = v;
          std::transform(lower.begin(), lower.end(), lower.begin(),
                         [](unsigned char c) { return std::tolower(c); });
          if (lower == "true" || lower == "1" || lower == "on" || lower == "yes") {
            *p = true;
          } else if (lower == "false" || lower == "0" || lower == "off" || lower == "no") {
            *p = false;
          } else {
            fail();
          }
        } else if constexpr (std::is_same_v<T, double>) {
          std::size_t used = 0;
          try {
            *p = std::stod(v, &used);
          } catch (const std::exception&) {
            fail();
          }
          if (used != v.size()) fail();
        } else {
          T parsed{};
          const auto res = std::from_chars(v.data(), v.data() + v.size(), parsed);
          if (res.ec != std::errc{} || res.ptr != v.data() + v.size()) fail();
          *p = parsed;
        }
      },
      b.target);
}

std::string render(const Target& t) {
  return std::visit(
      [](auto* p) -> std::string {
        using T = std::remove_pointer_t<decltype(p)>;
        if constexpr (std::is_same_v<T, bool>) {
          return *p ? "true" : "false";
        } else if constexpr (std::is_same_v<T, double>) {
          char buf[32];
          const auto res = std::to_chars(buf, buf + sizeof buf, *p);
          return std::string(buf, res.ptr);
        } else {
          return std::to_string(*p);
        }
      },
      t);
}

void apply(const std::string& text, const std::vector<Binding>& bindings,
           const std::set<std::string>& allowed_sections) {
  pt::ptree tree;
  std::istringstream in(text);
  try {
    pt::read_ini(in, tree);
  } catch (const pt::ini_parser_error& e) {
    throw ConfigError(std::string("config syntax: ") + e.what());
  }
  for (const auto& [section, body] : tree) {
    if (!allowed_sections.contains(section)) {
      if (body.empty() && !body.data().empty()) {
        throw ConfigError("config key '" + section + "' outside any section");
      }
      throw ConfigError("unknown config section [" + section + "]");
    }
    for (const auto& [key, value] : body) {
      const auto it = std::find_if(bindings.begin(), bindings.end(), [&](const Binding& b) {
        return section == b.section && key == b.key;
      });
      if (it == bindings.end()) {
        throw ConfigError("unknown config key [" + section + "] " + key);
      }
      assign(*it, value.data());
    }
  }
}

std::string format(const std::vector<Binding>& bindings) {
  std::ostringstream os;
  std::string current;
  for (const auto& b : bindings) {
    if (current != b.section) {
      if (!current.empty()) os << '\n';
      current = b.section;
      os << '[' << current << "]\n";
    }
    os << b.key << " = " << render(b.target) << '\n';
  }
  return os.str();
}

}  // namespace

void ModelConfig::validate() const {
  auto require = [](bool ok, const char* key) {
    if (!ok) throw ConfigError(std::string("invalid value for ") + key);
  };
  require(scm_size >= 1, "scm_size");
  require(holistic_resolution >= 1, "holistic_resolution");
  require(part_resolution >= 1, "part_resolution");
  require(part_scale > 0.0, "part_scale");
  require(feature_dim >= 1, "feature_dim");
  require(backbone_c1 >= 1 && backbone_c2 >= 1, "backbone_c1/backbone_c2");
  require(holistic_dim >= 1, "holistic_dim");
  require(local_dim >= 1, "local_dim");
  require(fusion_dim >= 1, "fusion_dim");
  require(attention_dim >= 1, "attention_dim");
  require(num_keypoints == 17, "num_keypoints (the COCO skeleton needs 17)");
  require(num_actions >= 1, "num_actions");
  require(num_object_classes >= 1, "num_object_classes");
  require(pen_width > 0.0, "pen_width");
  require(sampling_ratio >= 1, "sampling_ratio");
  require(min_joint_confidence >= 0.0 && min_joint_confidence <= 1.0,
          "min_joint_confidence");
}

void TrainConfig::validate() const {
  model.validate();
  auto require = [](bool ok, const char* key) {
    if (!ok) throw ConfigError(std::string("invalid value for ") + key);
  };
  require(mu >= 0.0, "mu");
  require(learning_rate > 0.0, "learning_rate");
  require(momentum >= 0.0 && momentum < 1.0, "momentum");
  require(weight_decay >= 0.0, "weight_decay");
  require(iterations >= 0, "iterations");
  require(lr_drop_iteration >= 0, "lr_drop_iteration");
  require(lr_drop_factor > 0.0, "lr_drop_factor");
  require(positive_ratio >= 0 && negative_ratio >= 0 &&
              positive_ratio + negative_ratio > 0,
          "positive_ratio/negative_ratio");
  require(batch_size >= 1, "batch_size");
  require(match_threshold > 0.0 && match_threshold <= 1.0, "match_threshold");
  require(checkpoint_every >= 0, "checkpoint_every");
  require(log_every >= 1, "log_every");
}

TrainConfig parse_train_config(const std::string& text) {
  TrainConfig config;
  apply(text, train_bindings(config), {"model", "ablation", "train"});
  config.validate();
  return config;
}

TrainConfig load_train_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_train_config(ss.str());
}

void set_config_value(TrainConfig& config, const std::string& section, const std::string& key,
                      const std::string& value) {
  const std::vector<Binding> bindings = train_bindings(config);
  const auto it = std::find_if(bindings.begin(), bindings.end(), [&](const Binding& b) {
    return section == b.section && key == b.key;
  });
  if (it == bindings.end()) throw ConfigError("unknown config key [" + section + "] " + key);
  assign(*it, value);
}

std::string format_train_config(const TrainConfig& config) {
  TrainConfig copy = config;
  return format(train_bindings(copy));
}

ModelConfig parse_model_config(const std::string& text) {
  ModelConfig config;
  apply(text, model_bindings(config), {"model", "ablation"});
  config.validate();
  return config;
}

std::string format_model_config(const ModelConfig& config) {
  ModelConfig copy = config;
  return format(model_bindings(copy));
}

}  // namespace pmf
