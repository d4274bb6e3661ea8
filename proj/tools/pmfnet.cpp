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
// Command-line front end: data generation, training, evaluation, prediction
// and attention overlays.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "pmf/checkpoint.hpp"
#include "pmf/config.hpp"
#include "pmf/dataset.hpp"
#include "pmf/evaluation.hpp"
#include "pmf/image.hpp"
#include "pmf/pipeline.hpp"
#include "pmf/synthetic.hpp"
#include "pmf/training.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr int kExitInput = 2;
constexpr int kExitRuntime = 3;

// Errors caused by what the operator handed in.
class InputError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

std::optional<std::uint64_t> env_seed() {
  const char* raw = std::getenv("PMF_SEED");
  if (raw == nullptr || *raw == '\0') return std::nullopt;
  try {
    std::size_t used = 0;
    const unsigned long long v = std::stoull(raw, &used);
    if (used != std::string(raw).size()) throw std::invalid_argument(raw);
    return v;
  } catch (const std::exception&) {
    throw InputError(std::string("PMF_SEED is not an unsigned integer: ") + raw);
  }
}

void write_text(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << text;
}

// Model dimensions that must agree with the dataset.
void check_dataset_fits(const pmf::ModelConfig& model, const pmf::Dataset& ds) {
  if (model.num_actions != ds.num_actions()) {
    throw InputError("model has " + std::to_string(model.num_actions) + " actions, dataset has " +
                     std::to_string(ds.num_actions()));
  }
  if (model.num_object_classes != ds.num_object_classes()) {
    throw InputError("model has " + std::to_string(model.num_object_classes) +
                     " object classes, dataset has " +
                     std::to_string(ds.num_object_classes()));
  }
}

pmf::PmfNet<float> load_net(const fs::path& ckpt_path) {
  const pmf::Checkpoint<float> ckpt = pmf::load_checkpoint<float>(ckpt_path);
  pmf::PmfNet<float> net(ckpt.model);
  pmf::restore_parameters(ckpt, net.parameters());
  return net;
}

// --- gen-data ----------------------------------------------------------------

struct GenDataArgs {
  fs::path spec;
  fs::path out;
};

int gen_data(const GenDataArgs& args) {
  pmf::SyntheticSpec spec = pmf::load_synthetic_spec(args.spec);
  if (const auto seed = env_seed()) spec.seed = *seed;
  const pmf::Dataset ds = pmf::generate_synthetic(spec);
  if (args.out.has_parent_path()) fs::create_directories(args.out.parent_path());
  pmf::save_dataset(ds, args.out);
  std::size_t pairs = 0, positives = 0;
  for (const auto& img : ds.images) pairs += pmf::pair_proposals(ds, img.id).size();
  for (const auto& it : ds.interactions) positives += it.actions.empty() ? 0 : 1;
  std::cout << "images " << ds.images.size() << ", humans " << ds.humans.size() << ", objects "
            << ds.objects.size() << ", pairs " << pairs << ", positives " << positives << '\n';
  return 0;
}

// --- train -------------------------------------------------------------------

struct TrainArgs {
  fs::path config;
  fs::path data;
  fs::path out;
  fs::path metrics;
  fs::path resume;
  std::optional<int> iterations;
  std::optional<double> learning_rate;
  std::optional<int> batch_size;
  std::optional<std::uint64_t> seed;
  std::vector<std::string> disable;
  std::vector<std::string> set;
};

pmf::TrainConfig resolve_train_config(const TrainArgs& args) {
  pmf::TrainConfig config = args.config.empty() ? pmf::TrainConfig{}
                                                : pmf::load_train_config(args.config);
  if (const auto seed = env_seed()) config.seed = config.model.seed = *seed;
  for (const std::string& kv : args.set) {
    const auto dot = kv.find('.');
    const auto eq = kv.find('=');
    if (dot == std::string::npos || eq == std::string::npos || dot > eq) {
      throw InputError("--set expects section.key=value, got '" + kv + "'");
    }
    pmf::set_config_value(config, kv.substr(0, dot), kv.substr(dot + 1, eq - dot - 1),
                          kv.substr(eq + 1));
  }
  for (const std::string& flag : args.disable) pmf::set_config_value(config, "ablation", flag, "false");
  if (args.iterations) config.iterations = *args.iterations;
  if (args.learning_rate) config.learning_rate = *args.learning_rate;
  if (args.batch_size) config.batch_size = *args.batch_size;
  if (args.seed) config.seed = config.model.seed = *args.seed;
  config.validate();
  return config;
}

int train(const TrainArgs& args) {
  const pmf::TrainConfig config = resolve_train_config(args);
  const pmf::Dataset ds = pmf::load_dataset(args.data);
  check_dataset_fits(config.model, ds);
  const pmf::TrainingSet set = pmf::build_training_set(ds, config.match_threshold);
  if (set.examples.empty()) throw InputError("dataset yields no proposals to train on");

  std::optional<pmf::Checkpoint<float>> resume;
  if (!args.resume.empty()) resume = pmf::load_checkpoint<float>(args.resume);
  if (args.out.has_parent_path()) fs::create_directories(args.out.parent_path());
  pmf::TrainOptions options;
  options.checkpoint = args.out;
  options.metrics = args.metrics.empty() ? fs::path(args.out.string() + ".metrics.csv") : args.metrics;
  if (!resume && fs::exists(options.metrics)) fs::remove(options.metrics);
  options.resume = resume ? &*resume : nullptr;
  options.on_log = [](const pmf::IterationLog& e) {
    std::cerr << "iter " << e.iteration << " lr " << e.learning_rate << " loss " << e.loss.total
              << " (relation " << e.loss.relation << ", affinity " << e.loss.affinity << ")\n";
  };
  options.on_warning = [](const std::string& w) { std::cerr << "warning: " << w << '\n'; };
  const pmf::TrainResult result = pmf::train(set, config, options);
  std::cout << "trained " << result.checkpoint.iteration << " iterations on " << set.examples.size()
            << " proposals; checkpoint " << args.out.string() << '\n';
  return 0;
}

// --- evaluate ----------------------------------------------------------------

struct EvaluateArgs {
  fs::path ckpt;
  fs::path data;
  fs::path report;
  fs::path detections;
  double thr = 0.5;
  bool require_class = false;
  std::vector<std::string> splits;
};

std::vector<pmf::ActionGroup> parse_groups(const std::vector<std::string>& specs) {
  std::vector<pmf::ActionGroup> groups;
  for (const std::string& s : specs) {
    const auto eq = s.find('=');
    if (eq == std::string::npos) throw InputError("--split expects name=id,id,..., got '" + s + "'");
    pmf::ActionGroup g{s.substr(0, eq), {}};
    std::stringstream ids(s.substr(eq + 1));
    for (std::string id; std::getline(ids, id, ',');) {
      try {
        g.actions.push_back(std::stoi(id));
      } catch (const std::exception&) {
        throw InputError("bad action id '" + id + "' in --split");
      }
    }
    groups.push_back(std::move(g));
  }
  return groups;
}

int write_report(const pmf::EvalReport& report, const pmf::Dataset* ds, const fs::path& path,
                 const std::vector<std::string>& split_specs) {
  const std::vector<pmf::ActionGroup> groups = parse_groups(split_specs);
  std::vector<pmf::SplitResult> splits;
  if (!groups.empty()) {
    try {
      splits = pmf::split_report(report, groups);
    } catch (const std::invalid_argument& e) {
      throw InputError(e.what());
    }
  }
  write_text(path, pmf::report_to_json(report, ds, splits).dump(2) + "\n");
  std::cout << pmf::report_table(report, ds, splits);
  return 0;
}

int evaluate(const EvaluateArgs& args) {
  const pmf::PmfNet<float> net = load_net(args.ckpt);
  const pmf::Dataset ds = pmf::load_dataset(args.data);
  if (!ds.images.empty() || !ds.actions.empty()) check_dataset_fits(net.config(), ds);
  const std::vector<pmf::ImagePrediction> predictions = pmf::predict_dataset(net, ds);
  const std::vector<pmf::Detection> dets = pmf::to_detections(predictions);
  if (!args.detections.empty()) pmf::write_detections(args.detections, dets);
  pmf::EvalOptions options;
  options.iou_threshold = args.thr;
  options.require_object_class = args.require_class;
  options.num_actions = net.config().num_actions;
  const pmf::EvalReport report = pmf::evaluate(dets, pmf::ground_truth_records(ds), options);
  return write_report(report, &ds, args.report, args.splits);
}

// --- score: detections + ground truth files ---------------------------------

struct ScoreArgs {
  fs::path detections;
  fs::path ground_truth;
  fs::path report;
  double thr = 0.5;
  bool require_class = false;
  int num_actions = 0;
  std::vector<std::string> splits;
};

int score(const ScoreArgs& args) {
  const auto dets = pmf::read_detections(args.detections);
  const auto gts = pmf::read_ground_truth(args.ground_truth);
  pmf::EvalOptions options;
  options.iou_threshold = args.thr;
  options.require_object_class = args.require_class;
  options.num_actions = args.num_actions;
  return write_report(pmf::evaluate(dets, gts, options), nullptr, args.report, args.splits);
}

// --- export-gt ---------------------------------------------------------------

int export_gt(const fs::path& data, const fs::path& out) {
  const pmf::Dataset ds = pmf::load_dataset(data);
  const auto gts = pmf::ground_truth_records(ds);
  pmf::write_ground_truth(out, gts);
  std::cout << gts.size() << " ground-truth records\n";
  return 0;
}

// --- predict -----------------------------------------------------------------

int predict(const fs::path& ckpt, const fs::path& data, std::optional<int> image,
            const fs::path& out) {
  const pmf::PmfNet<float> net = load_net(ckpt);
  const pmf::Dataset ds = pmf::load_dataset(data);
  check_dataset_fits(net.config(), ds);
  json images = json::array();
  if (image) {
    try {
      ds.image(*image);
    } catch (const std::out_of_range&) {
      throw InputError("unknown image id " + std::to_string(*image));
    }
    images.push_back(pmf::to_json(pmf::predict_image(net, ds, *image)));
  } else {
    for (const auto& p : pmf::predict_dataset(net, ds)) images.push_back(pmf::to_json(p));
  }
  write_text(out, json{{"images", images}}.dump(1) + "\n");
  return 0;
}

// --- visualize ---------------------------------------------------------------

constexpr int kOverlayScale = 4;
constexpr double kAttentionHighlight = 0.7;

int visualize(const fs::path& ckpt, const fs::path& data, int image_id, const fs::path& dir) {
  const pmf::PmfNet<float> net = load_net(ckpt);
  const pmf::Dataset ds = pmf::load_dataset(data);
  check_dataset_fits(net.config(), ds);
  try {
    ds.image(image_id);
  } catch (const std::out_of_range&) {
    throw InputError("unknown image id " + std::to_string(image_id));
  }
  fs::create_directories(dir);
  const pmf::ImagePrediction pred = pmf::predict_image(net, ds, image_id);
  const pmf::Image base = pmf::render_image(ds, image_id);
  const pmf::Skeleton skeleton = pmf::Skeleton::coco();
  const pmf::ModelConfig& mc = net.config();
  json legend = json::array();

  for (std::size_t i = 0; i < pred.proposals.size(); ++i) {
    const pmf::HOIProposal& p = pred.proposals[i];
    const pmf::RelationPrediction& r = pred.predictions[i];
    const std::string stem = "image" + std::to_string(image_id) + "_h" +
                             std::to_string(pred.ids[i].first) + "_o" +
                             std::to_string(pred.ids[i].second);

    // Upscaled copy of the image with boxes, skeleton and attention markers.
    const int s = kOverlayScale;
    pmf::Image canvas = pmf::make_image(base.width * s, base.height * s, {0, 0, 0});
    for (int y = 0; y < canvas.height; ++y) {
      for (int x = 0; x < canvas.width; ++x) {
        for (int c = 0; c < 3; ++c) canvas.at(y, x, c) = base.at(y / s, x / s, c);
      }
    }
    const pmf::Pose pose = p.pose.scaled(s);
    pmf::draw_rect(canvas, p.human.scaled(s), 2.0, {0.1f, 0.9f, 0.1f});
    pmf::draw_rect(canvas, p.object.scaled(s), 2.0, pmf::object_class_color(p.object_class));
    for (const auto& [a, b] : skeleton.edges) {
      pmf::draw_line(canvas, pose[a].x, pose[a].y, pose[b].x, pose[b].y, 1.5, {1.0f, 1.0f, 1.0f});
    }
    json betas = json::array();
    for (int k = 0; k < pmf::kNumKeypoints; ++k) {
      const double beta = r.attention.empty() ? 1.0 : r.attention[static_cast<std::size_t>(k)];
      const bool high = !r.attention.empty() && beta > kAttentionHighlight;
      const float t = static_cast<float>(beta);
      pmf::fill_circle(canvas, pose[k].x, pose[k].y, high ? 7.0 : 4.0,
                       high ? pmf::Rgb{1.0f, 0.1f, 0.1f} : pmf::Rgb{0.2f * t, 0.3f, 1.0f - 0.6f * t});
      betas.push_back(r.attention.empty() ? json() : json(beta));
    }
    pmf::write_png(dir / (stem + "_overlay.png"), canvas);

    const pmf::SpatialConfigurationMap scm =
        pmf::build_scm(p, mc.scm_size, skeleton, mc.pen_width, mc.min_joint_confidence);
    static const char* kChannels[3] = {"human", "object", "pose"};
    for (int c = 0; c < 3; ++c) {
      pmf::write_png(dir / (stem + "_scm_" + kChannels[c] + ".png"),
                     pmf::grid_to_image(scm.channels[static_cast<std::size_t>(c)], 4));
    }
    json keypoints = json::object();
    for (int k = 0; k < pmf::kNumKeypoints; ++k) {
      keypoints[std::string(pmf::keypoint_name(k))] = betas[static_cast<std::size_t>(k)];
    }
    legend.push_back({{"overlay", stem + "_overlay.png"},
                      {"human_id", pred.ids[i].first},
                      {"object_id", pred.ids[i].second},
                      {"beta", r.attention},
                      {"beta_by_keypoint", keypoints},
                      {"s_G", r.affinity},
                      {"R", r.final_score}});
  }
  write_text(dir / ("image" + std::to_string(image_id) + "_legend.json"),
             json{{"image_id", image_id},
                  {"highlight_threshold", kAttentionHighlight},
                  {"proposals", legend}}
                     .dump(1) +
                 "\n");
  std::cout << pred.proposals.size() << " overlays written to " << dir.string() << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Pose-aware multi-level relation classifier for human-object interactions"};
  app.require_subcommand(1);

  GenDataArgs gen_args;
  auto* gen = app.add_subcommand("gen-data", "Generate a synthetic dataset from a scene spec");
  gen->add_option("--spec", gen_args.spec, "Synthetic spec JSON")->required();
  gen->add_option("--out", gen_args.out, "Dataset JSON to write")->required();

  TrainArgs train_args;
  auto* tr = app.add_subcommand("train", "Train a model; writes a checkpoint and metrics CSV");
  tr->add_option("--config", train_args.config, "INI config ([model], [ablation], [train])");
  tr->add_option("--data", train_args.data, "Dataset JSON")->required();
  tr->add_option("--out", train_args.out, "Checkpoint to write")->required();
  tr->add_option("--metrics", train_args.metrics, "Metrics CSV (default: <out>.metrics.csv)");
  tr->add_option("--resume", train_args.resume, "Checkpoint to continue from");
  tr->add_option("--iterations", train_args.iterations, "Overrides [train] iterations");
  tr->add_option("--lr", train_args.learning_rate, "Overrides [train] learning_rate");
  tr->add_option("--batch-size", train_args.batch_size, "Overrides [train] batch_size");
  tr->add_option("--seed", train_args.seed, "Overrides [train] and [model] seed");
  tr->add_option("--disable", train_args.disable, "Ablation flags to switch off (SCM PC SpAlign SeAtten IA)");
  tr->add_option("--set", train_args.set, "Any key as section.key=value");

  EvaluateArgs eval_args;
  auto* ev = app.add_subcommand("evaluate", "Run inference on every proposal and score role mAP");
  ev->add_option("--ckpt", eval_args.ckpt, "Checkpoint")->required();
  ev->add_option("--data", eval_args.data, "Dataset JSON")->required();
  ev->add_option("--report", eval_args.report, "Report JSON to write")->required();
  ev->add_option("--detections", eval_args.detections, "Also write detections as JSONL");
  ev->add_option("--thr", eval_args.thr, "IoU threshold for both boxes")->capture_default_str();
  ev->add_flag("--require-class", eval_args.require_class, "Require object-class agreement");
  ev->add_option("--split", eval_args.splits, "Action group as name=id,id,...");

  ScoreArgs score_args;
  auto* sc = app.add_subcommand("score", "Score detection JSONL against ground-truth JSONL");
  sc->add_option("--detections", score_args.detections, "Detections JSONL")->required();
  sc->add_option("--ground-truth", score_args.ground_truth, "Ground-truth JSONL")->required();
  sc->add_option("--report", score_args.report, "Report JSON to write")->required();
  sc->add_option("--thr", score_args.thr, "IoU threshold for both boxes")->capture_default_str();
  sc->add_flag("--require-class", score_args.require_class, "Require object-class agreement");
  sc->add_option("--num-actions", score_args.num_actions, "Action count (default: inferred)");
  sc->add_option("--split", score_args.splits, "Action group as name=id,id,...");

  fs::path gt_data, gt_out;
  auto* eg = app.add_subcommand("export-gt", "Write a dataset's ground truth as JSONL");
  eg->add_option("--data", gt_data, "Dataset JSON")->required();
  eg->add_option("--out", gt_out, "JSONL to write")->required();

  fs::path pr_ckpt, pr_data, pr_out;
  std::optional<int> pr_image;
  auto* pr = app.add_subcommand("predict", "Write per-proposal scores and attention as JSON");
  pr->add_option("--ckpt", pr_ckpt, "Checkpoint")->required();
  pr->add_option("--data", pr_data, "Dataset JSON")->required();
  pr->add_option("--image", pr_image, "Only this image id");
  pr->add_option("--out", pr_out, "JSON to write")->required();

  fs::path vis_ckpt, vis_data, vis_out;
  int vis_image = 0;
  auto* vis = app.add_subcommand("visualize", "Attention overlays and SCM channel images");
  vis->add_option("--ckpt", vis_ckpt, "Checkpoint")->required();
  vis->add_option("--data", vis_data, "Dataset JSON")->required();
  vis->add_option("--image", vis_image, "Image id")->required();
  vis->add_option("--out", vis_out, "Output directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitInput;
  }

  try {
    if (*gen) return gen_data(gen_args);
    if (*tr) return train(train_args);
    if (*ev) return evaluate(eval_args);
    if (*sc) return score(score_args);
    if (*eg) return export_gt(gt_data, gt_out);
    if (*pr) return predict(pr_ckpt, pr_data, pr_image, pr_out);
    if (*vis) return visualize(vis_ckpt, vis_data, vis_image, vis_out);
  } catch (const pmf::SchemaError& e) {
    std::cerr << "error: dataset schema:\n";
    for (const auto& p : e.problems()) std::cerr << "  " << p << '\n';
    return kExitInput;
  } catch (const pmf::DivergenceError& e) {
    std::cerr << "error: training diverged: " << e.what() << '\n';
    return kExitRuntime;
  } catch (const InputError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitInput;
  } catch (const pmf::ConfigError& e) {
    std::cerr << "error: config: " << e.what() << '\n';
    return kExitInput;
  } catch (const pmf::GenerationError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitInput;
  } catch (const pmf::CheckpointError& e) {
    std::cerr << "error: checkpoint: " << e.what() << '\n';
    return kExitInput;
  } catch (const nlohmann::json::exception& e) {
    std::cerr << "error: json: " << e.what() << '\n';
    return kExitInput;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitInput;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitRuntime;
  }
  return 0;
}
