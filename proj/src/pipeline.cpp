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
#include "pmf/pipeline.hpp"

#include "pmf/synthetic.hpp"
#include "pmf/training.hpp"

namespace pmf {
namespace {

std::vector<double> row_values(const RowMatrix<float>& m, Eigen::Index row) {
  std::vector<double> out(static_cast<std::size_t>(m.cols()));
  for (Eigen::Index j = 0; j < m.cols(); ++j) out[static_cast<std::size_t>(j)] = m(row, j);
  return out;
}

nlohmann::json box_json(const Box& b) { return nlohmann::json::array({b.x1, b.y1, b.x2, b.y2}); }

}  // namespace

std::vector<RelationPrediction> predict_proposals(const PmfNet<float>& net, const Image& image,
                                                  std::span<const HOIProposal> proposals) {
  if (proposals.empty()) return {};
  const FeatureMap<float> input = network_input<float>(image);
  std::vector<BatchSample> samples;
  samples.reserve(proposals.size());
  for (const auto& p : proposals) samples.push_back({0, p});
  const BatchForward<float> fwd = net.forward(std::span(&input, 1), samples);
  const bool attention = net.config().flags.part_crop && net.config().flags.semantic_attention;

  std::vector<RelationPrediction> out;
  for (std::size_t i = 0; i < proposals.size(); ++i) {
    const auto row = static_cast<Eigen::Index>(i);
    RelationPrediction p;
    p.affinity = fwd.scores.s_G(row, 0);
    p.local = row_values(fwd.scores.s_L, row);
    p.relation = row_values(fwd.scores.s_ho, row);
    const RowVector<float> r =
        final_score(fwd.scores.s_ho.row(row), static_cast<float>(proposals[i].human_score),
                    static_cast<float>(proposals[i].object_score));
    p.final_score.assign(r.data(), r.data() + r.size());
    if (attention) p.attention = row_values(fwd.parts.beta, row);
    out.push_back(std::move(p));
  }
  return out;
}

ImagePrediction predict_image(const PmfNet<float>& net, const Dataset& ds, int image_id) {
  ImagePrediction p;
  p.image_id = image_id;
  p.ids = proposal_ids(ds, image_id);
  p.proposals = pair_proposals(ds, image_id);
  if (!p.proposals.empty()) {
    p.predictions = predict_proposals(net, render_image(ds, image_id), p.proposals);
  }
  return p;
}

std::vector<ImagePrediction> predict_dataset(const PmfNet<float>& net, const Dataset& ds) {
  std::vector<ImagePrediction> out;
  out.reserve(ds.images.size());
  for (const ImageRecord& img : ds.images) out.push_back(predict_image(net, ds, img.id));
  return out;
}

std::vector<Detection> to_detections(std::span<const ImagePrediction> predictions,
                                     double min_score) {
  std::vector<Detection> out;
  for (const auto& img : predictions) {
    for (std::size_t i = 0; i < img.proposals.size(); ++i) {
      const HOIProposal& prop = img.proposals[i];
      const auto& scores = img.predictions[i].final_score;
      for (std::size_t a = 0; a < scores.size(); ++a) {
        if (scores[a] < min_score) continue;
        out.push_back({img.image_id, prop.human, prop.object, prop.object_class,
                       static_cast<int>(a), scores[a]});
      }
    }
  }
  return out;
}

nlohmann::json to_json(const ImagePrediction& p) {
  nlohmann::json proposals = nlohmann::json::array();
  for (std::size_t i = 0; i < p.proposals.size(); ++i) {
    const RelationPrediction& r = p.predictions[i];
    proposals.push_back({{"human_id", p.ids[i].first},
                         {"object_id", p.ids[i].second},
                         {"human_box", box_json(p.proposals[i].human)},
                         {"object_box", box_json(p.proposals[i].object)},
                         {"object_class", p.proposals[i].object_class},
                         {"s_G", r.affinity},
                         {"s_L", r.local},
                         {"s_ho", r.relation},
                         {"R", r.final_score},
                         {"beta", r.attention}});
  }
  return {{"image_id", p.image_id}, {"proposals", proposals}};
}

}  // namespace pmf
