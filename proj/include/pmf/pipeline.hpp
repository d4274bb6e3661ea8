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
#ifndef PMF_PIPELINE_HPP_
#define PMF_PIPELINE_HPP_

#include <span>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "pmf/dataset.hpp"
#include "pmf/evaluation.hpp"
#include "pmf/image.hpp"
#include "pmf/network.hpp"

namespace pmf {

struct RelationPrediction {
  double affinity = 1.0;           // s_G
  std::vector<double> local;       // s_L, one per action
  std::vector<double> relation;    // s_ho
  std::vector<double> final_score; // R
  std::vector<double> attention;   // beta per keypoint; empty when not computed
};

// All proposals of one image in a single forward pass.
std::vector<RelationPrediction> predict_proposals(const PmfNet<float>& net, const Image& image,
                                                  std::span<const HOIProposal> proposals);

struct ImagePrediction {
  int image_id = 0;
  std::vector<std::pair<int, int>> ids;  // (human id, object id)
  std::vector<HOIProposal> proposals;
  std::vector<RelationPrediction> predictions;
};

// Every paired proposal of the dataset, image by image in record order.
std::vector<ImagePrediction> predict_dataset(const PmfNet<float>& net, const Dataset& ds);
ImagePrediction predict_image(const PmfNet<float>& net, const Dataset& ds, int image_id);

// One detection per (proposal, action) with R^a >= min_score.
std::vector<Detection> to_detections(std::span<const ImagePrediction> predictions,
                                     double min_score = 0.0);

nlohmann::json to_json(const ImagePrediction& p);

}  // namespace pmf

#endif  // PMF_PIPELINE_HPP_
