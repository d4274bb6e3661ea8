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
#ifndef PMF_TRAINING_HPP_
#define PMF_TRAINING_HPP_

#include <cstdint>
#include <filesystem>
#include <functional>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "pmf/checkpoint.hpp"
#include "pmf/config.hpp"
#include "pmf/dataset.hpp"
#include "pmf/image.hpp"
#include "pmf/loss.hpp"
#include "pmf/network.hpp"

namespace pmf {

class DivergenceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Pixels in [0, 1] shifted to zero mean grey, in the network's precision.
template <typename Scalar>
FeatureMap<Scalar> network_input(const Image& img) {
  FeatureMap<Scalar> out = img.cast<Scalar>();
  out.data.array() -= Scalar(0.5);
  return out;
}

// Union of the action sets of every ground truth the proposal matches under
// the dual-IoU rule.
TrainingLabel assign_labels(const HOIProposal& proposal, std::span<const LabeledPair> gts,
                            int num_actions, double thr = 0.5);

struct TrainingExample {
  int image = 0;  // index into TrainingSet::images
  HOIProposal proposal;
  TrainingLabel label;
};

struct TrainingSet {
  std::vector<int> image_ids;
  std::vector<Image> images;
  std::vector<TrainingExample> examples;
};

// Every paired proposal of every image, labelled against ground truth.
TrainingSet build_training_set(const Dataset& ds, double thr = 0.5);

struct MinibatchDraw {
  std::vector<std::size_t> indices;
  std::vector<std::string> warnings;
};

// Draws round(batch * pos / (pos + neg)) positives (z = 1) and the rest
// negatives, without replacement. A short class is topped up from the other
// one with a warning; the batch never exceeds the pool.
MinibatchDraw sample_minibatch(std::span<const TrainingLabel> pool, int positive_ratio,
                               int negative_ratio, int batch_size, std::mt19937_64& rng);

struct IterationLog {
  int iteration = 0;  // 1-based count of completed updates
  double learning_rate = 0.0;
  LossValue loss;
};

// SGD with momentum and L2 weight decay:
//   v <- momentum v + (g + weight_decay w),  w <- w - lr v.
template <typename Scalar>
class Trainer {
 public:
  Trainer(const TrainConfig& config, const TrainingSet& data);

  PmfNet<Scalar>& net() { return net_; }
  const PmfNet<Scalar>& net() const { return net_; }
  const TrainConfig& config() const { return config_; }
  int iteration() const { return iteration_; }
  double learning_rate() const;  // for the next update

  // The batch the next step() draws; depends only on (seed, iteration).
  MinibatchDraw next_batch() const;

  // One update on a drawn batch, or on the given example indices. Throws
  // DivergenceError on a non-finite loss.
  IterationLog step();
  IterationLog step(std::span<const std::size_t> batch);

  // Loss without touching parameters or gradients.
  LossValue loss(std::span<const std::size_t> batch) const;

  Checkpoint<Scalar> checkpoint() const;  // parameters, momentum, iteration
  void restore(const Checkpoint<Scalar>& ckpt);

 private:
  struct Batch {
    std::vector<FeatureMap<Scalar>> images;
    std::vector<BatchSample> samples;
    std::vector<TrainingLabel> labels;
  };
  Batch gather(std::span<const std::size_t> batch) const;

  TrainConfig config_;
  const TrainingSet* data_;
  std::vector<FeatureMap<Scalar>> images_;
  std::vector<TrainingLabel> pool_labels_;
  PmfNet<Scalar> net_;
  std::vector<RowMatrix<Scalar>> momentum_;
  int iteration_ = 0;
};

struct TrainOptions {
  std::filesystem::path checkpoint;  // empty: no files written
  std::filesystem::path metrics;     // CSV, appended
  const Checkpoint<float>* resume = nullptr;
  std::function<void(const IterationLog&)> on_log;
  std::function<void(const std::string&)> on_warning;
};

struct TrainResult {
  Checkpoint<float> checkpoint;
  std::vector<IterationLog> log;  // every iteration
};

// Runs config.iterations updates in single precision, continuing from
// options.resume when given.
TrainResult train(const TrainingSet& data, const TrainConfig& config,
                  const TrainOptions& options = {});

void append_metrics(const std::filesystem::path& path, const IterationLog& entry);

}  // namespace pmf

#endif  // PMF_TRAINING_HPP_
