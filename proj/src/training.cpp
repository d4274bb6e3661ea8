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
#include "pmf/training.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include "pmf/synthetic.hpp"

namespace pmf {
namespace {

constexpr std::string_view kMomentumPrefix = "momentum:";

std::mt19937_64 batch_rng(std::uint64_t seed, int iteration) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(iteration)};
  return std::mt19937_64(seq);
}

}  // namespace

TrainingLabel assign_labels(const HOIProposal& proposal, std::span<const LabeledPair> gts,
                            int num_actions, double thr) {
  std::vector<int> y(static_cast<std::size_t>(num_actions), 0);
  for (const LabeledPair& gt : gts) {
    if (iou(proposal.human, gt.pair.human) < thr || iou(proposal.object, gt.pair.object) < thr) {
      continue;
    }
    for (int a : gt.actions) {
      if (a < 0 || a >= num_actions) throw std::out_of_range("assign_labels: action id");
      y[static_cast<std::size_t>(a)] = 1;
    }
  }
  return TrainingLabel::from_relations(std::move(y));
}

TrainingSet build_training_set(const Dataset& ds, double thr) {
  TrainingSet set;
  for (const ImageRecord& rec : ds.images) {
    const int index = static_cast<int>(set.images.size());
    set.image_ids.push_back(rec.id);
    set.images.push_back(render_image(ds, rec.id));
    const std::vector<LabeledPair> gts = ground_truth_pairs(ds, rec.id);
    for (HOIProposal& p : pair_proposals(ds, rec.id)) {
      TrainingLabel label = assign_labels(p, gts, ds.num_actions(), thr);
      set.examples.push_back({index, std::move(p), std::move(label)});
    }
  }
  return set;
}

MinibatchDraw sample_minibatch(std::span<const TrainingLabel> pool, int positive_ratio,
                               int negative_ratio, int batch_size, std::mt19937_64& rng) {
  if (pool.empty()) throw std::domain_error("sample_minibatch: empty pool");
  if (positive_ratio < 0 || negative_ratio < 0 || positive_ratio + negative_ratio == 0 ||
      batch_size < 1) {
    throw std::domain_error("sample_minibatch: bad ratio or batch size");
  }
  std::vector<std::size_t> positives, negatives;
  for (std::size_t i = 0; i < pool.size(); ++i) (pool[i].z ? positives : negatives).push_back(i);

  MinibatchDraw draw;
  const std::size_t batch = std::min(static_cast<std::size_t>(batch_size), pool.size());
  if (batch < static_cast<std::size_t>(batch_size)) {
    draw.warnings.push_back("pool holds " + std::to_string(pool.size()) +
                            " proposals, batch reduced from " + std::to_string(batch_size));
  }
  std::size_t want_pos = static_cast<std::size_t>(std::llround(
      static_cast<double>(batch) * positive_ratio / (positive_ratio + negative_ratio)));
  std::size_t want_neg = batch - want_pos;
  if (want_pos > positives.size()) {
    draw.warnings.push_back("only " + std::to_string(positives.size()) + " positives for " +
                            std::to_string(want_pos) + " slots; filling with negatives");
    want_pos = positives.size();
    want_neg = batch - want_pos;
  } else if (want_neg > negatives.size()) {
    draw.warnings.push_back("only " + std::to_string(negatives.size()) + " negatives for " +
                            std::to_string(want_neg) + " slots; filling with positives");
    want_neg = negatives.size();
    want_pos = batch - want_neg;
  }
  // Partial Fisher-Yates on each class.
  auto take = [&](std::vector<std::size_t>& from, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) {
      std::uniform_int_distribution<std::size_t> pick(i, from.size() - 1);
      std::swap(from[i], from[pick(rng)]);
      draw.indices.push_back(from[i]);
    }
  };
  take(positives, want_pos);
  take(negatives, want_neg);
  return draw;
}

template <typename Scalar>
Trainer<Scalar>::Trainer(const TrainConfig& config, const TrainingSet& data)
    : config_(config), data_(&data), net_(config.model) {
  config_.validate();
  if (data.examples.empty()) throw std::domain_error("train: no proposals in the dataset");
  images_.reserve(data.images.size());
  for (const Image& img : data.images) images_.push_back(network_input<Scalar>(img));
  for (const auto& e : data.examples) {
    if (static_cast<int>(e.label.y.size()) != config_.model.num_actions) {
      throw std::domain_error("train: dataset has " + std::to_string(e.label.y.size()) +
                              " actions, model expects " +
                              std::to_string(config_.model.num_actions));
    }
    pool_labels_.push_back(e.label);
  }
  for (const auto& p : net_.parameters()) {
    momentum_.push_back(RowMatrix<Scalar>::Zero(p.value.rows(), p.value.cols()));
  }
}

template <typename Scalar>
double Trainer<Scalar>::learning_rate() const {
  double lr = config_.learning_rate;
  if (config_.lr_drop_iteration > 0 && iteration_ >= config_.lr_drop_iteration) {
    lr *= config_.lr_drop_factor;
  }
  return lr;
}

template <typename Scalar>
MinibatchDraw Trainer<Scalar>::next_batch() const {
  std::mt19937_64 rng = batch_rng(config_.seed, iteration_);
  return sample_minibatch(pool_labels_, config_.positive_ratio, config_.negative_ratio,
                          config_.batch_size, rng);
}

template <typename Scalar>
typename Trainer<Scalar>::Batch Trainer<Scalar>::gather(std::span<const std::size_t> batch) const {
  Batch b;
  std::vector<int> remap(images_.size(), -1);
  for (std::size_t idx : batch) {
    if (idx >= data_->examples.size()) throw std::out_of_range("batch index out of range");
    const TrainingExample& e = data_->examples[idx];
    int& slot = remap[static_cast<std::size_t>(e.image)];
    if (slot < 0) {
      slot = static_cast<int>(b.images.size());
      b.images.push_back(images_[static_cast<std::size_t>(e.image)]);
    }
    b.samples.push_back({slot, e.proposal});
    b.labels.push_back(e.label);
  }
  return b;
}

template <typename Scalar>
LossValue Trainer<Scalar>::loss(std::span<const std::size_t> batch) const {
  const Batch b = gather(batch);
  const BatchForward<Scalar> fwd = net_.forward(b.images, b.samples);
  return hoi_loss<Scalar>(fwd.scores.s_L, fwd.scores.s_G, b.labels, config_.mu, nullptr,
                          config_.model.flags.interaction_affinity);
}

template <typename Scalar>
IterationLog Trainer<Scalar>::step() {
  const MinibatchDraw draw = next_batch();
  return step(draw.indices);
}

template <typename Scalar>
IterationLog Trainer<Scalar>::step(std::span<const std::size_t> batch) {
  const Batch b = gather(batch);
  const BatchForward<Scalar> fwd = net_.forward(b.images, b.samples);
  LossGradient<Scalar> grad;
  IterationLog entry;
  entry.learning_rate = learning_rate();
  entry.loss = hoi_loss<Scalar>(fwd.scores.s_L, fwd.scores.s_G, b.labels, config_.mu, &grad,
                                config_.model.flags.interaction_affinity);
  if (!std::isfinite(entry.loss.total)) {
    throw DivergenceError("non-finite loss at iteration " + std::to_string(iteration_ + 1) +
                          " (relation " + std::to_string(entry.loss.relation) + ", affinity " +
                          std::to_string(entry.loss.affinity) + ")");
  }
  ParameterSet<Scalar>& params = net_.parameters();
  params.zero_grad();
  net_.backward(fwd, grad.d_s_local, grad.d_s_affinity);

  const auto lr = static_cast<Scalar>(entry.learning_rate);
  const auto mom = static_cast<Scalar>(config_.momentum);
  const auto decay = static_cast<Scalar>(config_.weight_decay);
  for (std::size_t i = 0; i < params.size(); ++i) {
    Parameter<Scalar>& p = params[i];
    momentum_[i] = mom * momentum_[i] + p.grad + decay * p.value;
    p.value -= lr * momentum_[i];
  }
  ++iteration_;
  entry.iteration = iteration_;
  return entry;
}

template <typename Scalar>
Checkpoint<Scalar> Trainer<Scalar>::checkpoint() const {
  Checkpoint<Scalar> ckpt = make_checkpoint(config_.model, net_.parameters(),
                                            static_cast<std::uint64_t>(iteration_));
  const ParameterSet<Scalar>& params = net_.parameters();
  for (std::size_t i = 0; i < params.size(); ++i) {
    ckpt.tensors.push_back({std::string(kMomentumPrefix) + params[i].name, momentum_[i]});
  }
  return ckpt;
}

template <typename Scalar>
void Trainer<Scalar>::restore(const Checkpoint<Scalar>& ckpt) {
  if (!(ckpt.model == config_.model)) {
    throw CheckpointError(CheckpointErrorCode::kShape,
                          "checkpoint model configuration differs from the training config");
  }
  restore_parameters(ckpt, net_.parameters());
  const ParameterSet<Scalar>& params = net_.parameters();
  for (std::size_t i = 0; i < params.size(); ++i) {
    const auto* m = ckpt.find(std::string(kMomentumPrefix) + params[i].name);
    if (m == nullptr) {
      momentum_[i].setZero();
    } else if (m->value.rows() != momentum_[i].rows() || m->value.cols() != momentum_[i].cols()) {
      throw CheckpointError(CheckpointErrorCode::kShape,
                            "momentum for '" + params[i].name + "' has the wrong shape");
    } else {
      momentum_[i] = m->value;
    }
  }
  iteration_ = static_cast<int>(ckpt.iteration);
}

template class Trainer<float>;
template class Trainer<double>;

void append_metrics(const std::filesystem::path& path, const IterationLog& entry) {
  const bool fresh = !std::filesystem::exists(path) || std::filesystem::file_size(path) == 0;
  std::ofstream out(path, std::ios::app);
  if (!out) throw std::runtime_error("cannot write metrics to " + path.string());
  if (fresh) out << "iteration,lr,total,relation,affinity\n";
  out.precision(9);
  out << entry.iteration << ',' << entry.learning_rate << ',' << entry.loss.total << ','
      << entry.loss.relation << ',' << entry.loss.affinity << '\n';
}

TrainResult train(const TrainingSet& data, const TrainConfig& config,
                  const TrainOptions& options) {
  Trainer<float> trainer(config, data);
  if (options.resume != nullptr) trainer.restore(*options.resume);
  TrainResult result;
  while (trainer.iteration() < config.iterations) {
    const MinibatchDraw draw = trainer.next_batch();
    if (options.on_warning) {
      for (const auto& w : draw.warnings) options.on_warning(w);
    }
    const IterationLog entry = trainer.step(draw.indices);
    result.log.push_back(entry);
    const bool log_now = config.log_every > 0 && entry.iteration % config.log_every == 0;
    if (!options.metrics.empty() && (log_now || entry.iteration == config.iterations)) {
      append_metrics(options.metrics, entry);
    }
    if (options.on_log && log_now) options.on_log(entry);
    if (!options.checkpoint.empty() && config.checkpoint_every > 0 &&
        entry.iteration % config.checkpoint_every == 0) {
      save_checkpoint(trainer.checkpoint(), options.checkpoint);
    }
  }
  result.checkpoint = trainer.checkpoint();
  if (!options.checkpoint.empty()) save_checkpoint(result.checkpoint, options.checkpoint);
  return result;
}

}  // namespace pmf
