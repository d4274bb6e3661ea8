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
#ifndef PMF_NETWORK_HPP_
#define PMF_NETWORK_HPP_

#include <array>
#include <span>
#include <stdexcept>
#include <vector>

#include "pmf/backbone.hpp"
#include "pmf/config.hpp"
#include "pmf/features.hpp"
#include "pmf/geometry.hpp"
#include "pmf/layers.hpp"
#include "pmf/parameters.hpp"
#include "pmf/roi_align.hpp"
#include "pmf/spatial_config.hpp"
#include "pmf/tensor.hpp"

namespace pmf {

template <typename Derived>
auto logistic(const Eigen::MatrixBase<Derived>& x) {
  using Scalar = typename Derived::Scalar;
  return (Scalar(1) / (Scalar(1) + (-x.array()).exp())).matrix();
}

// s_ho^a = s_L^a * s_G
template <typename Derived>
auto relation_score(const Eigen::MatrixBase<Derived>& s_local,
                    typename Derived::Scalar s_affinity) {
  return (s_local * s_affinity).eval();
}

// R^a = s_ho^a * s_h * s_o
template <typename Derived>
auto final_score(const Eigen::MatrixBase<Derived>& s_relation,
                 typename Derived::Scalar s_human,
                 typename Derived::Scalar s_object) {
  return ((s_relation * s_human) * s_object).eval();
}

// Pooled inputs of the four holistic branches, one row per proposal.
template <typename Scalar>
struct HolisticInputs {
  RowMatrix<Scalar> human;         // N x (R_h^2 D)
  RowMatrix<Scalar> object;
  RowMatrix<Scalar> union_region;
  RowMatrix<Scalar> spatial;       // N x (3 M^2), empty when the SCM branch is off
};

template <typename Scalar>
struct HolisticFeatures {
  RowMatrix<Scalar> f_h, f_o, f_u, f_s;
  RowMatrix<Scalar> gamma;  // f_h | f_o | f_u (| f_s)
  typename Mlp2<Scalar>::Cache human_cache, object_cache, union_cache, spatial_cache;
};

// Zoom-in state for a batch. The first four members are inputs; the rest are
// filled by zoom_in_forward. Crops are flattened cell-major, channel-minor.
template <typename Scalar>
struct PartFeatures {
  std::vector<RowMatrix<Scalar>> f_p;      // K entries, N x (R_p^2 D)
  RowMatrix<Scalar> f_po;                  // N x (R_p^2 D)
  std::vector<RowMatrix<Scalar>> alpha_k;  // K entries, N x (R_p^2 2)
  RowMatrix<Scalar> alpha_o;

  std::vector<RowMatrix<Scalar>> f_prime;  // K entries, N x (R_p^2 D'), D' = D (+2)
  RowMatrix<Scalar> f_prime_o;
  RowMatrix<Scalar> beta;                  // N x K
  RowMatrix<Scalar> f_att;                 // N x ((K + 1) R_p^2 D')
  RowMatrix<Scalar> gamma_loc;             // N x d_loc
  typename Mlp2<Scalar>::Cache attention_cache, local_cache;
};

template <typename Scalar>
struct RelationScores {
  RowMatrix<Scalar> s_G;   // N x 1
  RowMatrix<Scalar> s_L;   // N x A
  RowMatrix<Scalar> s_ho;  // N x A
  typename Mlp2<Scalar>::Cache affinity_cache, relation_cache;
};

struct BatchSample {
  int image = 0;  // index into the image list handed to forward()
  HOIProposal proposal;
};

template <typename Scalar>
struct BatchForward {
  std::vector<FeatureMap<Scalar>> feature_maps;
  std::vector<typename Backbone<Scalar>::Cache> backbone_caches;
  std::vector<BatchSample> samples;
  std::vector<std::array<RoiSampling, 3>> holistic_rois;  // human, object, union
  std::vector<std::vector<RoiSampling>> part_rois;        // K parts, then object
  RowMatrix<Scalar> scm_rows;                              // N x (3 M^2)
  HolisticInputs<Scalar> holistic_inputs;
  HolisticFeatures<Scalar> holistic;
  PartFeatures<Scalar> parts;
  RelationScores<Scalar> scores;
};

// The multi-branch relation classifier: backbone, holistic module, zoom-in
// module and fusion module. Parameters exist only for enabled components.
template <typename Scalar>
class PmfNet {
 public:
  explicit PmfNet(const ModelConfig& config) : config_(config) {
    config_.validate();
    const ModelConfig& c = config_;
    const AblationFlags& f = c.flags;
    backbone_ = Backbone<Scalar>(params_, 3, c.backbone_c1, c.backbone_c2, c.feature_dim);
    const int crop = c.holistic_resolution * c.holistic_resolution * c.feature_dim;
    human_ = Mlp2<Scalar>(params_, "holistic.human", crop, c.holistic_dim, c.holistic_dim);
    object_ = Mlp2<Scalar>(params_, "holistic.object", crop, c.holistic_dim, c.holistic_dim);
    union_ = Mlp2<Scalar>(params_, "holistic.union", crop, c.holistic_dim, c.holistic_dim);
    if (f.scm) {
      spatial_ = Mlp2<Scalar>(params_, "holistic.spatial", scm_width(), c.holistic_dim,
                              c.holistic_dim);
    }
    if (f.part_crop) {
      if (f.semantic_attention) {
        attention_ = Mlp2<Scalar>(params_, "zoom.attention", scm_width(), c.attention_dim,
                                  c.num_keypoints);
      }
      local_ = Mlp2<Scalar>(params_, "zoom.local", (c.num_keypoints + 1) * part_block(),
                            c.local_dim, c.local_dim);
    }
    if (f.interaction_affinity) {
      affinity_ = Mlp2<Scalar>(params_, "fusion.affinity", holistic_width(), c.fusion_dim, 1);
    }
    relation_ = Mlp2<Scalar>(params_, "fusion.relation",
                             holistic_width() + (f.part_crop ? c.local_dim : 0),
                             c.fusion_dim, c.num_actions);
    params_.initialize(c.seed);
  }

  const ModelConfig& config() const { return config_; }
  ParameterSet<Scalar>& parameters() { return params_; }
  const ParameterSet<Scalar>& parameters() const { return params_; }
  const Backbone<Scalar>& backbone() const { return backbone_; }

  int scm_width() const { return 3 * config_.scm_size * config_.scm_size; }
  int crop_width() const {
    return config_.holistic_resolution * config_.holistic_resolution * config_.feature_dim;
  }
  int part_channels() const {
    return config_.feature_dim + (config_.flags.spatial_align ? 2 : 0);
  }
  int part_block() const {
    return config_.part_resolution * config_.part_resolution * part_channels();
  }
  int holistic_width() const { return (config_.flags.scm ? 4 : 3) * config_.holistic_dim; }

  bool needs_scm() const {
    const AblationFlags& f = config_.flags;
    return f.scm || (f.part_crop && f.semantic_attention);
  }

  // --- holistic module -----------------------------------------------------

  HolisticFeatures<Scalar> holistic_forward(const HolisticInputs<Scalar>& in) const {
    if (in.human.cols() != crop_width() || in.object.cols() != crop_width() ||
        in.union_region.cols() != crop_width()) {
      throw std::domain_error("holistic_forward: crop width mismatch");
    }
    HolisticFeatures<Scalar> h;
    h.f_h = human_.forward(params_, in.human, h.human_cache);
    h.f_o = object_.forward(params_, in.object, h.object_cache);
    h.f_u = union_.forward(params_, in.union_region, h.union_cache);
    const Eigen::Index n = in.human.rows();
    const int d = config_.holistic_dim;
    h.gamma.resize(n, holistic_width());
    h.gamma.leftCols(d) = h.f_h;
    h.gamma.middleCols(d, d) = h.f_o;
    h.gamma.middleCols(2 * d, d) = h.f_u;
    if (config_.flags.scm) {
      if (in.spatial.cols() != scm_width() || in.spatial.rows() != n) {
        throw std::domain_error("holistic_forward: spatial input mismatch");
      }
      h.f_s = spatial_.forward(params_, in.spatial, h.spatial_cache);
      h.gamma.rightCols(d) = h.f_s;
    }
    return h;
  }

  // Returns dL/d(human, object, union) crops.
  std::array<RowMatrix<Scalar>, 3> holistic_backward(const HolisticFeatures<Scalar>& h,
                                                     const RowMatrix<Scalar>& d_gamma) {
    const int d = config_.holistic_dim;
    std::array<RowMatrix<Scalar>, 3> out;
    out[0] = human_.backward(params_, h.human_cache, d_gamma.leftCols(d));
    out[1] = object_.backward(params_, h.object_cache, d_gamma.middleCols(d, d));
    out[2] = union_.backward(params_, h.union_cache, d_gamma.middleCols(2 * d, d));
    if (config_.flags.scm) {
      spatial_.backward(params_, h.spatial_cache, d_gamma.rightCols(d), false);
    }
    return out;
  }

  // --- zoom-in module ------------------------------------------------------

  // beta in (0, 1)^K from the flattened SCM; the object weight is fixed at 1
  // and not produced here.
  RowMatrix<Scalar> semantic_attention(const RowMatrix<Scalar>& scm_rows,
                                       typename Mlp2<Scalar>::Cache& cache) const {
    if (!(config_.flags.part_crop && config_.flags.semantic_attention)) {
      throw std::logic_error("semantic_attention: component disabled");
    }
    return logistic(attention_.forward(params_, scm_rows, cache));
  }

  RowMatrix<Scalar> semantic_attention(const RowMatrix<Scalar>& scm_rows) const {
    typename Mlp2<Scalar>::Cache cache;
    return semantic_attention(scm_rows, cache);
  }

  // Spatial align, semantic attention (when enabled) and the local embedding.
  void zoom_in_forward(PartFeatures<Scalar>& parts, const RowMatrix<Scalar>& scm_rows) const {
    require_part_crop();
    const Eigen::Index n = parts.f_po.rows();
    RowMatrix<Scalar> beta;
    if (config_.flags.semantic_attention) {
      beta = semantic_attention(scm_rows, parts.attention_cache);
    } else {
      beta = RowMatrix<Scalar>::Ones(n, config_.num_keypoints);
    }
    zoom_in_forward_with_beta(parts, beta);
  }

  // As zoom_in_forward with a caller-supplied attention vector.
  void zoom_in_forward_with_beta(PartFeatures<Scalar>& parts,
                                 const RowMatrix<Scalar>& beta) const {
    require_part_crop();
    const int k_parts = config_.num_keypoints;
    const Eigen::Index n = parts.f_po.rows();
    if (static_cast<int>(parts.f_p.size()) != k_parts || beta.rows() != n ||
        beta.cols() != k_parts) {
      throw std::domain_error("zoom_in_forward: expected K part crops and N x K beta");
    }
    const bool align = config_.flags.spatial_align;
    parts.f_prime.resize(k_parts);
    for (int k = 0; k < k_parts; ++k) {
      parts.f_prime[k] = align ? append_offsets(parts.f_p[k], parts.alpha_k[k]) : parts.f_p[k];
    }
    parts.f_prime_o = align ? append_offsets(parts.f_po, parts.alpha_o) : parts.f_po;
    parts.beta = beta;

    const int block = part_block();
    parts.f_att.resize(n, (k_parts + 1) * block);
    for (int k = 0; k < k_parts; ++k) {
      parts.f_att.middleCols(k * block, block) =
          (parts.f_prime[k].array().colwise() * beta.col(k).array()).matrix();
    }
    parts.f_att.rightCols(block) = parts.f_prime_o;
    parts.gamma_loc = local_.forward(params_, parts.f_att, parts.local_cache);
  }

  // Returns dL/d(feature part of) each of the K part crops followed by the
  // object crop; offset channels carry no gradient.
  std::vector<RowMatrix<Scalar>> zoom_in_backward(const PartFeatures<Scalar>& parts,
                                                  const RowMatrix<Scalar>& d_gamma_loc) {
    const int k_parts = config_.num_keypoints;
    const int block = part_block();
    const RowMatrix<Scalar> d_att = local_.backward(params_, parts.local_cache, d_gamma_loc);
    const Eigen::Index n = d_att.rows();
    RowMatrix<Scalar> d_beta(n, k_parts);
    std::vector<RowMatrix<Scalar>> out(k_parts + 1);
    for (int k = 0; k < k_parts; ++k) {
      const auto d_block = d_att.middleCols(k * block, block);
      d_beta.col(k) = d_block.cwiseProduct(parts.f_prime[k]).rowwise().sum();
      const RowMatrix<Scalar> d_prime =
          (d_block.array().colwise() * parts.beta.col(k).array()).matrix();
      out[k] = strip_offsets(d_prime);
    }
    out[k_parts] = strip_offsets(d_att.rightCols(block));
    if (config_.flags.semantic_attention) {
      const RowMatrix<Scalar> d_logit =
          (d_beta.array() * parts.beta.array() * (Scalar(1) - parts.beta.array())).matrix();
      attention_.backward(params_, parts.attention_cache, d_logit, false);
    }
    return out;
  }

  // --- fusion module -------------------------------------------------------

  // `parts` may be null only when the part-crop component is disabled.
  RelationScores<Scalar> fusion_forward(const HolisticFeatures<Scalar>& hol,
                                        const PartFeatures<Scalar>* parts) const {
    const bool use_local = config_.flags.part_crop;
    if (use_local && parts == nullptr) {
      throw std::domain_error("fusion_forward: local features required");
    }
    const Eigen::Index n = hol.gamma.rows();
    RelationScores<Scalar> s;
    if (config_.flags.interaction_affinity) {
      s.s_G = logistic(affinity_.forward(params_, hol.gamma, s.affinity_cache));
    } else {
      s.s_G = RowMatrix<Scalar>::Ones(n, 1);
    }
    RowMatrix<Scalar> input;
    if (use_local) {
      input.resize(n, parts->gamma_loc.cols() + hol.gamma.cols());
      input << parts->gamma_loc, hol.gamma;
    } else {
      input = hol.gamma;
    }
    s.s_L = logistic(relation_.forward(params_, input, s.relation_cache));
    s.s_ho = (s.s_L.array().colwise() * s.s_G.col(0).array()).matrix();
    return s;
  }

  // Returns {dL/d gamma_hol, dL/d gamma_loc (empty without part crops)}.
  std::array<RowMatrix<Scalar>, 2> fusion_backward(const RelationScores<Scalar>& s,
                                                   const RowMatrix<Scalar>& d_s_local,
                                                   const RowMatrix<Scalar>& d_s_affinity) {
    const RowMatrix<Scalar> d_logit_l =
        (d_s_local.array() * s.s_L.array() * (Scalar(1) - s.s_L.array())).matrix();
    const RowMatrix<Scalar> d_input = relation_.backward(params_, s.relation_cache, d_logit_l);
    std::array<RowMatrix<Scalar>, 2> out;
    if (config_.flags.part_crop) {
      out[1] = d_input.leftCols(config_.local_dim);
      out[0] = d_input.rightCols(holistic_width());
    } else {
      out[0] = d_input;
    }
    if (config_.flags.interaction_affinity) {
      const RowMatrix<Scalar> d_logit_g =
          (d_s_affinity.array() * s.s_G.array() * (Scalar(1) - s.s_G.array())).matrix();
      out[0] += affinity_.backward(params_, s.affinity_cache, d_logit_g);
    }
    return out;
  }

  // --- whole batch ---------------------------------------------------------

  // Images are H x W x 3 maps at stride 1; samples refer to them by index.
  BatchForward<Scalar> forward(std::span<const FeatureMap<Scalar>> images,
                               std::span<const BatchSample> samples) const {
    const ModelConfig& c = config_;
    BatchForward<Scalar> b;
    b.samples.assign(samples.begin(), samples.end());
    b.feature_maps.resize(images.size());
    b.backbone_caches.resize(images.size());
    std::vector<bool> used(images.size(), false);
    for (const auto& s : samples) {
      if (s.image < 0 || s.image >= static_cast<int>(images.size())) {
        throw std::out_of_range("forward: sample refers to a missing image");
      }
      used[s.image] = true;
    }
    for (std::size_t i = 0; i < images.size(); ++i) {
      if (used[i]) b.feature_maps[i] = backbone_.forward(params_, images[i], b.backbone_caches[i]);
    }

    const Eigen::Index n = static_cast<Eigen::Index>(samples.size());
    const int rh = c.holistic_resolution;
    const int rp = c.part_resolution;
    const int d = c.feature_dim;
    const int k_parts = c.num_keypoints;
    HolisticInputs<Scalar>& hin = b.holistic_inputs;
    hin.human.resize(n, crop_width());
    hin.object.resize(n, crop_width());
    hin.union_region.resize(n, crop_width());
    if (needs_scm()) b.scm_rows.resize(n, scm_width());
    b.holistic_rois.resize(samples.size());
    if (c.flags.part_crop) {
      b.part_rois.resize(samples.size());
      b.parts.f_p.assign(k_parts, RowMatrix<Scalar>(n, rp * rp * d));
      b.parts.alpha_k.assign(k_parts, RowMatrix<Scalar>(n, rp * rp * 2));
      b.parts.f_po.resize(n, rp * rp * d);
      b.parts.alpha_o.resize(n, rp * rp * 2);
    }
    const Skeleton skeleton = Skeleton::coco();

    for (Eigen::Index i = 0; i < n; ++i) {
      const BatchSample& s = samples[i];
      const FeatureMap<Scalar>& fm = b.feature_maps[s.image];
      const HOIProposal& p = s.proposal;
      auto& rois = b.holistic_rois[i];
      rois[0] = roi_sampling(fm, p.human, rh, c.sampling_ratio);
      rois[1] = roi_sampling(fm, p.object, rh, c.sampling_ratio);
      rois[2] = roi_sampling(fm, union_box(p.human, p.object), rh, c.sampling_ratio);
      hin.human.row(i) = flat(roi_align(fm, rois[0]));
      hin.object.row(i) = flat(roi_align(fm, rois[1]));
      hin.union_region.row(i) = flat(roi_align(fm, rois[2]));
      if (needs_scm()) {
        b.scm_rows.row(i) = build_scm(p, c.scm_size, skeleton, c.pen_width,
                                      c.min_joint_confidence)
                                .template flatten<Scalar>();
      }
      if (c.flags.part_crop) {
        const FeatureMap<Scalar> cmap =
            coordinate_map<Scalar>(fm.height, fm.width, p.object, fm.stride);
        PartCrops<Scalar> crops =
            crop_part_features(fm, cmap, p, c.part_scale, rp, c.sampling_ratio);
        for (int k = 0; k < k_parts; ++k) {
          b.parts.f_p[k].row(i) = flat(crops.parts[k]);
          b.parts.alpha_k[k].row(i) = flat(crops.part_offsets[k]);
        }
        b.parts.f_po.row(i) = flat(crops.object);
        b.parts.alpha_o.row(i) = flat(crops.object_offset);
        b.part_rois[i] = std::move(crops.samplings);
      }
    }
    if (c.flags.scm) hin.spatial = b.scm_rows;

    b.holistic = holistic_forward(hin);
    if (c.flags.part_crop) zoom_in_forward(b.parts, b.scm_rows);
    b.scores = fusion_forward(b.holistic, c.flags.part_crop ? &b.parts : nullptr);
    return b;
  }

  // Accumulates dL/d(parameters) given dL/ds_L (N x A) and dL/ds_G (N x 1).
  void backward(const BatchForward<Scalar>& b, const RowMatrix<Scalar>& d_s_local,
                const RowMatrix<Scalar>& d_s_affinity) {
    const ModelConfig& c = config_;
    const auto [d_hol, d_loc] = fusion_backward(b.scores, d_s_local, d_s_affinity);
    const auto d_crops = holistic_backward(b.holistic, d_hol);
    std::vector<RowMatrix<Scalar>> d_parts;
    if (c.flags.part_crop) d_parts = zoom_in_backward(b.parts, d_loc);

    std::vector<RowMatrix<Scalar>> d_maps(b.feature_maps.size());
    for (std::size_t m = 0; m < b.feature_maps.size(); ++m) {
      if (b.feature_maps[m].cells() > 0) {
        d_maps[m] = RowMatrix<Scalar>::Zero(b.feature_maps[m].cells(), c.feature_dim);
      }
    }
    const int rh2 = c.holistic_resolution * c.holistic_resolution;
    const int rp2 = c.part_resolution * c.part_resolution;
    for (std::size_t i = 0; i < b.samples.size(); ++i) {
      RowMatrix<Scalar>& g = d_maps[b.samples[i].image];
      const auto row = static_cast<Eigen::Index>(i);
      for (int r = 0; r < 3; ++r) {
        roi_align_backward(b.holistic_rois[i][r], unflat(d_crops[r], row, rh2), g);
      }
      if (c.flags.part_crop) {
        for (int k = 0; k <= c.num_keypoints; ++k) {
          roi_align_backward(b.part_rois[i][k], unflat(d_parts[k], row, rp2), g);
        }
      }
    }
    for (std::size_t m = 0; m < b.feature_maps.size(); ++m) {
      if (b.feature_maps[m].cells() == 0) continue;
      FeatureMap<Scalar> grad;
      grad.height = b.feature_maps[m].height;
      grad.width = b.feature_maps[m].width;
      grad.stride = b.feature_maps[m].stride;
      grad.data = std::move(d_maps[m]);
      backbone_.backward(params_, b.backbone_caches[m], grad);
    }
  }

 private:
  void require_part_crop() const {
    if (!config_.flags.part_crop) {
      throw std::logic_error("zoom-in module disabled (PC off)");
    }
  }

  static RowVector<Scalar> flat(const RowMatrix<Scalar>& m) {
    return Eigen::Map<const RowVector<Scalar>>(m.data(), m.size());
  }

  Eigen::Map<const RowMatrix<Scalar>> unflat(const RowMatrix<Scalar>& rows,
                                             Eigen::Index row, int cells) const {
    return {rows.row(row).data(), cells, config_.feature_dim};
  }

  // Per cell: D feature channels followed by the two offset channels.
  RowMatrix<Scalar> append_offsets(const RowMatrix<Scalar>& feat,
                                   const RowMatrix<Scalar>& alpha) const {
    const int d = config_.feature_dim;
    const int cells = config_.part_resolution * config_.part_resolution;
    RowMatrix<Scalar> out(feat.rows(), cells * (d + 2));
    for (int cell = 0; cell < cells; ++cell) {
      out.middleCols(cell * (d + 2), d) = feat.middleCols(cell * d, d);
      out.middleCols(cell * (d + 2) + d, 2) = alpha.middleCols(cell * 2, 2);
    }
    return out;
  }

  template <typename Derived>
  RowMatrix<Scalar> strip_offsets(const Eigen::MatrixBase<Derived>& d_prime) const {
    if (!config_.flags.spatial_align) return d_prime;
    const int d = config_.feature_dim;
    const int cells = config_.part_resolution * config_.part_resolution;
    RowMatrix<Scalar> out(d_prime.rows(), cells * d);
    for (int cell = 0; cell < cells; ++cell) {
      out.middleCols(cell * d, d) = d_prime.middleCols(cell * (d + 2), d);
    }
    return out;
  }

  ModelConfig config_;
  ParameterSet<Scalar> params_;
  Backbone<Scalar> backbone_;
  Mlp2<Scalar> human_, object_, union_, spatial_;
  Mlp2<Scalar> attention_, local_;
  Mlp2<Scalar> affinity_, relation_;
};

}  // namespace pmf

#endif  // PMF_NETWORK_HPP_
