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
// Reference implementations used only by tests. Each is written directly from
// the definition with plain loops and shares no code with the library beyond
// the value types.

#ifndef PMF_TESTS_ORACLES_HPP_
#define PMF_TESTS_ORACLES_HPP_

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "pmf/geometry.hpp"
#include "pmf/parameters.hpp"
#include "pmf/tensor.hpp"

namespace oracle {

using pmf::Box;

// Dense 3-D array, index (y, x, c).
struct Volume {
  int h = 0, w = 0, c = 0;
  std::vector<double> v;
  Volume() = default;
  Volume(int h_, int w_, int c_) : h(h_), w(w_), c(c_), v(static_cast<std::size_t>(h_ * w_ * c_), 0.0) {}
  double& at(int y, int x, int k) { return v[static_cast<std::size_t>((y * w + x) * c + k)]; }
  double at(int y, int x, int k) const { return v[static_cast<std::size_t>((y * w + x) * c + k)]; }
};

// --- geometry ----------------------------------------------------------------

// Intersection over union by counting cells of a lattice with spacing `step`.
inline double iou_by_counting(const Box& a, const Box& b, double step) {
  const double x0 = std::min(a.x1, b.x1), y0 = std::min(a.y1, b.y1);
  const int nx = static_cast<int>(std::ceil((std::max(a.x2, b.x2) - x0) / step));
  const int ny = static_cast<int>(std::ceil((std::max(a.y2, b.y2) - y0) / step));
  long inter = 0, uni = 0;
  for (int i = 0; i < ny; ++i) {
    const double y = y0 + (i + 0.5) * step;
    for (int j = 0; j < nx; ++j) {
      const double x = x0 + (j + 0.5) * step;
      const bool in_a = x >= a.x1 && x < a.x2 && y >= a.y1 && y < a.y2;
      const bool in_b = x >= b.x1 && x < b.x2 && y >= b.y1 && y < b.y2;
      inter += in_a && in_b;
      uni += in_a || in_b;
    }
  }
  return uni == 0 ? 0.0 : static_cast<double>(inter) / static_cast<double>(uni);
}

inline double iou(const Box& a, const Box& b) {
  const double iw = std::max(0.0, std::min(a.x2, b.x2) - std::max(a.x1, b.x1));
  const double ih = std::max(0.0, std::min(a.y2, b.y2) - std::max(a.y1, b.y1));
  const double inter = iw * ih;
  const double area_a = (a.x2 - a.x1) * (a.y2 - a.y1);
  const double area_b = (b.x2 - b.x1) * (b.y2 - b.y1);
  return inter / (area_a + area_b - inter);
}

// Enumerates every candidate ground truth and keeps the best admissible one.
inline std::optional<std::size_t> best_match(const Box& human, const Box& object,
                                             const std::vector<pmf::GroundTruthPair>& gts,
                                             double thr, const std::vector<bool>& taken) {
  std::optional<std::size_t> best;
  double best_score = -1.0;
  for (std::size_t j = 0; j < gts.size(); ++j) {
    if (!taken.empty() && taken[j]) continue;
    const double ih = oracle::iou(human, gts[j].human), io = oracle::iou(object, gts[j].object);
    if (ih < thr || io < thr) continue;
    const double s = std::min(ih, io);
    if (s > best_score) {
      best_score = s;
      best = j;
    }
  }
  return best;
}

// --- spatial configuration ------------------------------------------------------

// COCO person skeleton as published (1-based keypoint ids).
inline std::vector<std::pair<int, int>> coco_skeleton() {
  static const int kOneBased[19][2] = {{16, 14}, {14, 12}, {17, 15}, {15, 13}, {12, 13},
                                       {6, 12},  {7, 13},  {6, 7},   {6, 8},   {7, 9},
                                       {8, 10},  {9, 11},  {2, 3},   {1, 2},   {1, 3},
                                       {2, 4},   {3, 5},   {4, 6},   {5, 7}};
  std::vector<std::pair<int, int>> out;
  for (const auto& e : kOneBased) out.emplace_back(e[0] - 1, e[1] - 1);
  return out;
}

// Cell (r, c) of the m x m union frame, mapped back to image coordinates.
inline std::pair<double, double> cell_center_in_image(const Box& u, int m, int r, int c) {
  return {u.x1 + (c + 0.5) * (u.x2 - u.x1) / m, u.y1 + (r + 0.5) * (u.y2 - u.y1) / m};
}

inline std::vector<double> mask(const Box& box, const Box& u, int m) {
  std::vector<double> g(static_cast<std::size_t>(m * m), 0.0);
  for (int r = 0; r < m; ++r) {
    for (int c = 0; c < m; ++c) {
      const auto [x, y] = cell_center_in_image(u, m, r, c);
      if (x >= box.x1 && x < box.x2 && y >= box.y1 && y < box.y2) g[static_cast<std::size_t>(r * m + c)] = 1.0;
    }
  }
  return g;
}

// Squared distance from p to segment ab.
inline double segment_distance_sq(double px, double py, double ax, double ay, double bx, double by) {
  const double ex = bx - ax, ey = by - ay;
  const double len_sq = ex * ex + ey * ey;
  const double dot = (px - ax) * ex + (py - ay) * ey;
  if (len_sq == 0.0 || dot <= 0.0) return (px - ax) * (px - ax) + (py - ay) * (py - ay);
  if (dot >= len_sq) return (px - bx) * (px - bx) + (py - by) * (py - by);
  const double cross = (px - ax) * ey - (py - ay) * ex;
  return cross * cross / len_sq;
}

inline std::vector<double> pose_map(const pmf::Pose& pose, const Box& u, int m,
                                    const std::vector<std::pair<int, int>>& edges,
                                    double pen_width) {
  std::vector<double> g(static_cast<std::size_t>(m * m), 0.0);
  const double e_count = static_cast<double>(edges.size());
  auto fx = [&](double x) { return (x - u.x1) / (u.x2 - u.x1) * m; };
  auto fy = [&](double y) { return (y - u.y1) / (u.y2 - u.y1) * m; };
  for (int r = 0; r < m; ++r) {
    for (int c = 0; c < m; ++c) {
      for (std::size_t e = 0; e < edges.size(); ++e) {
        const pmf::Joint& a = pose[edges[e].first];
        const pmf::Joint& b = pose[edges[e].second];
        const double d = segment_distance_sq(c + 0.5, r + 0.5, fx(a.x), fy(a.y), fx(b.x), fy(b.y));
        if (d <= pen_width * pen_width / 4.0) {
          g[static_cast<std::size_t>(r * m + c)] =
              e_count > 1 ? 0.05 + static_cast<double>(e) * 0.90 / (e_count - 1) : 0.05;
        }
      }
    }
  }
  return g;
}

// --- feature extraction ---------------------------------------------------------

// Bilinear read at continuous cell coordinates (y, x) with RoI-Align border rules.
inline double bilinear(const Volume& fm, double y, double x, int k) {
  if (y < -1.0 || y > fm.h || x < -1.0 || x > fm.w) return 0.0;
  y = std::clamp(y, 0.0, static_cast<double>(fm.h - 1));
  x = std::clamp(x, 0.0, static_cast<double>(fm.w - 1));
  const int y0 = static_cast<int>(std::floor(y)), x0 = static_cast<int>(std::floor(x));
  const int y1 = std::min(y0 + 1, fm.h - 1), x1 = std::min(x0 + 1, fm.w - 1);
  const double fy = y - y0, fx = x - x0;
  return (1 - fy) * (1 - fx) * fm.at(y0, x0, k) + (1 - fy) * fx * fm.at(y0, x1, k) +
         fy * (1 - fx) * fm.at(y1, x0, k) + fy * fx * fm.at(y1, x1, k);
}

// Each of the r x r bins averages an n x n lattice of bilinear samples.
inline Volume roi_align(const Volume& fm, int stride, const Box& box, int r, int n) {
  Volume out(r, r, fm.c);
  const double x0 = box.x1 / stride - 0.5, y0 = box.y1 / stride - 0.5;
  const double bw = (box.x2 - box.x1) / stride / r, bh = (box.y2 - box.y1) / stride / r;
  for (int py = 0; py < r; ++py) {
    for (int px = 0; px < r; ++px) {
      for (int k = 0; k < fm.c; ++k) {
        double sum = 0.0;
        for (int i = 0; i < n; ++i) {
          for (int j = 0; j < n; ++j) {
            sum += bilinear(fm, y0 + bh * (py + (i + 0.5) / n), x0 + bw * (px + (j + 0.5) / n), k);
          }
        }
        out.at(py, px, k) = sum / (n * n);
      }
    }
  }
  return out;
}

template <typename Scalar>
Volume to_volume(const pmf::FeatureMap<Scalar>& fm) {
  Volume v(fm.height, fm.width, fm.channels());
  for (int y = 0; y < fm.height; ++y)
    for (int x = 0; x < fm.width; ++x)
      for (int k = 0; k < fm.channels(); ++k) v.at(y, x, k) = static_cast<double>(fm.at(y, x, k));
  return v;
}

// Zero-padded 3x3 convolution; weight row o, column (ky * 3 + kx) * in + c.
template <typename Scalar>
Volume conv3x3(const Volume& x, const pmf::RowMatrix<Scalar>& w, const pmf::RowMatrix<Scalar>& b) {
  const int out_c = static_cast<int>(w.rows());
  Volume y(x.h, x.w, out_c);
  for (int r = 0; r < x.h; ++r) {
    for (int c = 0; c < x.w; ++c) {
      for (int o = 0; o < out_c; ++o) {
        double s = static_cast<double>(b(0, o));
        for (int ky = -1; ky <= 1; ++ky) {
          for (int kx = -1; kx <= 1; ++kx) {
            const int sy = r + ky, sx = c + kx;
            if (sy < 0 || sy >= x.h || sx < 0 || sx >= x.w) continue;
            for (int i = 0; i < x.c; ++i) {
              s += static_cast<double>(w(o, ((ky + 1) * 3 + (kx + 1)) * x.c + i)) * x.at(sy, sx, i);
            }
          }
        }
        y.at(r, c, o) = s;
      }
    }
  }
  return y;
}

inline Volume relu(Volume v) {
  for (double& x : v.v) x = std::max(0.0, x);
  return v;
}

inline Volume pool2(const Volume& x) {
  Volume y(x.h / 2, x.w / 2, x.c);
  for (int r = 0; r < y.h; ++r)
    for (int c = 0; c < y.w; ++c)
      for (int k = 0; k < x.c; ++k)
        y.at(r, c, k) = (x.at(2 * r, 2 * c, k) + x.at(2 * r, 2 * c + 1, k) +
                         x.at(2 * r + 1, 2 * c, k) + x.at(2 * r + 1, 2 * c + 1, k)) / 4.0;
  return y;
}

template <typename Scalar>
Volume backbone(const pmf::ParameterSet<Scalar>& ps, const Volume& image) {
  auto p = [&](const std::string& n) -> const pmf::RowMatrix<Scalar>& { return ps.find(n)->value; };
  Volume a = pool2(relu(conv3x3(image, p("backbone.conv1.weight"), p("backbone.conv1.bias"))));
  Volume b = pool2(relu(conv3x3(a, p("backbone.conv2.weight"), p("backbone.conv2.bias"))));
  return conv3x3(b, p("backbone.conv3.weight"), p("backbone.conv3.bias"));
}

// ((x - ox) / ow, (y - oy) / oh) at the centre of cell (r, c).
inline std::pair<double, double> coordinate(const Box& object, int stride, int r, int c) {
  const double x = stride * (2 * c + 1) / 2.0, y = stride * (2 * r + 1) / 2.0;
  return {(x - (object.x1 + object.x2) / 2) / (object.x2 - object.x1),
          (y - (object.y1 + object.y2) / 2) / (object.y2 - object.y1)};
}

// --- dense algebra --------------------------------------------------------------

using Vec = std::vector<double>;

template <typename Scalar>
Vec affine(const pmf::ParameterSet<Scalar>& ps, const std::string& name, const Vec& x) {
  const auto& w = ps.find(name + ".weight")->value;
  const auto& b = ps.find(name + ".bias")->value;
  Vec y(static_cast<std::size_t>(w.rows()));
  for (Eigen::Index o = 0; o < w.rows(); ++o) {
    double s = static_cast<double>(b(0, o));
    for (Eigen::Index i = 0; i < w.cols(); ++i) s += static_cast<double>(w(o, i)) * x[static_cast<std::size_t>(i)];
    y[static_cast<std::size_t>(o)] = s;
  }
  return y;
}

template <typename Scalar>
Vec two_layer(const pmf::ParameterSet<Scalar>& ps, const std::string& name, const Vec& x) {
  Vec h = affine(ps, name + ".fc1", x);
  for (double& v : h) v = std::max(0.0, v);
  return affine(ps, name + ".fc2", h);
}

inline double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

inline Vec concat(std::initializer_list<Vec> parts) {
  Vec out;
  for (const Vec& p : parts) out.insert(out.end(), p.begin(), p.end());
  return out;
}

// Zoom-in local embedding: per part, D feature channels then (optionally)
// the two offsets per cell, scaled by beta_k; the object block last.
template <typename Scalar>
Vec local_embedding(const pmf::ParameterSet<Scalar>& ps, const std::vector<Vec>& part_feats,
                    const std::vector<Vec>& part_offsets, const Vec& beta, int cells, int d,
                    bool align) {
  Vec att;
  for (std::size_t k = 0; k < part_feats.size(); ++k) {
    const double scale = k < beta.size() ? beta[k] : 1.0;
    for (int cell = 0; cell < cells; ++cell) {
      for (int ch = 0; ch < d; ++ch) att.push_back(scale * part_feats[k][static_cast<std::size_t>(cell * d + ch)]);
      if (align) {
        for (int ch = 0; ch < 2; ++ch) att.push_back(scale * part_offsets[k][static_cast<std::size_t>(cell * 2 + ch)]);
      }
    }
  }
  return two_layer(ps, "zoom.local", att);
}

// --- loss ----------------------------------------------------------------------

inline double bce(double t, double p) {
  p = std::min(std::max(p, 1e-7), 1.0 - 1e-7);
  return t == 1.0 ? -std::log(p) : (t == 0.0 ? -std::log(1.0 - p) : -(t * std::log(p) + (1 - t) * std::log(1 - p)));
}

// --- evaluation ----------------------------------------------------------------

struct Det {
  int image = 0;
  Box human, object;
  double score = 0.0;
};
struct Gt {
  int image = 0;
  Box human, object;
};

// AP by sweeping every distinct score threshold. At each threshold the kept
// detections are matched from scratch; the PR points are then integrated with
// the all-point rule.
inline double threshold_sweep_ap(const std::vector<Det>& dets, const std::vector<Gt>& gts, double thr) {
  if (gts.empty()) return 0.0;
  std::set<double, std::greater<>> thresholds;
  for (const Det& d : dets) thresholds.insert(d.score);
  std::vector<std::pair<double, double>> pr;  // (recall, precision) per threshold, descending threshold
  for (double t : thresholds) {
    std::vector<std::size_t> kept;
    for (std::size_t i = 0; i < dets.size(); ++i)
      if (dets[i].score >= t) kept.push_back(i);
    std::stable_sort(kept.begin(), kept.end(), [&](std::size_t a, std::size_t b) {
      if (dets[a].score != dets[b].score) return dets[a].score > dets[b].score;
      return dets[a].image < dets[b].image;
    });
    std::vector<bool> used(gts.size(), false);
    int tp = 0;
    for (std::size_t i : kept) {
      double best = -1.0;
      std::optional<std::size_t> pick;
      for (std::size_t g = 0; g < gts.size(); ++g) {
        if (used[g] || gts[g].image != dets[i].image) continue;
        const double ih = oracle::iou(dets[i].human, gts[g].human), io = oracle::iou(dets[i].object, gts[g].object);
        if (ih < thr || io < thr) continue;
        if (std::min(ih, io) > best) {
          best = std::min(ih, io);
          pick = g;
        }
      }
      if (pick) {
        used[*pick] = true;
        ++tp;
      }
    }
    pr.push_back({static_cast<double>(tp) / static_cast<double>(gts.size()),
                  static_cast<double>(tp) / static_cast<double>(kept.size())});
  }
  double ap = 0.0, prev = 0.0;
  for (std::size_t k = 0; k < pr.size(); ++k) {
    double best = 0.0;
    for (std::size_t j = k; j < pr.size(); ++j) best = std::max(best, pr[j].second);
    ap += (pr[k].first - prev) * best;
    prev = pr[k].first;
  }
  return ap;
}

}  // namespace oracle

#endif  // PMF_TESTS_ORACLES_HPP_
