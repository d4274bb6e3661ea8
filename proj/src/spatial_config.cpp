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
#include "pmf/spatial_config.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <stdexcept>
#include <string>

namespace pmf {
namespace {

constexpr char kScmMagic[4] = {'P', 'M', 'F', 'S'};
constexpr char kScmChannelTag[4] = {'H', 'O', 'P', '\0'};
constexpr std::uint32_t kScmVersion = 1;

static_assert(std::endian::native == std::endian::little,
              "binary fixtures assume a little-endian host");

// Union-frame coordinates: [0, m] spans the union box on each axis.
struct FrameMap {
  double x0, y0, sx, sy;
  double u(double x) const { return (x - x0) / sx * m; }
  double v(double y) const { return (y - y0) / sy * m; }
  double m;
};

FrameMap frame_for(const Box& union_region, int m) {
  if (!union_region.valid()) {
    throw std::domain_error("spatial config: invalid union box");
  }
  if (m < 1) throw std::domain_error("spatial config: m must be >= 1");
  return {union_region.x1, union_region.y1, union_region.width(),
          union_region.height(), static_cast<double>(m)};
}

void write_u32(std::ofstream& out, std::uint32_t v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof v);
}

std::uint32_t read_u32(std::ifstream& in) {
  std::uint32_t v = 0;
  in.read(reinterpret_cast<char*>(&v), sizeof v);
  if (!in) throw std::runtime_error("scm file: truncated header");
  return v;
}

}  // namespace

Skeleton Skeleton::coco() {
  Skeleton s;
  s.edges = {{15, 13}, {13, 11}, {16, 14}, {14, 12}, {11, 12}, {5, 11}, {6, 12},
             {5, 6},   {5, 7},   {6, 8},   {7, 9},   {8, 10},  {1, 2},  {0, 1},
             {0, 2},   {1, 3},   {2, 4},   {3, 5},   {4, 6}};
  s.intensities = uniform_intensities(s.edges.size());
  return s;
}

std::vector<double> Skeleton::uniform_intensities(std::size_t num_edges) {
  std::vector<double> out(num_edges);
  if (num_edges == 1) {
    out[0] = 0.05;
    return out;
  }
  for (std::size_t i = 0; i < num_edges; ++i) {
    out[i] = 0.05 + static_cast<double>(i) * 0.90 /
                        static_cast<double>(num_edges - 1);
  }
  return out;
}

Grid rasterize_mask(const Box& box, const Box& union_region, int m) {
  const FrameMap f = frame_for(union_region, m);
  const double u1 = f.u(box.x1), u2 = f.u(box.x2);
  const double v1 = f.v(box.y1), v2 = f.v(box.y2);
  Grid grid = Grid::Zero(m, m);
  for (int r = 0; r < m; ++r) {
    const double cy = r + 0.5;
    if (cy < v1 || cy >= v2) continue;
    for (int c = 0; c < m; ++c) {
      const double cx = c + 0.5;
      if (cx >= u1 && cx < u2) grid(r, c) = 1.0;
    }
  }
  return grid;
}

Grid rasterize_pose(const Pose& pose, const Box& union_region, int m,
                    const Skeleton& skeleton, double pen_width,
                    double min_confidence) {
  if (!(pen_width > 0.0)) {
    throw std::domain_error("rasterize_pose: pen width must be > 0");
  }
  if (skeleton.intensities.size() != skeleton.edges.size()) {
    throw std::invalid_argument("rasterize_pose: one intensity per edge");
  }
  const FrameMap f = frame_for(union_region, m);
  const double radius = 0.5 * pen_width;
  const double radius_sq = radius * radius;
  Grid grid = Grid::Zero(m, m);

  for (std::size_t e = 0; e < skeleton.edges.size(); ++e) {
    const auto [ja, jb] = skeleton.edges[e];
    const Joint& a = pose[ja];
    const Joint& b = pose[jb];
    if (a.confidence < min_confidence || b.confidence < min_confidence) continue;
    const double ax = f.u(a.x), ay = f.v(a.y);
    const double bx = f.u(b.x), by = f.v(b.y);
    const double dx = bx - ax, dy = by - ay;
    const double len_sq = dx * dx + dy * dy;

    const int c_lo = std::max(0, static_cast<int>(std::floor(std::min(ax, bx) - radius - 0.5)));
    const int c_hi = std::min(m - 1, static_cast<int>(std::ceil(std::max(ax, bx) + radius)));
    const int r_lo = std::max(0, static_cast<int>(std::floor(std::min(ay, by) - radius - 0.5)));
    const int r_hi = std::min(m - 1, static_cast<int>(std::ceil(std::max(ay, by) + radius)));
    for (int r = r_lo; r <= r_hi; ++r) {
      const double py = r + 0.5;
      for (int c = c_lo; c <= c_hi; ++c) {
        const double px = c + 0.5;
        double t = 0.0;
        if (len_sq > 0.0) {
          t = std::clamp(((px - ax) * dx + (py - ay) * dy) / len_sq, 0.0, 1.0);
        }
        const double qx = ax + t * dx - px;
        const double qy = ay + t * dy - py;
        if (qx * qx + qy * qy <= radius_sq) grid(r, c) = skeleton.intensities[e];
      }
    }
  }
  return grid;
}

SpatialConfigurationMap build_scm(const HOIProposal& proposal, int m,
                                  const Skeleton& skeleton, double pen_width,
                                  double min_confidence) {
  const Box u = union_box(proposal.human, proposal.object);
  SpatialConfigurationMap scm;
  scm.m = m;
  scm.channels[0] = rasterize_mask(proposal.human, u, m);
  scm.channels[1] = rasterize_mask(proposal.object, u, m);
  scm.channels[2] =
      rasterize_pose(proposal.pose, u, m, skeleton, pen_width, min_confidence);
  return scm;
}

void write_scm_file(const std::filesystem::path& path,
                    const SpatialConfigurationMap& scm) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open " + path.string());
  out.write(kScmMagic, 4);
  write_u32(out, kScmVersion);
  write_u32(out, static_cast<std::uint32_t>(scm.m));
  write_u32(out, static_cast<std::uint32_t>(scm.m));
  write_u32(out, 3);
  out.write(kScmChannelTag, 4);
  for (int ch = 0; ch < 3; ++ch) {
    for (int r = 0; r < scm.m; ++r) {
      for (int c = 0; c < scm.m; ++c) {
        const float v = static_cast<float>(scm.channels[ch](r, c));
        out.write(reinterpret_cast<const char*>(&v), sizeof v);
      }
    }
  }
  if (!out) throw std::runtime_error("write failed: " + path.string());
}

SpatialConfigurationMap read_scm_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  char magic[4];
  in.read(magic, 4);
  if (!in || std::memcmp(magic, kScmMagic, 4) != 0) {
    throw std::runtime_error("scm file: bad magic in " + path.string());
  }
  if (read_u32(in) != kScmVersion) {
    throw std::runtime_error("scm file: unsupported version");
  }
  const std::uint32_t h = read_u32(in), w = read_u32(in), ch = read_u32(in);
  char tag[4];
  in.read(tag, 4);
  if (!in || h != w || ch != 3 || std::memcmp(tag, kScmChannelTag, 4) != 0) {
    throw std::runtime_error("scm file: unexpected layout");
  }
  SpatialConfigurationMap scm;
  scm.m = static_cast<int>(h);
  for (int k = 0; k < 3; ++k) {
    scm.channels[k].resize(scm.m, scm.m);
    for (int r = 0; r < scm.m; ++r) {
      for (int c = 0; c < scm.m; ++c) {
        float v = 0.0f;
        in.read(reinterpret_cast<char*>(&v), sizeof v);
        scm.channels[k](r, c) = v;
      }
    }
  }
  if (!in) throw std::runtime_error("scm file: truncated payload");
  return scm;
}

}  // namespace pmf
