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
#include <doctest.h>

#include <filesystem>
#include <random>
#include <set>

#include "oracles.hpp"
#include "pmf/spatial_config.hpp"
#include "scm_fixtures.hpp"

using pmf::Box;

namespace {

std::vector<double> as_vector(const pmf::Grid& g) {
  std::vector<double> out;
  for (int r = 0; r < g.rows(); ++r)
    for (int c = 0; c < g.cols(); ++c) out.push_back(g(r, c));
  return out;
}

Box union_of(const pmf::HOIProposal& p) {
  return {std::min(p.human.x1, p.object.x1), std::min(p.human.y1, p.object.y1),
          std::max(p.human.x2, p.object.x2), std::max(p.human.y2, p.object.y2)};
}

pmf::HOIProposal random_proposal(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> pos(0, 200), size(20, 120), unit(0, 1);
  pmf::HOIProposal p;
  const double hx = pos(rng), hy = pos(rng);
  p.human = {hx, hy, hx + size(rng), hy + size(rng)};
  const double ox = pos(rng), oy = pos(rng);
  p.object = {ox, oy, ox + size(rng) / 3, oy + size(rng) / 3};
  for (auto& j : p.pose.joints) {
    j = {p.human.x1 + unit(rng) * p.human.width(), p.human.y1 + unit(rng) * p.human.height(), 1.0};
  }
  return p;
}

}  // namespace

TEST_CASE("skeleton constants") {
  const pmf::Skeleton s = pmf::Skeleton::coco();
  CHECK(s.edges == oracle::coco_skeleton());
  REQUIRE(s.intensities.size() == 19);
  CHECK(s.intensities.front() == doctest::Approx(0.05));
  CHECK(s.intensities.back() == doctest::Approx(0.95));
  for (std::size_t i = 1; i < s.intensities.size(); ++i) {
    CHECK(s.intensities[i] - s.intensities[i - 1] == doctest::Approx(0.05));
  }
}

TEST_CASE("rasterize_mask examples") {
  const Box u{0, 0, 64, 64};
  CHECK((pmf::rasterize_mask(u, u, 64) == 1.0).all());
  const pmf::Grid half = pmf::rasterize_mask(Box{0, 0, 32, 64}, u, 64);
  CHECK((half.leftCols(32) == 1.0).all());
  CHECK((half.rightCols(32) == 0.0).all());
  const Box box{10, 10, 30, 50};
  CHECK(as_vector(pmf::rasterize_mask(box, u, 64)) == oracle::mask(box, u, 64));
  CHECK((pmf::rasterize_mask(Box{100, 100, 110, 110}, u, 16) == 0.0).all());
}

TEST_CASE("rasterize_mask matches the cell-centre oracle on random boxes") {
  std::mt19937_64 rng(2);
  for (int i = 0; i < 200; ++i) {
    const pmf::HOIProposal p = random_proposal(rng);
    const Box u = union_of(p);
    CHECK(as_vector(pmf::rasterize_mask(p.object, u, 32)) == oracle::mask(p.object, u, 32));
  }
}

TEST_CASE("rasterize_pose examples") {
  const Box u{0, 0, 64, 64};
  const pmf::Skeleton coco = pmf::Skeleton::coco();

  pmf::Pose point;
  for (auto& j : point.joints) j = {32.0, 32.0, 1.0};
  const pmf::Grid disc = pmf::rasterize_pose(point, u, 64, coco, 3.0);
  std::set<double> values(disc.data(), disc.data() + disc.size());
  CHECK(values == std::set<double>{0.0, coco.intensities.back()});
  for (int r = 0; r < 64; ++r)
    for (int c = 0; c < 64; ++c)
      if (disc(r, c) != 0.0) CHECK((r + 0.5 - 32) * (r + 0.5 - 32) + (c + 0.5 - 32) * (c + 0.5 - 32) <= 2.25);

  pmf::Skeleton one;
  one.edges = {{0, 1}};
  one.intensities = pmf::Skeleton::uniform_intensities(1);
  pmf::Pose line;
  line[0] = {4.0, 20.5, 1.0};
  line[1] = {60.0, 20.5, 1.0};
  const pmf::Grid band = pmf::rasterize_pose(line, u, 64, one, 3.0);
  for (int r = 0; r < 64; ++r) {
    const bool in_band = r >= 19 && r <= 21;
    for (int c = 4; c < 60; ++c) CHECK(band(r, c) == (in_band ? 0.05 : 0.0));
  }

  CHECK_THROWS_AS(pmf::rasterize_pose(line, u, 64, one, 0.0), std::domain_error);
}

TEST_CASE("rasterize_pose matches the distance oracle") {
  const pmf::Skeleton coco = pmf::Skeleton::coco();
  for (const auto& f : fixtures::scm_fixtures()) {
    const Box u = union_of(f.proposal);
    CHECK(as_vector(pmf::rasterize_pose(f.proposal.pose, u, f.m, coco, 3.0)) ==
          oracle::pose_map(f.proposal.pose, u, f.m, oracle::coco_skeleton(), 3.0));
  }
  std::mt19937_64 rng(9);
  for (int i = 0; i < 50; ++i) {
    const pmf::HOIProposal p = random_proposal(rng);
    const Box u = union_of(p);
    CHECK(as_vector(pmf::rasterize_pose(p.pose, u, 32, coco, 3.0)) ==
          oracle::pose_map(p.pose, u, 32, oracle::coco_skeleton(), 3.0));
  }
}

TEST_CASE("build_scm examples") {
  std::mt19937_64 rng(4);
  pmf::HOIProposal p = random_proposal(rng);
  p.object = p.human;
  const auto scm = pmf::build_scm(p, 64, pmf::Skeleton::coco(), 3.0);
  CHECK(scm.m == 64);
  CHECK((scm.channels[0] == scm.channels[1]).all());
  for (const auto& ch : scm.channels) {
    CHECK(ch.rows() == 64);
    CHECK(ch.cols() == 64);
  }
  CHECK(scm.flatten<double>().size() == 64 * 64 * 3);
}

TEST_CASE("build_scm equals the committed golden grids") {
  for (const auto& f : fixtures::scm_fixtures()) {
    CAPTURE(f.name);
    const auto golden = pmf::read_scm_file(std::filesystem::path(PMF_TEST_DATA_DIR) / ("scm_" + f.name + ".bin"));
    const auto scm = pmf::build_scm(f.proposal, f.m, pmf::Skeleton::coco(), 3.0);
    REQUIRE(golden.m == f.m);
    for (int ch = 0; ch < 3; ++ch) {
      const Eigen::ArrayXXf computed = scm.channels[ch].cast<float>();
      const Eigen::ArrayXXf expected = golden.channels[ch].cast<float>();
      CHECK((computed == expected).all());
    }
    const double nonzero = (golden.channels[2] > 0.0).count();
    CHECK(nonzero > 0);
  }
}

TEST_CASE("scm properties") {
  const pmf::Skeleton coco = pmf::Skeleton::coco();
  std::mt19937_64 rng(21);
  for (int i = 0; i < 100; ++i) {
    const pmf::HOIProposal p = random_proposal(rng);
    const auto scm = pmf::build_scm(p, 64, coco, 3.0);
    for (int ch = 0; ch < 2; ++ch) CHECK(((scm.channels[ch] == 0.0) || (scm.channels[ch] == 1.0)).all());
    std::set<double> values(scm.channels[2].data(), scm.channels[2].data() + scm.channels[2].size());
    CHECK(values.size() <= coco.edges.size() + 1);
    for (double v : values) CHECK((v == 0.0 || (v >= 0.05 && v <= 0.95)));

    // Uniform scaling: powers of two exactly, other factors on these inputs.
    for (double s : {0.5, 2.0, 8.0, 1.7, 3.3}) {
      pmf::HOIProposal q = p;
      q.human = p.human.scaled(s);
      q.object = p.object.scaled(s);
      q.pose = p.pose.scaled(s);
      CHECK(pmf::build_scm(q, 64, coco, 3.0) == scm);
    }
  }
}

TEST_CASE("pose map spans the intensity range when every limb is drawn") {
  const auto f = fixtures::scm_fixtures().front();
  const Box u = union_of(f.proposal);
  const pmf::Grid g = pmf::rasterize_pose(f.proposal.pose, u, 256, pmf::Skeleton::coco(), 3.0);
  double lo = 1.0;
  for (Eigen::Index i = 0; i < g.size(); ++i) if (g.data()[i] > 0) lo = std::min(lo, g.data()[i]);
  CHECK(lo == doctest::Approx(0.05));
  CHECK(g.maxCoeff() == doctest::Approx(0.95));
}

TEST_CASE("confidence gating drops limbs with weak joints") {
  auto f = fixtures::scm_fixtures().front();
  const Box u = union_of(f.proposal);
  const pmf::Skeleton coco = pmf::Skeleton::coco();
  const pmf::Grid all = pmf::rasterize_pose(f.proposal.pose, u, 64, coco, 3.0, 0.5);
  for (auto& j : f.proposal.pose.joints) j.confidence = 0.2;
  CHECK((pmf::rasterize_pose(f.proposal.pose, u, 64, coco, 3.0, 0.0) == all).all());
  CHECK((pmf::rasterize_pose(f.proposal.pose, u, 64, coco, 3.0, 0.5) == 0.0).all());
}

TEST_CASE("scm file round trip") {
  const auto f = fixtures::scm_fixtures()[1];
  const auto scm = pmf::build_scm(f.proposal, f.m, pmf::Skeleton::coco(), 3.0);
  const auto path = std::filesystem::temp_directory_path() / "pmf_scm_roundtrip.bin";
  pmf::write_scm_file(path, scm);
  auto stored = scm;
  for (auto& ch : stored.channels) ch = ch.cast<float>().cast<double>();
  CHECK(pmf::read_scm_file(path) == stored);
  std::filesystem::remove(path);
}
