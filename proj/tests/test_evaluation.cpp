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

#include <cmath>
#include <filesystem>
#include <random>

#include "oracles.hpp"
#include "pmf/evaluation.hpp"

using pmf::Box;
using pmf::Detection;
using pmf::GroundTruthRecord;

namespace {

Box jittered(const Box& b, std::mt19937_64& rng, double amount) {
  std::uniform_real_distribution<double> u(-amount, amount);
  return {b.x1 + u(rng), b.y1 + u(rng), b.x2 + u(rng), b.y2 + u(rng)};
}

// Ten images, three actions, detections near ground truth plus false positives.
struct Fixture {
  std::vector<GroundTruthRecord> gts;
  std::vector<Detection> dets;
};

Fixture make_fixture(std::uint64_t seed, int false_positives) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Fixture f;
  for (int img = 0; img < 10; ++img) {
    const int pairs = 1 + img % 3;
    for (int p = 0; p < pairs; ++p) {
      const double x = 30.0 * p + 5 * u(rng), y = 10 * u(rng);
      const Box human{x, y, x + 20, y + 40};
      const Box object{x + 15, y + 20, x + 25, y + 30};
      for (int a = 0; a < 3; ++a) {
        if (u(rng) < 0.6) f.gts.push_back({img, human, object, 1, a});
        if (u(rng) < 0.8) {
          f.dets.push_back({img, jittered(human, rng, 3.0), jittered(object, rng, 2.0), 1, a, u(rng)});
        }
      }
    }
  }
  for (int i = 0; i < false_positives; ++i) {
    const double x = 100 * u(rng);
    f.dets.push_back({static_cast<int>(u(rng) * 10), {x, 0, x + 20, 40}, {x + 5, 5, x + 15, 15}, 1,
                      static_cast<int>(u(rng) * 3), u(rng)});
  }
  return f;
}

double oracle_ap(const Fixture& f, int action, double thr = 0.5) {
  std::vector<oracle::Det> dets;
  std::vector<oracle::Gt> gts;
  for (const auto& d : f.dets)
    if (d.action == action) dets.push_back({d.image_id, d.human, d.object, d.score});
  for (const auto& g : f.gts)
    if (g.action == action) gts.push_back({g.image_id, g.human, g.object});
  return oracle::threshold_sweep_ap(dets, gts, thr);
}

}  // namespace

TEST_CASE("average precision of hand-written curves") {
  const std::vector<pmf::PrPoint> perfect{{0.9, 0.5, 1.0}, {0.8, 1.0, 1.0}};
  CHECK(pmf::average_precision(perfect) == 1.0);
  // TP, FP, TP over two ground truths: 0.5 * 1 + 0.5 * (2/3).
  const std::vector<pmf::PrPoint> mixed{{0.9, 0.5, 1.0}, {0.8, 0.5, 0.5}, {0.7, 1.0, 2.0 / 3}};
  CHECK(pmf::average_precision(mixed) == doctest::Approx(0.5 + 1.0 / 3));
  CHECK(pmf::average_precision({}) == 0.0);
}

TEST_CASE("perfect and empty detectors") {
  const Fixture f = make_fixture(1, 0);
  std::vector<Detection> exact;
  double s = 1.0;
  for (const auto& g : f.gts) exact.push_back({g.image_id, g.human, g.object, g.object_class, g.action, s -= 1e-3});
  const auto perfect = pmf::evaluate(exact, f.gts);
  REQUIRE(perfect.map.has_value());
  CHECK(*perfect.map == 1.0);
  for (const auto& a : perfect.actions) CHECK(a.ap == 1.0);

  const auto none = pmf::evaluate({}, f.gts);
  for (const auto& a : none.actions) CHECK(a.ap == 0.0);
  CHECK(none.map == 0.0);
}

TEST_CASE("AP equals the threshold-sweep oracle on the fixture") {
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    const Fixture f = make_fixture(seed, 8);
    const auto report = pmf::evaluate(f.dets, f.gts, {0.5, false, 3});
    REQUIRE(report.actions.size() == 3);
    for (int a = 0; a < 3; ++a) {
      CAPTURE(seed);
      CAPTURE(a);
      if (report.actions[a].num_ground_truth == 0) continue;
      CHECK(*report.actions[a].ap == oracle_ap(f, a));
    }
  }
}

TEST_CASE("actions without ground truth are undefined") {
  std::vector<GroundTruthRecord> gts{{0, {0, 0, 10, 10}, {5, 5, 9, 9}, 1, 0}};
  std::vector<Detection> dets{{0, {0, 0, 10, 10}, {5, 5, 9, 9}, 1, 0, 0.9},
                              {0, {0, 0, 10, 10}, {5, 5, 9, 9}, 1, 2, 0.8}};
  const auto r = pmf::evaluate(dets, gts);
  REQUIRE(r.actions.size() == 3);
  CHECK(r.actions[0].ap == 1.0);
  CHECK_FALSE(r.actions[1].ap.has_value());
  CHECK_FALSE(r.actions[2].ap.has_value());
  CHECK(r.map == 1.0);
  CHECK(r.notices.size() == 2);
  CHECK_FALSE(pmf::evaluate({}, {}).map.has_value());
}

TEST_CASE("matching is one-to-one and needs both boxes") {
  const GroundTruthRecord gt{0, {0, 0, 10, 10}, {20, 20, 30, 30}, 1, 0};
  std::vector<Detection> dets{{0, gt.human, gt.object, 1, 0, 0.9},
                              {0, gt.human, gt.object, 1, 0, 0.8},
                              {0, gt.human, {40, 40, 50, 50}, 1, 0, 0.95},
                              {1, gt.human, gt.object, 1, 0, 0.99}};
  const auto r = pmf::evaluate(dets, std::vector{gt});
  CHECK(r.actions[0].true_positives == 1);
  // Order: image 1 (FP), wrong object (FP), TP, duplicate (FP).
  CHECK(r.actions[0].ap == doctest::Approx(1.0 / 3));
}

TEST_CASE("object class agreement is optional") {
  const GroundTruthRecord gt{0, {0, 0, 10, 10}, {20, 20, 30, 30}, 2, 0};
  const std::vector<Detection> dets{{0, gt.human, gt.object, 3, 0, 0.9}};
  CHECK(pmf::evaluate(dets, std::vector{gt}).actions[0].ap == 1.0);
  CHECK(pmf::evaluate(dets, std::vector{gt}, {0.5, true, 0}).actions[0].ap == 0.0);
}

TEST_CASE("equal scores resolve by image id, then input order") {
  const GroundTruthRecord gt{1, {0, 0, 10, 10}, {20, 20, 30, 30}, 1, 0};
  std::vector<Detection> dets{{1, gt.human, gt.object, 1, 0, 0.5}, {0, gt.human, gt.object, 1, 0, 0.5}};
  const auto r = pmf::evaluate(dets, std::vector{gt});
  REQUIRE(r.actions[0].curve.size() == 2);
  CHECK(r.actions[0].curve[0].precision == 0.0);  // image 0 first
  CHECK(r.actions[0].ap == 0.5);
}

TEST_CASE("strictly increasing score transforms leave AP unchanged") {
  const Fixture f = make_fixture(7, 10);
  const auto base = pmf::evaluate(f.dets, f.gts);
  for (auto transform : {+[](double s) { return std::exp(3 * s); }, +[](double s) { return s * s * s - 4; },
                         +[](double s) { return std::atan(s) / 10; }}) {
    Fixture g = f;
    for (auto& d : g.dets) d.score = transform(d.score);
    const auto r = pmf::evaluate(g.dets, g.gts);
    for (std::size_t a = 0; a < r.actions.size(); ++a) CHECK(r.actions[a].ap == base.actions[a].ap);
  }
}

TEST_CASE("removing a false positive never lowers AP") {
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    const Fixture f = make_fixture(seed, 6);
    const auto base = pmf::evaluate(f.dets, f.gts, {0.5, false, 3});
    for (std::size_t drop = 0; drop < f.dets.size(); ++drop) {
      const Detection& d = f.dets[drop];
      bool matches_any = false;
      for (const auto& g : f.gts) {
        matches_any |= g.image_id == d.image_id && g.action == d.action &&
                       pmf::iou(g.human, d.human) >= 0.5 && pmf::iou(g.object, d.object) >= 0.5;
      }
      if (matches_any) continue;
      Fixture g = f;
      g.dets.erase(g.dets.begin() + static_cast<std::ptrdiff_t>(drop));
      const auto r = pmf::evaluate(g.dets, g.gts, {0.5, false, 3});
      for (std::size_t a = 0; a < 3; ++a) {
        if (base.actions[a].ap) CHECK(*r.actions[a].ap >= *base.actions[a].ap);
      }
    }
  }
}

TEST_CASE("evaluation rejects bad input") {
  const std::vector<Detection> nan{{0, {0, 0, 1, 1}, {0, 0, 1, 1}, 1, 0, std::nan("")}};
  CHECK_THROWS_AS(pmf::evaluate(nan, {}), std::invalid_argument);
  CHECK_THROWS_AS(pmf::evaluate({}, {}, {1.5, false, 0}), std::invalid_argument);
  const std::vector<Detection> wide{{0, {0, 0, 1, 1}, {0, 0, 1, 1}, 1, 5, 0.5}};
  CHECK_THROWS_AS(pmf::evaluate(wide, {}, {0.5, false, 3}), std::out_of_range);
}

TEST_CASE("split reports") {
  const Fixture f = make_fixture(3, 5);
  const auto r = pmf::evaluate(f.dets, f.gts, {0.5, false, 3});
  const std::vector<pmf::ActionGroup> all{{"all", {0, 1, 2}}};
  CHECK(pmf::split_report(r, all)[0].map == r.map);

  const std::vector<pmf::ActionGroup> two{{"a", {0, 2}}, {"b", {1}}};
  const auto s = pmf::split_report(r, two);
  CHECK(s[0].map == doctest::Approx((*r.actions[0].ap + *r.actions[2].ap) / 2));
  CHECK(s[1].map == doctest::Approx(*r.actions[1].ap));

  pmf::EvalReport equal;
  for (int a = 0; a < 4; ++a) equal.actions.push_back({a, 1, 1, 1, 0.625, {}});
  equal.map = 0.625;
  const std::vector<pmf::ActionGroup> halves{{"x", {0, 1}}, {"y", {2, 3}}};
  for (const auto& sr : pmf::split_report(equal, halves)) CHECK(sr.map == 0.625);

  const std::vector<pmf::ActionGroup> overlap{{"a", {0, 1}}, {"b", {1, 2}}};
  CHECK_THROWS_AS(pmf::split_report(r, overlap), std::invalid_argument);
  const std::vector<pmf::ActionGroup> partial{{"a", {0, 1}}};
  CHECK_THROWS_AS(pmf::split_report(r, partial), std::invalid_argument);

  pmf::EvalReport sparse = r;
  sparse.actions[1].ap.reset();
  CHECK_FALSE(pmf::split_report(sparse, two)[1].map.has_value());
}

TEST_CASE("report serialisation") {
  const Fixture f = make_fixture(4, 2);
  const auto r = pmf::evaluate(f.dets, f.gts, {0.5, false, 3});
  const auto j = pmf::report_to_json(r);
  CHECK(j.at("actions").size() == 3);
  CHECK(j.at("map").get<double>() == *r.map);
  const std::string table = pmf::report_table(r);
  CHECK(table.find("mAP") != std::string::npos);
}

TEST_CASE("detection and ground-truth JSONL round trip") {
  const Fixture f = make_fixture(5, 3);
  const auto dir = std::filesystem::temp_directory_path() / "pmf_eval_io";
  std::filesystem::create_directories(dir);
  pmf::write_detections(dir / "d.jsonl", f.dets);
  pmf::write_ground_truth(dir / "g.jsonl", f.gts);
  CHECK(pmf::read_detections(dir / "d.jsonl") == f.dets);
  CHECK(pmf::read_ground_truth(dir / "g.jsonl") == f.gts);
  const auto j = pmf::to_json(f.dets[0]);
  for (const char* key : {"image_id", "human_box", "object_box", "object_class", "action_id", "score"}) {
    CHECK(j.contains(key));
  }
  CHECK_FALSE(pmf::to_json(f.gts[0]).contains("score"));
  std::filesystem::remove_all(dir);
}
