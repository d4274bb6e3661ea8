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
// Writes the golden spatial-configuration grids for the committed fixtures,
// computed by the reference rasterizer.
//   make_scm_golden <output directory>

#include <filesystem>
#include <iostream>

#include "oracles.hpp"
#include "pmf/spatial_config.hpp"
#include "scm_fixtures.hpp"

int main(int argc, char** argv) {
  if (argc != 2) {
    std::cerr << "usage: make_scm_golden <dir>\n";
    return 2;
  }
  const std::filesystem::path dir = argv[1];
  std::filesystem::create_directories(dir);
  for (const auto& f : fixtures::scm_fixtures()) {
    const pmf::HOIProposal& p = f.proposal;
    const pmf::Box u{std::min(p.human.x1, p.object.x1), std::min(p.human.y1, p.object.y1),
                     std::max(p.human.x2, p.object.x2), std::max(p.human.y2, p.object.y2)};
    const std::array<std::vector<double>, 3> grids = {
        oracle::mask(p.human, u, f.m), oracle::mask(p.object, u, f.m),
        oracle::pose_map(p.pose, u, f.m, oracle::coco_skeleton(), 3.0)};
    pmf::SpatialConfigurationMap scm;
    scm.m = f.m;
    for (int ch = 0; ch < 3; ++ch) {
      scm.channels[ch] = Eigen::Map<const Eigen::Array<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(
          grids[ch].data(), f.m, f.m);
    }
    const auto path = dir / ("scm_" + f.name + ".bin");
    pmf::write_scm_file(path, scm);
    std::cout << path.string() << '\n';
  }
  return 0;
}
