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

#include "gradcheck.hpp"

TEST_CASE("every parameter gradient matches central differences") {
  const gradcheck::Problem p = gradcheck::minimal_problem(1);
  const gradcheck::Report r = gradcheck::run(p);
  MESSAGE("checked " << r.checked << " scalars, worst " << r.worst << " at " << r.worst_name
                     << "[" << r.worst_index << "]");
  CHECK(r.checked == pmf::PmfNet<double>(p.config).parameters().scalar_count());
  CHECK(r.worst <= 1e-4);
}

TEST_CASE("gradients stay exact with ablated components") {
  for (const auto flags : {pmf::AblationFlags::holistic_baseline(),
                           pmf::AblationFlags{true, true, false, false, false},
                           pmf::AblationFlags{false, true, true, true, true}}) {
    gradcheck::Problem p = gradcheck::minimal_problem(2);
    p.config.flags = flags;
    const gradcheck::Report r = gradcheck::run(p);
    CHECK(r.worst <= 1e-4);
  }
}
