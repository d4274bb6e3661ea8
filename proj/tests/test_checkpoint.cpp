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

#include <cstring>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <string>
#include <vector>

#include "pmf/checkpoint.hpp"
#include "pmf/network.hpp"

namespace fs = std::filesystem;
using pmf::CheckpointError;
using pmf::CheckpointErrorCode;

namespace {

pmf::ModelConfig small_model() {
  pmf::ModelConfig c;
  c.scm_size = 16;
  c.feature_dim = 4;
  c.backbone_c1 = 4;
  c.backbone_c2 = 4;
  c.holistic_dim = 8;
  c.local_dim = 8;
  c.fusion_dim = 8;
  c.attention_dim = 8;
  c.num_actions = 3;
  return c;
}

struct TempDir {
  fs::path path;
  TempDir() : path(fs::temp_directory_path() / "pmf_ckpt_test") {
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
};

std::vector<char> read_bytes(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

void write_bytes(const fs::path& p, const std::vector<char>& bytes) {
  std::ofstream out(p, std::ios::binary | std::ios::trunc);
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
}

template <typename F>
CheckpointErrorCode error_code(F&& f) {
  try {
    f();
  } catch (const CheckpointError& e) {
    return e.code();
  }
  FAIL("no CheckpointError thrown");
  return CheckpointErrorCode::kIo;
}

}  // namespace

TEST_CASE("round trip is exact in both precisions") {
  TempDir dir;
  pmf::PmfNet<float> f(small_model());
  const auto ckpt = pmf::make_checkpoint(f.config(), f.parameters(), 17);
  save_checkpoint(ckpt, dir.path / "f.ckpt");
  const auto back = pmf::load_checkpoint<float>(dir.path / "f.ckpt");
  CHECK(back.iteration == 17);
  CHECK(back.model == f.config());
  REQUIRE(back.tensors.size() == f.parameters().size());
  for (std::size_t i = 0; i < back.tensors.size(); ++i) {
    CHECK(back.tensors[i].name == f.parameters()[i].name);
    CHECK(back.tensors[i].value == f.parameters()[i].value);
  }
  CHECK_FALSE(fs::exists(dir.path / "f.ckpt.tmp"));

  pmf::PmfNet<double> d(small_model());
  save_checkpoint(pmf::make_checkpoint(d.config(), d.parameters()), dir.path / "d.ckpt");
  const auto as_double = pmf::load_checkpoint<double>(dir.path / "d.ckpt");
  for (std::size_t i = 0; i < as_double.tensors.size(); ++i) {
    CHECK(as_double.tensors[i].value == d.parameters()[i].value);
  }
  // Cross-precision loads convert.
  const auto as_float = pmf::load_checkpoint<float>(dir.path / "d.ckpt");
  for (std::size_t i = 0; i < as_float.tensors.size(); ++i) {
    CHECK(as_float.tensors[i].value == d.parameters()[i].value.cast<float>());
  }
}

TEST_CASE("file header layout") {
  TempDir dir;
  pmf::PmfNet<float> f(small_model());
  save_checkpoint(pmf::make_checkpoint(f.config(), f.parameters(), 3), dir.path / "f.ckpt");
  const auto bytes = read_bytes(dir.path / "f.ckpt");
  REQUIRE(bytes.size() > 24);
  CHECK(std::memcmp(bytes.data(), "PMFCKPT\0", 8) == 0);
  std::uint32_t version = 0, scalar = 0;
  std::uint64_t iteration = 0;
  std::memcpy(&version, bytes.data() + 8, 4);
  std::memcpy(&scalar, bytes.data() + 12, 4);
  std::memcpy(&iteration, bytes.data() + 16, 8);
  CHECK(version == pmf::kCheckpointVersion);
  CHECK(scalar == 4);
  CHECK(iteration == 3);
}

TEST_CASE("restore into a network") {
  pmf::ModelConfig c = small_model();
  pmf::PmfNet<float> a(c);
  c.seed = 99;
  pmf::PmfNet<float> b(c);
  CHECK(a.parameters()[0].value != b.parameters()[0].value);
  auto ckpt = pmf::make_checkpoint(a.config(), a.parameters());
  ckpt.tensors.push_back({"momentum:backbone.conv1.weight", a.parameters()[0].value});
  pmf::restore_parameters(ckpt, b.parameters());
  for (std::size_t i = 0; i < a.parameters().size(); ++i) {
    CHECK(a.parameters()[i].value == b.parameters()[i].value);
  }
}

TEST_CASE("distinct error codes") {
  TempDir dir;
  pmf::PmfNet<float> f(small_model());
  const fs::path good = dir.path / "good.ckpt";
  save_checkpoint(pmf::make_checkpoint(f.config(), f.parameters()), good);
  const auto bytes = read_bytes(good);

  SUBCASE("missing file") {
    CHECK(error_code([&] { pmf::load_checkpoint<float>(dir.path / "absent.ckpt"); }) ==
          CheckpointErrorCode::kIo);
  }
  SUBCASE("corrupted magic") {
    auto bad = bytes;
    bad[0] = 'X';
    write_bytes(dir.path / "bad.ckpt", bad);
    CHECK(error_code([&] { pmf::load_checkpoint<float>(dir.path / "bad.ckpt"); }) ==
          CheckpointErrorCode::kVersion);
  }
  SUBCASE("future version") {
    auto bad = bytes;
    bad[8] = 7;
    write_bytes(dir.path / "bad.ckpt", bad);
    CHECK(error_code([&] { pmf::load_checkpoint<float>(dir.path / "bad.ckpt"); }) ==
          CheckpointErrorCode::kVersion);
  }
  SUBCASE("truncated payload") {
    for (std::size_t keep : {std::size_t{10}, std::size_t{30}, bytes.size() / 2, bytes.size() - 1}) {
      write_bytes(dir.path / "cut.ckpt", std::vector<char>(bytes.begin(), bytes.begin() + keep));
      CAPTURE(keep);
      CHECK(error_code([&] { pmf::load_checkpoint<float>(dir.path / "cut.ckpt"); }) ==
            CheckpointErrorCode::kTruncated);
    }
  }
  SUBCASE("trailing garbage") {
    auto bad = bytes;
    bad.push_back('!');
    write_bytes(dir.path / "long.ckpt", bad);
    CHECK(error_code([&] { pmf::load_checkpoint<float>(dir.path / "long.ckpt"); }) ==
          CheckpointErrorCode::kTruncated);
  }
  SUBCASE("unwritable destination") {
    CHECK(error_code([&] {
            save_checkpoint(pmf::make_checkpoint(f.config(), f.parameters()),
                            dir.path / "no" / "such" / "dir" / "x.ckpt");
          }) == CheckpointErrorCode::kIo);
  }
}

TEST_CASE("a checkpoint for another action count is a shape error naming the parameter") {
  pmf::ModelConfig other = small_model();
  other.num_actions = 5;
  pmf::PmfNet<float> wide(other);
  pmf::PmfNet<float> narrow(small_model());
  const auto ckpt = pmf::make_checkpoint(wide.config(), wide.parameters());
  try {
    pmf::restore_parameters(ckpt, narrow.parameters());
    FAIL("expected a shape error");
  } catch (const CheckpointError& e) {
    CHECK(e.code() == CheckpointErrorCode::kShape);
    CHECK(std::string(e.what()).find("fusion.relation.fc2") != std::string::npos);
  }
}

TEST_CASE("missing and unexpected tensors are name errors") {
  pmf::PmfNet<float> full(small_model());
  pmf::ModelConfig base = small_model();
  base.flags = pmf::AblationFlags::holistic_baseline();
  pmf::PmfNet<float> holistic(base);
  const auto from_full = pmf::make_checkpoint(full.config(), full.parameters());
  const auto from_base = pmf::make_checkpoint(holistic.config(), holistic.parameters());
  CHECK(error_code([&] { pmf::restore_parameters(from_full, holistic.parameters()); }) ==
        CheckpointErrorCode::kName);
  CHECK(error_code([&] { pmf::restore_parameters(from_base, full.parameters()); }) ==
        CheckpointErrorCode::kName);
}
