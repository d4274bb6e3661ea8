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
#include "pmf/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>
#include <system_error>

namespace pmf {
namespace {

static_assert(std::endian::native == std::endian::little, "little-endian host required");

constexpr char kMagic[8] = {'P', 'M', 'F', 'C', 'K', 'P', 'T', '\0'};
constexpr std::string_view kMomentumPrefix = "momentum:";

class Writer {
 public:
  void bytes(const void* p, std::size_t n) {
    const auto* c = static_cast<const char*>(p);
    buf_.insert(buf_.end(), c, c + n);
  }
  template <typename T>
  void value(T v) { bytes(&v, sizeof v); }
  void text(const std::string& s) {
    value(static_cast<std::uint32_t>(s.size()));
    bytes(s.data(), s.size());
  }
  const std::vector<char>& buffer() const { return buf_; }

 private:
  std::vector<char> buf_;
};

class Reader {
 public:
  explicit Reader(std::vector<char> buf) : buf_(std::move(buf)) {}
  void bytes(void* p, std::size_t n) {
    if (buf_.size() - pos_ < n) {
      throw CheckpointError(CheckpointErrorCode::kTruncated, "checkpoint truncated");
    }
    std::memcpy(p, buf_.data() + pos_, n);
    pos_ += n;
  }
  template <typename T>
  T value() {
    T v;
    bytes(&v, sizeof v);
    return v;
  }
  std::string text() {
    const auto n = value<std::uint32_t>();
    std::string s(n, '\0');
    bytes(s.data(), n);
    return s;
  }
  bool at_end() const { return pos_ == buf_.size(); }

 private:
  std::vector<char> buf_;
  std::size_t pos_ = 0;
};

template <typename Out, typename In>
void read_payload(Reader& r, RowMatrix<Out>& m) {
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = static_cast<Out>(r.value<In>());
}

}  // namespace

template <typename Scalar>
const NamedTensor<Scalar>* Checkpoint<Scalar>::find(const std::string& name) const {
  for (const auto& t : tensors) {
    if (t.name == name) return &t;
  }
  return nullptr;
}

template <typename Scalar>
void save_checkpoint(const Checkpoint<Scalar>& ckpt, const std::filesystem::path& path) {
  Writer w;
  w.bytes(kMagic, sizeof kMagic);
  w.value(kCheckpointVersion);
  w.value(static_cast<std::uint32_t>(sizeof(Scalar)));
  w.value(static_cast<std::uint64_t>(ckpt.iteration));
  w.text(format_model_config(ckpt.model));
  w.value(static_cast<std::uint32_t>(ckpt.tensors.size()));
  for (const auto& t : ckpt.tensors) {
    w.text(t.name);
    w.value(static_cast<std::uint32_t>(t.value.rows()));
    w.value(static_cast<std::uint32_t>(t.value.cols()));
    w.bytes(t.value.data(), static_cast<std::size_t>(t.value.size()) * sizeof(Scalar));
  }

  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw CheckpointError(CheckpointErrorCode::kIo, "cannot write " + tmp.string());
    out.write(w.buffer().data(), static_cast<std::streamsize>(w.buffer().size()));
    if (!out.flush()) {
      throw CheckpointError(CheckpointErrorCode::kIo, "write failed for " + tmp.string());
    }
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    throw CheckpointError(CheckpointErrorCode::kIo,
                          "cannot move checkpoint into " + path.string() + ": " + ec.message());
  }
}

template <typename Scalar>
Checkpoint<Scalar> load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw CheckpointError(CheckpointErrorCode::kIo, "cannot read " + path.string());
  Reader r(std::vector<char>(std::istreambuf_iterator<char>(in), {}));

  char magic[sizeof kMagic];
  r.bytes(magic, sizeof magic);
  if (std::memcmp(magic, kMagic, sizeof kMagic) != 0) {
    throw CheckpointError(CheckpointErrorCode::kVersion, "not a checkpoint (bad magic)");
  }
  const auto version = r.value<std::uint32_t>();
  if (version != kCheckpointVersion) {
    throw CheckpointError(CheckpointErrorCode::kVersion,
                          "checkpoint version " + std::to_string(version) + ", expected " +
                              std::to_string(kCheckpointVersion));
  }
  const auto scalar_bytes = r.value<std::uint32_t>();
  if (scalar_bytes != 4 && scalar_bytes != 8) {
    throw CheckpointError(CheckpointErrorCode::kVersion,
                          "unsupported scalar width " + std::to_string(scalar_bytes));
  }
  Checkpoint<Scalar> ckpt;
  ckpt.iteration = r.value<std::uint64_t>();
  try {
    ckpt.model = parse_model_config(r.text());
  } catch (const ConfigError& e) {
    throw CheckpointError(CheckpointErrorCode::kVersion,
                          std::string("checkpoint model config: ") + e.what());
  }
  const auto count = r.value<std::uint32_t>();
  for (std::uint32_t i = 0; i < count; ++i) {
    NamedTensor<Scalar> t;
    t.name = r.text();
    const auto rows = r.value<std::uint32_t>();
    const auto cols = r.value<std::uint32_t>();
    t.value.resize(rows, cols);
    if (scalar_bytes == 4) {
      read_payload<Scalar, float>(r, t.value);
    } else {
      read_payload<Scalar, double>(r, t.value);
    }
    ckpt.tensors.push_back(std::move(t));
  }
  if (!r.at_end()) {
    throw CheckpointError(CheckpointErrorCode::kTruncated, "trailing bytes after checkpoint");
  }
  return ckpt;
}

template <typename Scalar>
Checkpoint<Scalar> make_checkpoint(const ModelConfig& model, const ParameterSet<Scalar>& params,
                                   std::uint64_t iteration) {
  Checkpoint<Scalar> ckpt;
  ckpt.model = model;
  ckpt.iteration = iteration;
  for (const auto& p : params) ckpt.tensors.push_back({p.name, p.value});
  return ckpt;
}

template <typename Scalar>
void restore_parameters(const Checkpoint<Scalar>& ckpt, ParameterSet<Scalar>& params) {
  for (const auto& t : ckpt.tensors) {
    if (t.name.starts_with(kMomentumPrefix)) continue;
    if (params.find(t.name) == nullptr) {
      throw CheckpointError(CheckpointErrorCode::kName,
                            "checkpoint parameter '" + t.name + "' is not part of the model");
    }
  }
  for (auto& p : params) {
    const NamedTensor<Scalar>* t = ckpt.find(p.name);
    if (t == nullptr) {
      throw CheckpointError(CheckpointErrorCode::kName,
                            "checkpoint lacks parameter '" + p.name + "'");
    }
    if (t->value.rows() != p.value.rows() || t->value.cols() != p.value.cols()) {
      throw CheckpointError(CheckpointErrorCode::kShape,
                            "parameter '" + p.name + "' has shape " +
                                std::to_string(t->value.rows()) + "x" +
                                std::to_string(t->value.cols()) + " in the checkpoint, model wants " +
                                std::to_string(p.value.rows()) + "x" +
                                std::to_string(p.value.cols()));
    }
    p.value = t->value;
  }
}

#define PMF_INSTANTIATE(S)                                                              \
  template struct Checkpoint<S>;                                                        \
  template void save_checkpoint<S>(const Checkpoint<S>&, const std::filesystem::path&); \
  template Checkpoint<S> load_checkpoint<S>(const std::filesystem::path&);              \
  template Checkpoint<S> make_checkpoint<S>(const ModelConfig&, const ParameterSet<S>&, \
                                            std::uint64_t);                             \
  template void restore_parameters<S>(const Checkpoint<S>&, ParameterSet<S>&);
PMF_INSTANTIATE(float)
PMF_INSTANTIATE(double)
#undef PMF_INSTANTIATE

}  // namespace pmf
