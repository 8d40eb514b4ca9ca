// Copyright 2026 The CARAT Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
#include "carat/io/archive.hpp"

#include <algorithm>
#include <bit>
#include <fstream>

#include "carat/util.hpp"

namespace carat {
namespace {

constexpr char kMagic[9] = "CRTARCH1";

void put_u32(std::string& out, uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

void put_u64(std::string& out, uint64_t v) {
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

void put_f64(std::string& out, double v) { put_u64(out, std::bit_cast<uint64_t>(v)); }

void put_str(std::string& out, const std::string& s) {
  require(s.size() <= UINT32_MAX, "archive: string too long");
  put_u32(out, static_cast<uint32_t>(s.size()));
  out.append(s);
}

class Reader {
 public:
  Reader(std::string bytes, std::string path) : bytes_(std::move(bytes)), path_(std::move(path)) {}

  uint32_t u32() {
    need(4);
    uint32_t v = 0;
    for (int i = 0; i < 4; ++i)
      v |= static_cast<uint32_t>(static_cast<unsigned char>(bytes_[pos_ + static_cast<size_t>(i)]))
           << (8 * i);
    pos_ += 4;
    return v;
  }

  uint64_t u64() {
    need(8);
    uint64_t v = 0;
    for (int i = 0; i < 8; ++i)
      v |= static_cast<uint64_t>(static_cast<unsigned char>(bytes_[pos_ + static_cast<size_t>(i)]))
           << (8 * i);
    pos_ += 8;
    return v;
  }

  double f64() { return std::bit_cast<double>(u64()); }

  std::string str() {
    const uint32_t n = u32();
    need(n);
    std::string s = bytes_.substr(pos_, n);
    pos_ += n;
    return s;
  }

  size_t pos() const { return pos_; }
  size_t size() const { return bytes_.size(); }

 private:
  void need(size_t n) {
    require(bytes_.size() - pos_ >= n, "archive: truncated file " + path_);
  }

  std::string bytes_;
  std::string path_;
  size_t pos_ = 0;
};

}  // namespace

void write_archive(const std::string& path, const Archive& archive) {
  std::string body;
  body.append(kMagic, 8);
  put_str(body, archive.kind);
  put_u64(body, archive.schema_hash);
  put_u64(body, archive.config_digest);
  put_u64(body, archive.seed);
  put_str(body, archive.config_json);
  put_u32(body, static_cast<uint32_t>(archive.tensors.size()));
  for (const auto& t : archive.tensors) {
    put_str(body, t.name);
    put_u32(body, static_cast<uint32_t>(t.shape.size()));
    int64_t count = 1;
    for (int64_t d : t.shape) {
      require(d > 0, "archive: tensor dimension must be positive");
      put_u64(body, static_cast<uint64_t>(d));
      count *= d;
    }
    require(static_cast<int64_t>(t.data.size()) == count,
            "archive: tensor " + t.name + " has " + std::to_string(t.data.size()) +
                " values for its shape");
    put_u64(body, static_cast<uint64_t>(t.data.size()));
    for (double v : t.data) put_f64(body, v);
  }
  put_u64(body, fnv1a64(std::string_view(body)));

  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  require(out.good(), "archive: cannot open " + path + " for writing");
  out.write(body.data(), static_cast<std::streamsize>(body.size()));
  out.flush();
  require(out.good(), "archive: write failed for " + path);
}

Archive read_archive(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  require(in.good(), "archive: cannot open " + path);
  std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  require(bytes.size() >= 16, "archive: truncated file " + path);

  const uint64_t stored = [&] {
    uint64_t v = 0;
    for (int i = 0; i < 8; ++i)
      v |= static_cast<uint64_t>(static_cast<unsigned char>(bytes[bytes.size() - 8 +
                                                                  static_cast<size_t>(i)]))
           << (8 * i);
    return v;
  }();
  const std::string_view payload(bytes.data(), bytes.size() - 8);
  require(fnv1a64(payload) == stored, "archive: digest mismatch (corrupt file) " + path);

  require(bytes.compare(0, 8, kMagic, 8) == 0, "archive: bad magic in " + path);
  Reader body(bytes.substr(8, bytes.size() - 16), path);

  Archive a;
  a.kind = body.str();
  a.schema_hash = body.u64();
  a.config_digest = body.u64();
  a.seed = body.u64();
  a.config_json = body.str();
  const uint32_t n_tensors = body.u32();
  a.tensors.reserve(n_tensors);
  for (uint32_t i = 0; i < n_tensors; ++i) {
    ArchiveTensor t;
    t.name = body.str();
    const uint32_t ndim = body.u32();
    int64_t count = 1;
    for (uint32_t d = 0; d < ndim; ++d) {
      const uint64_t dim = body.u64();
      require(dim > 0 && dim <= static_cast<uint64_t>(INT64_MAX), "archive: bad dimension in " + path);
      t.shape.push_back(static_cast<int64_t>(dim));
      require(count <= static_cast<int64_t>(INT64_MAX / dim), "archive: shape overflow in " + path);
      count *= static_cast<int64_t>(dim);
    }
    const uint64_t n_values = body.u64();
    require(n_values == static_cast<uint64_t>(count),
            "archive: tensor " + t.name + " value count disagrees with its shape");
    t.data.resize(n_values);
    for (uint64_t v = 0; v < n_values; ++v) t.data[v] = body.f64();
    a.tensors.push_back(std::move(t));
  }
  require(body.pos() == body.size(), "archive: trailing bytes in " + path);
  return a;
}

Archive pack_params(std::string kind, uint64_t schema_hash, uint64_t config_digest, uint64_t seed,
                    std::string config_json, const std::vector<nn::Param*>& params) {
  Archive a;
  a.kind = std::move(kind);
  a.schema_hash = schema_hash;
  a.config_digest = config_digest;
  a.seed = seed;
  a.config_json = std::move(config_json);
  for (const nn::Param* p : params) {
    require(p != nullptr && !p->name.empty(), "pack_params: unnamed parameter");
    a.tensors.push_back(ArchiveTensor{p->name, p->value.shape, p->value.v});
  }
  return a;
}

void unpack_params(const Archive& archive, const std::vector<nn::Param*>& params) {
  require(archive.tensors.size() == params.size(),
          "unpack_params: archive holds " + std::to_string(archive.tensors.size()) +
              " tensors for " + std::to_string(params.size()) + " parameters");
  for (size_t i = 0; i < params.size(); ++i) {
    const auto& t = archive.tensors[i];
    nn::Param* p = params[i];
    require(t.name == p->name,
            "unpack_params: expected parameter " + p->name + ", archive has " + t.name);
    require(t.shape == p->value.shape, "unpack_params: shape mismatch for " + t.name);
    p->value.v = t.data;
    std::fill(p->grad.v.begin(), p->grad.v.end(), 0.0);
  }
}

}  // namespace carat
