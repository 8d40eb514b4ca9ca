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
#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "carat/nn/tensor.hpp"

namespace carat {

struct ArchiveTensor {
  std::string name;
  std::vector<int64_t> shape;
  std::vector<double> data;
};

// Trained-model container. Every artifact carries the identity triple
// (schema hash, config digest, seed) so stages can refuse mismatched
// inputs, plus the full config as JSON for reloading.
struct Archive {
  std::string kind;
  uint64_t schema_hash = 0;
  uint64_t config_digest = 0;
  uint64_t seed = 0;
  std::string config_json;
  std::vector<ArchiveTensor> tensors;
};

// Little-endian binary layout with a trailing FNV-1a digest over the body;
// readers verify magic, sizes, and the digest.
void write_archive(const std::string& path, const Archive& archive);
Archive read_archive(const std::string& path);

// Copies named parameters into / out of an archive. Unpacking requires the
// same parameter names and shapes in the same order.
Archive pack_params(std::string kind, uint64_t schema_hash, uint64_t config_digest, uint64_t seed,
                    std::string config_json, const std::vector<nn::Param*>& params);
void unpack_params(const Archive& archive, const std::vector<nn::Param*>& params);

}  // namespace carat
