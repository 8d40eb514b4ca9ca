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
#include "carat/data/schema.hpp"

#include <algorithm>
#include <unordered_set>

namespace carat {

int64_t DomainSchema::entity_index(int64_t j, const std::string& label) const {
  const auto& v = vocab[static_cast<size_t>(j)];
  const auto it = std::lower_bound(v.begin(), v.end(), label);
  if (it == v.end() || *it != label)
    fail("unknown entity '" + label + "' in domain '" + domains[static_cast<size_t>(j)] + "'");
  return it - v.begin();
}

const std::string& DomainSchema::entity_label(int64_t j, int64_t index) const {
  const auto& v = vocab[static_cast<size_t>(j)];
  require(index >= 0 && index < static_cast<int64_t>(v.size()), "entity index out of range");
  return v[static_cast<size_t>(index)];
}

void DomainSchema::validate() const {
  require(m() >= 2, "schema needs at least two domains");
  require(vocab.size() == domains.size(), "schema: one vocabulary per domain required");
  std::unordered_set<std::string> names(domains.begin(), domains.end());
  require(static_cast<int64_t>(names.size()) == m(), "schema: duplicate domain name");
  for (int64_t j = 0; j < m(); ++j) {
    const auto& v = vocab[static_cast<size_t>(j)];
    require(!v.empty(), "schema: empty vocabulary in domain '" + domains[static_cast<size_t>(j)] + "'");
    require(std::is_sorted(v.begin(), v.end()), "schema: vocabulary must be sorted");
    for (size_t i = 1; i < v.size(); ++i)
      require(v[i] != v[i - 1], "schema: duplicate entity label '" + v[i] + "'");
  }
}

uint64_t DomainSchema::hash() const {
  uint64_t h = fnv1a64("carat-schema-v1");
  for (size_t j = 0; j < domains.size(); ++j) {
    h = fnv1a64(domains[j], h);
    h = fnv1a64(std::string_view("\x1f", 1), h);
    for (const std::string& e : vocab[j]) {
      h = fnv1a64(e, h);
      h = fnv1a64(std::string_view("\x1e", 1), h);
    }
    h = fnv1a64(std::string_view("\x1d", 1), h);
  }
  return h;
}

void validate_record(const DomainSchema& schema, const EncodedRecord& r, bool allow_mask) {
  require(static_cast<int64_t>(r.values.size()) == schema.m(), "record arity != domain count");
  for (int64_t j = 0; j < schema.m(); ++j) {
    const int64_t v = r.values[static_cast<size_t>(j)];
    const int64_t hi = schema.vocab_size(j) + (allow_mask ? 1 : 0);
    require(v >= 0 && v < hi, "record value out of vocabulary range");
  }
}

void Dataset::validate() const {
  schema.validate();
  require(!train.empty(), "dataset: empty training split");
  for (const EncodedRecord& r : train) validate_record(schema, r);
  for (const EncodedRecord& r : test) validate_record(schema, r);
}

void validate_labels(const DomainSchema& schema, const GroundTruthLabels& labels) {
  for (const GroundTruthLabel& gt : labels) {
    validate_record(schema, gt.original);
    validate_record(schema, gt.perturbed);
    require(!gt.corrupted.empty() && gt.corrupted.size() <= 2, "label: corrupted set size must be 1 or 2");
    require(std::is_sorted(gt.corrupted.begin(), gt.corrupted.end()), "label: corrupted set must be sorted");
    for (int64_t j = 0; j < schema.m(); ++j) {
      const bool in_set = std::binary_search(gt.corrupted.begin(), gt.corrupted.end(), j);
      const bool differs =
          gt.original.values[static_cast<size_t>(j)] != gt.perturbed.values[static_cast<size_t>(j)];
      require(in_set == differs, "label: perturbed record must differ exactly on the corrupted set");
    }
  }
}

}  // namespace carat
