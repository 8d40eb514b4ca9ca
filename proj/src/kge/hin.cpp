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
#include "carat/kge/hin.hpp"

#include <algorithm>
#include <set>

namespace carat {

void MetapathSchema::validate(const DomainSchema& schema) const {
  require(domains.size() >= 2, "metapath: needs at least two domains");
  for (size_t i = 0; i < domains.size(); ++i) {
    const auto it = std::find(schema.domains.begin(), schema.domains.end(), domains[i]);
    require(it != schema.domains.end(), "metapath: unknown domain '" + domains[i] + "'");
    if (i > 0) require(domains[i] != domains[i - 1], "metapath: consecutive domains must differ");
  }
}

std::vector<int64_t> MetapathSchema::domain_indices(const DomainSchema& schema) const {
  validate(schema);
  std::vector<int64_t> idx;
  idx.reserve(domains.size());
  for (const std::string& name : domains) {
    const auto it = std::find(schema.domains.begin(), schema.domains.end(), name);
    idx.push_back(it - schema.domains.begin());
  }
  return idx;
}

HINGraph HINGraph::build(const DomainSchema& schema, const std::vector<EncodedRecord>& train,
                         const std::vector<MetapathSchema>& metapaths) {
  schema.validate();
  require(!metapaths.empty(), "hin: at least one metapath required");
  require(!train.empty(), "hin: empty training split");

  std::set<Relation> rel_set;
  for (const MetapathSchema& mp : metapaths) {
    const std::vector<int64_t> idx = mp.domain_indices(schema);
    for (size_t i = 1; i < idx.size(); ++i)
      rel_set.insert({std::min(idx[i - 1], idx[i]), std::max(idx[i - 1], idx[i])});
  }

  HINGraph hin;
  hin.schema_hash_ = schema.hash();
  hin.relations_.assign(rel_set.begin(), rel_set.end());
  for (int64_t j = 0; j < schema.m(); ++j) hin.vocab_sizes_.push_back(schema.vocab_size(j));

  hin.edges_.resize(hin.relations_.size());
  for (size_t r = 0; r < hin.relations_.size(); ++r) {
    const Relation rel = hin.relations_[r];
    std::set<std::pair<int64_t, int64_t>> uniq;
    for (const EncodedRecord& rec : train) {
      validate_record(schema, rec);
      uniq.insert({rec.values[static_cast<size_t>(rel.dom_a)],
                   rec.values[static_cast<size_t>(rel.dom_b)]});
    }
    hin.edges_[r].assign(uniq.begin(), uniq.end());
  }
  return hin;
}

int64_t HINGraph::relation_index(int64_t dom_x, int64_t dom_y) const {
  const Relation key{std::min(dom_x, dom_y), std::max(dom_x, dom_y)};
  const auto it = std::lower_bound(relations_.begin(), relations_.end(), key);
  if (it == relations_.end() || !(*it == key)) return -1;
  return it - relations_.begin();
}

const std::vector<std::pair<int64_t, int64_t>>& HINGraph::edges(int64_t relation) const {
  require(relation >= 0 && relation < static_cast<int64_t>(relations_.size()),
          "hin: relation index out of range");
  return edges_[static_cast<size_t>(relation)];
}

int64_t HINGraph::edge_count() const {
  int64_t n = 0;
  for (const auto& e : edges_) n += static_cast<int64_t>(e.size());
  return n;
}

}  // namespace carat
