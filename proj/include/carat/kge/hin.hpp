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
#include <utility>
#include <vector>

#include "carat/data/schema.hpp"

namespace carat {

// An ordered walk over domains, read in either direction. Consecutive
// domain pairs become the typed relations of the entity graph.
struct MetapathSchema {
  std::vector<std::string> domains;

  void validate(const DomainSchema& schema) const;
  std::vector<int64_t> domain_indices(const DomainSchema& schema) const;
};

// Unordered cross-domain pair; canonical form keeps dom_a < dom_b.
struct Relation {
  int64_t dom_a;
  int64_t dom_b;

  bool operator==(const Relation& o) const { return dom_a == o.dom_a && dom_b == o.dom_b; }
  bool operator<(const Relation& o) const {
    return dom_a != o.dom_a ? dom_a < o.dom_a : dom_b < o.dom_b;
  }
};

// Typed co-occurrence graph: nodes are (domain, entity) pairs, edge types
// are the consecutive domain pairs of the declared metapaths, and an edge
// exists when the entity pair co-occurs in at least one training record.
class HINGraph {
 public:
  static HINGraph build(const DomainSchema& schema, const std::vector<EncodedRecord>& train,
                        const std::vector<MetapathSchema>& metapaths);

  const std::vector<Relation>& relations() const { return relations_; }

  // -1 when the pair is not a relation; order-insensitive.
  int64_t relation_index(int64_t dom_x, int64_t dom_y) const;

  // Deduplicated (entity in dom_a, entity in dom_b) pairs, ascending.
  const std::vector<std::pair<int64_t, int64_t>>& edges(int64_t relation) const;

  int64_t edge_count() const;
  const std::vector<int64_t>& vocab_sizes() const { return vocab_sizes_; }
  uint64_t schema_hash() const { return schema_hash_; }

 private:
  std::vector<Relation> relations_;
  std::vector<std::vector<std::pair<int64_t, int64_t>>> edges_;
  std::vector<int64_t> vocab_sizes_;
  uint64_t schema_hash_ = 0;
};

}  // namespace carat
