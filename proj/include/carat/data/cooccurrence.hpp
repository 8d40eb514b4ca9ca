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
#include <vector>

#include "carat/data/schema.hpp"

namespace carat {

// Empirical record-level co-occurrence over the training split. Memory is
// one dense count matrix per cross-domain pair, so this is meant for
// table-sized vocabularies, not the KGE-scale ones.
class CooccurrenceModel {
 public:
  static CooccurrenceModel build(const DomainSchema& schema, const std::vector<EncodedRecord>& train);

  // Count of training records containing both entities. Same-domain pairs
  // have no defined co-occurrence and are rejected.
  int64_t count(int64_t dom_i, int64_t ei, int64_t dom_j, int64_t ej) const;

  // P(e_i, e_j) = count / n_train.
  double prob(int64_t dom_i, int64_t ei, int64_t dom_j, int64_t ej) const {
    return static_cast<double>(count(dom_i, ei, dom_j, ej)) / static_cast<double>(n_train_);
  }

  // Entities of domain `dom_j` that ever co-occurred with (dom_i, ei),
  // ascending. Used as the neighbor fallback when a metapath yields nothing.
  std::vector<int64_t> cooccurring(int64_t dom_i, int64_t ei, int64_t dom_j) const;

  int64_t n_train() const { return n_train_; }
  int64_t m() const { return static_cast<int64_t>(vocab_sizes_.size()); }

 private:
  // pair_idx_[i][j] for i<j points into counts_; counts_[p] is a dense
  // (vocab_i x vocab_j) matrix in row-major order.
  std::vector<std::vector<int64_t>> pair_idx_;
  std::vector<std::vector<int64_t>> counts_;
  std::vector<int64_t> vocab_sizes_;
  int64_t n_train_ = 0;
};

}  // namespace carat
