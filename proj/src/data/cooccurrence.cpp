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
#include "carat/data/cooccurrence.hpp"

namespace carat {

CooccurrenceModel CooccurrenceModel::build(const DomainSchema& schema,
                                           const std::vector<EncodedRecord>& train) {
  require(!train.empty(), "cooccurrence: empty training split");
  CooccurrenceModel model;
  const int64_t m = schema.m();
  model.n_train_ = static_cast<int64_t>(train.size());
  model.vocab_sizes_.resize(static_cast<size_t>(m));
  for (int64_t j = 0; j < m; ++j) model.vocab_sizes_[static_cast<size_t>(j)] = schema.vocab_size(j);

  model.pair_idx_.assign(static_cast<size_t>(m), std::vector<int64_t>(static_cast<size_t>(m), -1));
  for (int64_t i = 0; i < m; ++i) {
    for (int64_t j = i + 1; j < m; ++j) {
      model.pair_idx_[static_cast<size_t>(i)][static_cast<size_t>(j)] =
          static_cast<int64_t>(model.counts_.size());
      model.counts_.emplace_back(
          static_cast<size_t>(schema.vocab_size(i) * schema.vocab_size(j)), 0);
    }
  }

  for (const EncodedRecord& r : train) {
    validate_record(schema, r);
    for (int64_t i = 0; i < m; ++i) {
      for (int64_t j = i + 1; j < m; ++j) {
        const int64_t p = model.pair_idx_[static_cast<size_t>(i)][static_cast<size_t>(j)];
        const int64_t ei = r.values[static_cast<size_t>(i)];
        const int64_t ej = r.values[static_cast<size_t>(j)];
        ++model.counts_[static_cast<size_t>(p)]
                       [static_cast<size_t>(ei * schema.vocab_size(j) + ej)];
      }
    }
  }
  return model;
}

int64_t CooccurrenceModel::count(int64_t dom_i, int64_t ei, int64_t dom_j, int64_t ej) const {
  require(dom_i != dom_j, "cooccurrence: same-domain pair undefined");
  if (dom_i > dom_j) {
    std::swap(dom_i, dom_j);
    std::swap(ei, ej);
  }
  require(dom_i >= 0 && dom_j < m(), "cooccurrence: domain out of range");
  const int64_t vi = vocab_sizes_[static_cast<size_t>(dom_i)];
  const int64_t vj = vocab_sizes_[static_cast<size_t>(dom_j)];
  require(ei >= 0 && ei < vi && ej >= 0 && ej < vj, "cooccurrence: entity out of range");
  const int64_t p = pair_idx_[static_cast<size_t>(dom_i)][static_cast<size_t>(dom_j)];
  return counts_[static_cast<size_t>(p)][static_cast<size_t>(ei * vj + ej)];
}

std::vector<int64_t> CooccurrenceModel::cooccurring(int64_t dom_i, int64_t ei, int64_t dom_j) const {
  std::vector<int64_t> out;
  for (int64_t ej = 0; ej < vocab_sizes_[static_cast<size_t>(dom_j)]; ++ej)
    if (count(dom_i, ei, dom_j, ej) > 0) out.push_back(ej);
  return out;
}

}  // namespace carat
