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

#include "carat/anomaly_model/ad_scorer.hpp"
#include "carat/data/cooccurrence.hpp"
#include "carat/data/schema.hpp"
#include "carat/explainer/explainer.hpp"
#include "carat/kge/distmult.hpp"
#include "carat/kge/hin.hpp"

namespace carat {

struct RecourseConfig {
  // Output size. Also the per-neighbor-query depth unless neighbor_k
  // overrides it (0 keeps both knobs equal).
  int64_t K = 5;
  int64_t neighbor_k = 0;
  int64_t max_combinations = 1000;
  double likelihood_threshold = 0.5;
  uint64_t seed = 1;

  int64_t effective_neighbor_k() const { return neighbor_k > 0 ? neighbor_k : K; }
  void validate() const;
};

struct Counterfactual {
  EncodedRecord record;
  double score;
  std::vector<int64_t> changed;  // domain indices, ascending
};

// Recourse output for one anomaly: the K least anomalous substitutions,
// score descending, each touching only the modified domains.
struct CounterfactualSet {
  EncodedRecord anomaly;
  std::vector<int64_t> modified_domains;  // ascending
  LikelihoodVector likelihoods;           // per-domain, from the explainer
  std::vector<Counterfactual> items;
};

// Counters for one recourse call. Wall time is reporting-only and carries
// no determinism guarantee.
struct RecourseStats {
  int64_t knn_queries = 0;
  int64_t fallback_domains = 0;
  int64_t enumerated = 0;
  int64_t scored = 0;
  double seconds = 0.0;
};

// Entities of `domain` semantically close to the anomaly's context under
// the embedding model: for every metapath position of `domain`, each
// adjacent domain outside modified_domains contributes the K nearest
// domain entities to the anomaly's entity there. Union, ascending, with
// the anomaly's own entity removed. Empty when no metapath supports the
// domain; callers fall back to co-occurrence candidates.
std::vector<int64_t> candidate_entities(const EncodedRecord& anomaly, int64_t domain,
                                        const std::vector<int64_t>& modified_domains,
                                        const std::vector<std::vector<int64_t>>& metapaths,
                                        const DistMultModel& kge, int64_t k,
                                        int64_t* query_count = nullptr);

// Co-occurrence fallback: the k entities of `domain` with the highest
// empirical co-occurrence probability against the anomaly's unmodified
// context entities, averaged; ties by entity index. With no unmodified
// context left, ranks by training frequency instead. The anomaly's own
// entity is excluded.
std::vector<int64_t> fallback_candidates(const EncodedRecord& anomaly, int64_t domain,
                                         const std::vector<int64_t>& modified_domains,
                                         const CooccurrenceModel& cooccurrence,
                                         const DomainSchema& schema, int64_t k);

// Cross-product substitution over the modified domains, one candidate list
// per domain (aligned with modified_domains, deduplicated, original entity
// rejected). Combinations beyond max_combinations are a uniform seeded
// sample; output follows lexicographic candidate-index order.
std::vector<EncodedRecord> generate_counterfactuals(
    const EncodedRecord& anomaly, const std::vector<int64_t>& modified_domains,
    const std::vector<std::vector<int64_t>>& candidates, const RecourseConfig& config);

// Scores every candidate with the black-box scorer and keeps the k least
// anomalous (highest score), ties by lexicographic record order. The
// returned modified_domains is the union of the changed sets.
CounterfactualSet rank_and_select(const EncodedRecord& anomaly,
                                  const std::vector<EncodedRecord>& raw, const AdScorer& scorer,
                                  int64_t k);

// Full recourse for one anomaly: low-likelihood domain selection, neighbor
// candidate gathering with co-occurrence fallback, combination enumeration,
// and re-ranking by the anomaly scorer. Domains with no candidates at all
// are dropped; at least one modifiable domain must survive. Deterministic
// given models and config.
CounterfactualSet carat_recourse(const EncodedRecord& anomaly, const DomainSchema& schema,
                                 const Encoder& encoder, const DecoderP& decoder_p,
                                 const DistMultModel& kge, const AdScorer& scorer,
                                 const CooccurrenceModel& cooccurrence,
                                 const std::vector<MetapathSchema>& metapaths,
                                 const RecourseConfig& config, RecourseStats* stats = nullptr);

}  // namespace carat
