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
#include <algorithm>
#include <chrono>
#include <limits>
#include <numeric>
#include <set>

#include "carat/recourse/recourse.hpp"
#include "carat/rng.hpp"

namespace carat {

void RecourseConfig::validate() const {
  require(K >= 1, "recourse config: K must be >= 1");
  require(neighbor_k >= 0, "recourse config: neighbor_k must be >= 0");
  require(max_combinations >= K, "recourse config: max_combinations must be >= K");
  require(likelihood_threshold > 0.0 && likelihood_threshold <= 1.0,
          "recourse config: likelihood_threshold in (0,1]");
}

namespace {

bool contains(const std::vector<int64_t>& sorted, int64_t x) {
  return std::binary_search(sorted.begin(), sorted.end(), x);
}

}  // namespace

std::vector<int64_t> candidate_entities(const EncodedRecord& anomaly, int64_t domain,
                                        const std::vector<int64_t>& modified_domains,
                                        const std::vector<std::vector<int64_t>>& metapaths,
                                        const DistMultModel& kge, int64_t k,
                                        int64_t* query_count) {
  require(contains(modified_domains, domain), "candidate_entities: domain not in modified set");
  std::set<int64_t> contexts;
  for (const std::vector<int64_t>& mp : metapaths) {
    for (size_t t = 0; t < mp.size(); ++t) {
      if (mp[t] != domain) continue;
      if (t > 0) contexts.insert(mp[t - 1]);
      if (t + 1 < mp.size()) contexts.insert(mp[t + 1]);
    }
  }
  std::set<int64_t> out;
  for (const int64_t ctx : contexts) {
    if (contains(modified_domains, ctx)) continue;
    const int64_t rel = kge.relation_index(ctx, domain);
    if (rel < 0) continue;
    const EntityRef head{ctx, anomaly.values[static_cast<size_t>(ctx)]};
    if (query_count != nullptr) ++*query_count;
    for (const int64_t e : kge.knn_tails(head, rel, domain, k)) out.insert(e);
  }
  out.erase(anomaly.values[static_cast<size_t>(domain)]);
  return {out.begin(), out.end()};
}

std::vector<int64_t> fallback_candidates(const EncodedRecord& anomaly, int64_t domain,
                                         const std::vector<int64_t>& modified_domains,
                                         const CooccurrenceModel& cooccurrence,
                                         const DomainSchema& schema, int64_t k) {
  const int64_t m = schema.m();
  const int64_t original = anomaly.values[static_cast<size_t>(domain)];
  std::vector<int64_t> contexts;
  for (int64_t q = 0; q < m; ++q)
    if (q != domain && !contains(modified_domains, q)) contexts.push_back(q);

  const int64_t vocab = schema.vocab_size(domain);
  std::vector<std::pair<double, int64_t>> ranked;
  for (int64_t e = 0; e < vocab; ++e) {
    if (e == original) continue;
    double score = 0.0;
    if (!contexts.empty()) {
      for (const int64_t q : contexts)
        score += cooccurrence.prob(domain, e, q, anomaly.values[static_cast<size_t>(q)]);
      score /= static_cast<double>(contexts.size());
    } else if (schema.m() >= 2) {
      const int64_t any = domain == 0 ? 1 : 0;
      for (int64_t other = 0; other < schema.vocab_size(any); ++other)
        score += static_cast<double>(cooccurrence.count(domain, e, any, other));
    }
    ranked.emplace_back(-score, e);
  }
  std::sort(ranked.begin(), ranked.end());
  if (static_cast<int64_t>(ranked.size()) > k) ranked.resize(static_cast<size_t>(k));
  std::vector<int64_t> out;
  for (const auto& [neg, e] : ranked) out.push_back(e);
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<EncodedRecord> generate_counterfactuals(
    const EncodedRecord& anomaly, const std::vector<int64_t>& modified_domains,
    const std::vector<std::vector<int64_t>>& candidates, const RecourseConfig& config) {
  config.validate();
  require(!modified_domains.empty(), "generate_counterfactuals: empty modified set");
  require(candidates.size() == modified_domains.size(),
          "generate_counterfactuals: one candidate list per modified domain");
  std::vector<std::vector<int64_t>> cands = candidates;
  for (size_t i = 0; i < cands.size(); ++i) {
    std::sort(cands[i].begin(), cands[i].end());
    cands[i].erase(std::unique(cands[i].begin(), cands[i].end()), cands[i].end());
    require(!cands[i].empty(), "generate_counterfactuals: empty candidate list");
    const int64_t original = anomaly.values[static_cast<size_t>(modified_domains[i])];
    for (const int64_t e : cands[i])
      require(e != original, "generate_counterfactuals: candidate equals the original entity");
  }

  const size_t n_mod = cands.size();
  int64_t total = 1;
  bool huge = false;
  for (const auto& c : cands) {
    const int64_t s = static_cast<int64_t>(c.size());
    if (total > std::numeric_limits<int64_t>::max() / (2 * s)) {
      huge = true;
      break;
    }
    total *= s;
  }

  const auto emit = [&](const std::vector<int64_t>& digits) {
    EncodedRecord rec = anomaly;
    for (size_t i = 0; i < n_mod; ++i)
      rec.values[static_cast<size_t>(modified_domains[i])] =
          cands[i][static_cast<size_t>(digits[i])];
    return rec;
  };

  std::vector<EncodedRecord> out;
  if (!huge && total <= config.max_combinations) {
    std::vector<int64_t> digits(n_mod, 0);
    for (int64_t idx = 0; idx < total; ++idx) {
      out.push_back(emit(digits));
      for (size_t i = n_mod; i-- > 0;) {
        if (++digits[i] < static_cast<int64_t>(cands[i].size())) break;
        digits[i] = 0;
      }
    }
    return out;
  }

  Rng rng(Rng::derive(config.seed, "recourse-cap"));
  const int64_t want = config.max_combinations;
  std::set<std::vector<int64_t>> picked;
  if (!huge) {
    std::vector<int64_t> indices;
    if (total <= 4 * want) {
      indices = rng.sample_without_replacement(total, want);
    } else {
      std::set<int64_t> seen;
      while (static_cast<int64_t>(seen.size()) < want) seen.insert(rng.uniform_int(total));
      indices.assign(seen.begin(), seen.end());
    }
    std::sort(indices.begin(), indices.end());
    for (int64_t idx : indices) {
      std::vector<int64_t> digits(n_mod);
      for (size_t i = n_mod; i-- > 0;) {
        digits[i] = idx % static_cast<int64_t>(cands[i].size());
        idx /= static_cast<int64_t>(cands[i].size());
      }
      picked.insert(std::move(digits));
    }
  } else {
    while (static_cast<int64_t>(picked.size()) < want) {
      std::vector<int64_t> digits(n_mod);
      for (size_t i = 0; i < n_mod; ++i)
        digits[i] = rng.uniform_int(static_cast<int64_t>(cands[i].size()));
      picked.insert(std::move(digits));
    }
  }
  for (const std::vector<int64_t>& digits : picked) out.push_back(emit(digits));
  return out;
}

CounterfactualSet rank_and_select(const EncodedRecord& anomaly,
                                  const std::vector<EncodedRecord>& raw, const AdScorer& scorer,
                                  int64_t k) {
  require(k >= 1, "rank_and_select: k must be >= 1");
  require(!raw.empty(), "rank_and_select: empty candidate set");
  const std::vector<double> scores = scorer.score_batch(raw);
  std::vector<int64_t> order(raw.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](int64_t a, int64_t b) {
    if (scores[static_cast<size_t>(a)] != scores[static_cast<size_t>(b)])
      return scores[static_cast<size_t>(a)] > scores[static_cast<size_t>(b)];
    return raw[static_cast<size_t>(a)].values < raw[static_cast<size_t>(b)].values;
  });
  if (static_cast<int64_t>(order.size()) > k) order.resize(static_cast<size_t>(k));

  CounterfactualSet result;
  result.anomaly = anomaly;
  std::set<int64_t> touched;
  for (const int64_t idx : order) {
    Counterfactual cf;
    cf.record = raw[static_cast<size_t>(idx)];
    cf.score = scores[static_cast<size_t>(idx)];
    require(cf.record.values.size() == anomaly.values.size(),
            "rank_and_select: record arity mismatch");
    for (size_t j = 0; j < anomaly.values.size(); ++j)
      if (cf.record.values[j] != anomaly.values[j]) {
        cf.changed.push_back(static_cast<int64_t>(j));
        touched.insert(static_cast<int64_t>(j));
      }
    result.items.push_back(std::move(cf));
  }
  result.modified_domains.assign(touched.begin(), touched.end());
  return result;
}

CounterfactualSet carat_recourse(const EncodedRecord& anomaly, const DomainSchema& schema,
                                 const Encoder& encoder, const DecoderP& decoder_p,
                                 const DistMultModel& kge, const AdScorer& scorer,
                                 const CooccurrenceModel& cooccurrence,
                                 const std::vector<MetapathSchema>& metapaths,
                                 const RecourseConfig& config, RecourseStats* stats) {
  const auto start = std::chrono::steady_clock::now();
  config.validate();
  schema.validate();
  validate_record(schema, anomaly);
  const uint64_t hash = schema.hash();
  require(encoder.schema_hash() == hash, "carat_recourse: explainer schema mismatch");
  require(kge.schema_hash() == hash, "carat_recourse: embedding model schema mismatch");
  require(scorer.schema_hash() == hash, "carat_recourse: anomaly scorer schema mismatch");

  std::vector<std::vector<int64_t>> metapath_indices;
  for (const MetapathSchema& mp : metapaths) {
    mp.validate(schema);
    metapath_indices.push_back(mp.domain_indices(schema));
  }

  const LikelihoodVector likelihoods = entity_likelihoods(encoder, decoder_p, anomaly);
  const std::vector<int64_t> selected =
      select_domains(likelihoods, config.likelihood_threshold);

  RecourseStats local;
  std::vector<int64_t> kept;
  std::vector<std::vector<int64_t>> candidates;
  for (const int64_t d : selected) {
    std::vector<int64_t> c =
        candidate_entities(anomaly, d, selected, metapath_indices, kge,
                           config.effective_neighbor_k(), &local.knn_queries);
    if (c.empty()) {
      c = fallback_candidates(anomaly, d, selected, cooccurrence, schema,
                              config.effective_neighbor_k());
      ++local.fallback_domains;
    }
    if (c.empty()) continue;
    kept.push_back(d);
    candidates.push_back(std::move(c));
  }
  require(!kept.empty(), "carat_recourse: no modifiable domain has replacement candidates");

  const std::vector<EncodedRecord> raw =
      generate_counterfactuals(anomaly, kept, candidates, config);
  local.enumerated = static_cast<int64_t>(raw.size());
  local.scored = static_cast<int64_t>(raw.size());

  CounterfactualSet result = rank_and_select(anomaly, raw, scorer, config.K);
  result.modified_domains = kept;
  result.likelihoods = likelihoods;

  local.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  if (stats != nullptr) *stats = local;
  return result;
}

}  // namespace carat
