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
#include "carat/baselines/baselines.hpp"

#include <algorithm>
#include <iostream>
#include <set>

#include "carat/rng.hpp"
#include "carat/util.hpp"

namespace carat {
namespace {

constexpr int64_t kMaxEnumeration = 10'000'000;

// Advances a size-m ascending domain subset in lexicographic order.
bool next_subset(std::vector<int64_t>& subset, int64_t n) {
  const int64_t m = static_cast<int64_t>(subset.size());
  for (int64_t i = m - 1; i >= 0; --i) {
    if (subset[static_cast<size_t>(i)] < n - (m - i)) {
      ++subset[static_cast<size_t>(i)];
      for (int64_t j = i + 1; j < m; ++j)
        subset[static_cast<size_t>(j)] = subset[static_cast<size_t>(j - 1)] + 1;
      return true;
    }
  }
  return false;
}

// Non-original entities of a domain, ascending.
std::vector<int64_t> other_entities(const DomainSchema& schema, int64_t domain, int64_t original) {
  std::vector<int64_t> out;
  for (int64_t e = 0; e < schema.vocab_size(domain); ++e)
    if (e != original) out.push_back(e);
  return out;
}

}  // namespace

BaselineMethod baseline_method_from_string(const std::string& s) {
  if (s == "replace_m") return BaselineMethod::replace_m;
  if (s == "xformer_r") return BaselineMethod::xformer_r;
  require(false, "unknown baseline method: " + s);
  return BaselineMethod::replace_m;
}

std::string baseline_method_to_string(BaselineMethod m) {
  return m == BaselineMethod::replace_m ? "replace_m" : "xformer_r";
}

void BaselineConfig::validate() const {
  require(m >= 1, "BaselineConfig: m must be >= 1");
  require(k >= 1, "BaselineConfig: k must be >= 1");
}

CounterfactualSet replace_m(const EncodedRecord& anomaly, const AdScorer& scorer,
                            const DomainSchema& schema, int64_t k, int64_t m) {
  require(k >= 1, "replace_m: k must be >= 1");
  require(m >= 1 && m <= schema.m(), "replace_m: m outside [1, number of domains]");
  require(scorer.schema_hash() == schema.hash(), "replace_m: scorer trained on another schema");
  validate_record(schema, anomaly);

  std::vector<EncodedRecord> raw;
  std::vector<int64_t> subset(static_cast<size_t>(m));
  for (int64_t i = 0; i < m; ++i) subset[static_cast<size_t>(i)] = i;
  do {
    std::vector<std::vector<int64_t>> pools;
    int64_t block = 1;
    for (int64_t d : subset) {
      pools.push_back(other_entities(schema, d, anomaly.values[static_cast<size_t>(d)]));
      if (pools.back().empty()) {
        block = 0;
        break;
      }
      require(block <= kMaxEnumeration / static_cast<int64_t>(pools.back().size()),
              "replace_m: enumeration exceeds the hard guard");
      block *= static_cast<int64_t>(pools.back().size());
    }
    require(static_cast<int64_t>(raw.size()) <= kMaxEnumeration - block,
            "replace_m: enumeration exceeds the hard guard");
    for (int64_t idx = 0; idx < block; ++idx) {
      EncodedRecord cf = anomaly;
      int64_t rest = idx;
      for (int64_t p = m - 1; p >= 0; --p) {
        const auto& pool = pools[static_cast<size_t>(p)];
        cf.values[static_cast<size_t>(subset[static_cast<size_t>(p)])] =
            pool[static_cast<size_t>(rest % static_cast<int64_t>(pool.size()))];
        rest /= static_cast<int64_t>(pool.size());
      }
      raw.push_back(std::move(cf));
    }
  } while (next_subset(subset, schema.m()));
  require(!raw.empty(), "replace_m: no candidate differs in exactly m domains");

  return rank_and_select(anomaly, raw, scorer, k);
}

CounterfactualSet xformer_r(const EncodedRecord& anomaly, const DomainSchema& schema,
                            const Encoder& encoder, const DecoderP& decoder_p, int64_t k,
                            uint64_t seed, const AdScorer* scorer, double likelihood_threshold) {
  require(k >= 1, "xformer_r: k must be >= 1");
  require(encoder.schema_hash() == schema.hash(), "xformer_r: explainer trained on another schema");
  if (scorer != nullptr)
    require(scorer->schema_hash() == schema.hash(), "xformer_r: scorer trained on another schema");
  validate_record(schema, anomaly);

  const auto likelihoods = entity_likelihoods(encoder, decoder_p, anomaly);
  const auto d_mod = select_domains(likelihoods, likelihood_threshold);

  int64_t capacity = 1;
  for (int64_t d : d_mod) {
    const int64_t others = schema.vocab_size(d) - 1;
    require(others >= 1, "xformer_r: a selected domain has no replacement entity");
    capacity = capacity <= kMaxEnumeration / others ? capacity * others : kMaxEnumeration + 1;
  }
  const int64_t target = std::min<int64_t>(k, capacity);
  if (target < k) {
    std::cerr << "warning: xformer_r can produce only " << capacity
              << " distinct counterfactuals, fewer than the requested " << k << "\n";
  }

  Rng rng(Rng::derive(seed, "xformer-r"));
  std::set<std::vector<int64_t>> seen;
  std::vector<EncodedRecord> sampled;
  const int64_t max_attempts = 200 * k;
  for (int64_t attempt = 0; attempt < max_attempts &&
                            static_cast<int64_t>(sampled.size()) < target;
       ++attempt) {
    EncodedRecord cf = anomaly;
    for (int64_t d : d_mod) {
      cf.values[static_cast<size_t>(d)] = rng.uniform_int_excluding(
          schema.vocab_size(d), anomaly.values[static_cast<size_t>(d)]);
    }
    if (seen.insert(cf.values).second) sampled.push_back(std::move(cf));
  }
  if (static_cast<int64_t>(sampled.size()) < target) {
    std::cerr << "warning: xformer_r sampling stalled at " << sampled.size() << " of " << target
              << " distinct counterfactuals\n";
  }
  require(!sampled.empty(), "xformer_r: sampling produced no counterfactual");

  CounterfactualSet result;
  if (scorer != nullptr) {
    result = rank_and_select(anomaly, sampled, *scorer, target);
  } else {
    result.anomaly = anomaly;
    std::sort(sampled.begin(), sampled.end(),
              [](const EncodedRecord& a, const EncodedRecord& b) { return a.values < b.values; });
    for (const auto& r : sampled) {
      Counterfactual cf;
      cf.record = r;
      cf.score = 0.0;
      for (size_t j = 0; j < anomaly.values.size(); ++j)
        if (r.values[j] != anomaly.values[j]) cf.changed.push_back(static_cast<int64_t>(j));
      result.items.push_back(std::move(cf));
    }
  }
  result.modified_domains = d_mod;
  result.likelihoods = likelihoods;
  return result;
}

}  // namespace carat
