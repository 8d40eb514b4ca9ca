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
#include "carat/data/synthetic.hpp"

#include <algorithm>

#include "carat/rng.hpp"

namespace carat {

GroundTruthLabels generate_synthetic_anomalies(const Dataset& dataset, int64_t count, uint64_t seed) {
  const DomainSchema& schema = dataset.schema;
  require(count > 0, "generate_synthetic_anomalies: count must be positive");
  require(count <= static_cast<int64_t>(dataset.test.size()),
          "generate_synthetic_anomalies: count exceeds test split");
  std::vector<int64_t> eligible;
  for (int64_t j = 0; j < schema.m(); ++j)
    if (schema.vocab_size(j) >= 2) eligible.push_back(j);
  require(!eligible.empty(), "generate_synthetic_anomalies: no domain has a vocabulary of size >= 2");

  Rng rng(seed);
  const std::vector<int64_t> sources =
      rng.sample_without_replacement(static_cast<int64_t>(dataset.test.size()), count);

  GroundTruthLabels labels;
  labels.reserve(static_cast<size_t>(count));
  for (const int64_t src : sources) {
    GroundTruthLabel gt;
    gt.original = dataset.test[static_cast<size_t>(src)];
    gt.perturbed = gt.original;
    int64_t n_perturb = 1 + rng.uniform_int(2);
    n_perturb = std::min(n_perturb, static_cast<int64_t>(eligible.size()));
    const std::vector<int64_t> picks =
        rng.sample_without_replacement(static_cast<int64_t>(eligible.size()), n_perturb);
    for (const int64_t p : picks) gt.corrupted.push_back(eligible[static_cast<size_t>(p)]);
    std::sort(gt.corrupted.begin(), gt.corrupted.end());
    for (const int64_t j : gt.corrupted) {
      const int64_t orig = gt.original.values[static_cast<size_t>(j)];
      gt.perturbed.values[static_cast<size_t>(j)] =
          rng.uniform_int_excluding(schema.vocab_size(j), orig);
    }
    labels.push_back(std::move(gt));
  }
  validate_labels(schema, labels);
  return labels;
}

void RuleCorpusSpec::validate() const {
  require(m >= 2, "rule corpus: need at least two domains");
  require(clusters >= 2, "rule corpus: need at least two clusters");
  require(vocab_size >= clusters && vocab_size % clusters == 0,
          "rule corpus: vocab_size must be a positive multiple of clusters");
  require(train_records >= 1 && test_records >= 1, "rule corpus: splits must be non-empty");
  require(noise >= 0.0 && noise < 0.5, "rule corpus: noise must stay below the cluster signal");
}

Dataset generate_rule_corpus(const RuleCorpusSpec& spec) {
  spec.validate();
  Dataset ds;
  ds.schema.domains.resize(static_cast<size_t>(spec.m));
  ds.schema.vocab.resize(static_cast<size_t>(spec.m));

  int width = 1;
  for (int64_t v = spec.vocab_size - 1; v >= 10; v /= 10) ++width;
  for (int64_t j = 0; j < spec.m; ++j) {
    ds.schema.domains[static_cast<size_t>(j)] = "D" + std::to_string(j);
    auto& vocab = ds.schema.vocab[static_cast<size_t>(j)];
    vocab.resize(static_cast<size_t>(spec.vocab_size));
    for (int64_t e = 0; e < spec.vocab_size; ++e) {
      std::string num = std::to_string(e);
      num.insert(0, static_cast<size_t>(width) - num.size(), '0');
      vocab[static_cast<size_t>(e)] = "D" + std::to_string(j) + "_e" + num;
    }
  }
  ds.schema.validate();

  Rng rng(spec.seed);
  const int64_t block = spec.vocab_size / spec.clusters;
  auto draw = [&]() {
    EncodedRecord r;
    r.values.resize(static_cast<size_t>(spec.m));
    const int64_t c = rng.uniform_int(spec.clusters);
    for (int64_t j = 0; j < spec.m; ++j) {
      int64_t v;
      if (rng.uniform() < spec.noise)
        v = rng.uniform_int(spec.vocab_size);
      else
        v = c * block + rng.uniform_int(block);
      r.values[static_cast<size_t>(j)] = v;
    }
    return r;
  };

  ds.train.reserve(static_cast<size_t>(spec.train_records));
  for (int64_t i = 0; i < spec.train_records; ++i) ds.train.push_back(draw());
  ds.test.reserve(static_cast<size_t>(spec.test_records));
  for (int64_t i = 0; i < spec.test_records; ++i) ds.test.push_back(draw());
  return ds;
}

}  // namespace carat
