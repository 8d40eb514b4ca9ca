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
#include <set>
#include <vector>

#include "carat/data/synthetic.hpp"
#include "carat/recourse/recourse.hpp"
#include "carat/rng.hpp"
#include "doctest.h"

using namespace carat;

namespace {

// Two relations with orthogonal embeddings, so each context domain ranks
// the middle domain's entities by its own component: relation (0,1) by the
// first, relation (1,2) by the second.
DistMultModel handmade_kge() {
  KgeConfig cfg;
  cfg.dim = 2;
  DistMultModel model(cfg, {4, 10, 4}, {{0, 1}, {1, 2}}, 42);
  nn::Param* nodes = model.params()[0];
  nn::Param* rels = model.params()[1];
  const std::vector<double> first = {9, 8, 7, 0, 0, 0, 0, 0, 0, 0};
  const std::vector<double> second = {0, 0, 9, 8, 7, 0, 0, 0, 0, 0};
  for (size_t k = 0; k < 10; ++k) {
    nodes->value.at(4 + static_cast<int64_t>(k), 0) = first[k];
    nodes->value.at(4 + static_cast<int64_t>(k), 1) = second[k];
  }
  for (int64_t e = 0; e < 4; ++e) {
    nodes->value.at(e, 0) = 1.0;
    nodes->value.at(e, 1) = 1.0;
    nodes->value.at(14 + e, 0) = 1.0;
    nodes->value.at(14 + e, 1) = 1.0;
  }
  rels->value.at(0, 0) = 1.0;
  rels->value.at(1, 1) = 1.0;
  return model;
}

const Dataset& corpus() {
  static const Dataset ds = [] {
    RuleCorpusSpec spec;
    spec.m = 5;
    spec.vocab_size = 30;
    spec.clusters = 6;
    spec.train_records = 600;
    spec.test_records = 220;
    spec.noise = 0.01;
    spec.seed = 5;
    return generate_rule_corpus(spec);
  }();
  return ds;
}

struct RecourseModels {
  AdScorer scorer;
  DistMultModel kge;
  CooccurrenceModel cooc;
  PretrainResult pre;
  DecoderP dec_p;
  std::vector<MetapathSchema> metapaths;
};

const RecourseModels& models() {
  static const RecourseModels m = [] {
    const Dataset& ds = corpus();
    AdConfig ad_cfg;
    ad_cfg.embedding_dim = 8;
    ad_cfg.negatives_per_positive = 2;
    ad_cfg.epochs = 20;
    ad_cfg.batch_size = 64;
    ad_cfg.learning_rate = 0.01;
    ad_cfg.seed = 3;

    std::vector<MetapathSchema> metapaths = {
        {{"D0", "D1", "D2"}}, {{"D2", "D3", "D4"}}, {{"D4", "D0"}}, {{"D1", "D3"}}};
    KgeConfig kge_cfg;
    kge_cfg.dim = 8;
    kge_cfg.negatives_per_positive = 2;
    kge_cfg.epochs = 60;
    kge_cfg.batch_size = 64;
    kge_cfg.learning_rate = 0.02;
    kge_cfg.seed = 7;

    EncoderConfig enc_cfg;
    enc_cfg.embedding_dim = 16;
    enc_cfg.num_layers = 1;
    enc_cfg.num_heads = 2;
    ExplainerTrainConfig ex_cfg;
    ex_cfg.epochs = 80;
    ex_cfg.batch_size = 64;
    ex_cfg.learning_rate = 0.005;
    ex_cfg.seed = 9;
    ExplainerTrainConfig head_cfg = ex_cfg;
    head_cfg.epochs = 200;
    head_cfg.learning_rate = 0.01;

    PretrainResult pre = pretrain_encoder(ds, enc_cfg, ex_cfg);
    DecoderP dec_p = train_decoder_p(pre.encoder, ds, head_cfg);
    return RecourseModels{train_ad(ds, ad_cfg),
                          train_distmult(HINGraph::build(ds.schema, ds.train, metapaths), kge_cfg),
                          CooccurrenceModel::build(ds.schema, ds.train),
                          std::move(pre),
                          std::move(dec_p),
                          std::move(metapaths)};
  }();
  return m;
}

}  // namespace

TEST_CASE("candidate_entities unions neighbor queries across context domains") {
  const DistMultModel kge = handmade_kge();
  const EncodedRecord anomaly{{0, 9, 0}};
  const std::vector<std::vector<int64_t>> metapaths = {{0, 1, 2}};

  int64_t queries = 0;
  CHECK(candidate_entities(anomaly, 1, {1}, metapaths, kge, 3, &queries) ==
        std::vector<int64_t>({0, 1, 2, 3, 4}));
  CHECK(queries == 2);

  const EncodedRecord overlapping{{0, 2, 0}};
  CHECK(candidate_entities(overlapping, 1, {1}, metapaths, kge, 3) ==
        std::vector<int64_t>({0, 1, 3, 4}));

  CHECK(candidate_entities(anomaly, 1, {0, 1}, metapaths, kge, 3) ==
        std::vector<int64_t>({2, 3, 4}));

  CHECK(candidate_entities(anomaly, 1, {0, 1, 2}, metapaths, kge, 3).empty());

  const std::vector<std::vector<int64_t>> without_d0 = {{1, 2}};
  CHECK(candidate_entities(anomaly, 0, {0}, without_d0, kge, 3).empty());

  CHECK_THROWS_AS(candidate_entities(anomaly, 2, {0, 1}, metapaths, kge, 3), Error);
}

TEST_CASE("fallback_candidates ranks by mean co-occurrence with the intact context") {
  DomainSchema schema;
  schema.domains = {"A", "B", "C"};
  schema.vocab = {{"a0", "a1", "a2", "a3"}, {"b0", "b1"}, {"c0", "c1"}};
  const std::vector<EncodedRecord> train = {
      {{1, 0, 0}}, {{1, 0, 0}}, {{1, 0, 1}}, {{2, 0, 0}}, {{2, 1, 0}}, {{3, 1, 1}}, {{0, 0, 0}},
  };
  const CooccurrenceModel cooc = CooccurrenceModel::build(schema, train);

  const EncodedRecord anomaly{{0, 0, 0}};
  CHECK(fallback_candidates(anomaly, 0, {0}, cooc, schema, 2) == std::vector<int64_t>({1, 2}));
  CHECK(fallback_candidates(anomaly, 0, {0}, cooc, schema, 10) ==
        std::vector<int64_t>({1, 2, 3}));

  CHECK(fallback_candidates(anomaly, 0, {0, 1, 2}, cooc, schema, 2) ==
        std::vector<int64_t>({1, 2}));
}

TEST_CASE("generate_counterfactuals enumerates the candidate cross-product") {
  RecourseConfig cfg;
  cfg.K = 1;
  cfg.max_combinations = 100;
  const EncodedRecord anomaly{{0, 0, 0}};

  const std::vector<EncodedRecord> single =
      generate_counterfactuals(anomaly, {1}, {{1, 2, 3, 4}}, cfg);
  REQUIRE(single.size() == 4);
  CHECK(single[0].values == std::vector<int64_t>({0, 1, 0}));
  CHECK(single[3].values == std::vector<int64_t>({0, 4, 0}));

  const std::vector<EncodedRecord> pair =
      generate_counterfactuals(anomaly, {0, 2}, {{1, 2, 3}, {1, 2}}, cfg);
  REQUIRE(pair.size() == 6);
  CHECK(pair[0].values == std::vector<int64_t>({1, 0, 1}));
  CHECK(pair[1].values == std::vector<int64_t>({1, 0, 2}));
  CHECK(pair[5].values == std::vector<int64_t>({3, 0, 2}));

  CHECK_THROWS_AS(generate_counterfactuals(anomaly, {0}, {{}}, cfg), Error);
  CHECK_THROWS_AS(generate_counterfactuals(anomaly, {0}, {{0, 1}}, cfg), Error);
}

TEST_CASE("generate_counterfactuals caps huge spaces with a seeded distinct sample") {
  RecourseConfig cfg;
  cfg.K = 5;
  cfg.max_combinations = 1000;
  EncodedRecord anomaly{{0, 0}};
  std::vector<int64_t> c0, c1;
  for (int64_t e = 1; e <= 100; ++e) c0.push_back(e);
  for (int64_t e = 1; e <= 100; ++e) c1.push_back(e);

  const std::vector<EncodedRecord> a = generate_counterfactuals(anomaly, {0, 1}, {c0, c1}, cfg);
  const std::vector<EncodedRecord> b = generate_counterfactuals(anomaly, {0, 1}, {c0, c1}, cfg);
  REQUIRE(a.size() == 1000);
  CHECK(a.size() == b.size());
  for (size_t i = 0; i < a.size(); ++i) CHECK(a[i] == b[i]);
  std::set<std::vector<int64_t>> distinct;
  for (const EncodedRecord& r : a) {
    CHECK(r.values[0] != 0);
    CHECK(r.values[1] != 0);
    distinct.insert(r.values);
  }
  CHECK(distinct.size() == 1000);

  cfg.seed = 2;
  const std::vector<EncodedRecord> c = generate_counterfactuals(anomaly, {0, 1}, {c0, c1}, cfg);
  bool any_diff = c.size() != a.size();
  for (size_t i = 0; !any_diff && i < c.size(); ++i) any_diff = !(c[i] == a[i]);
  CHECK(any_diff);
}

TEST_CASE("generate_counterfactuals samples spaces too large to index") {
  RecourseConfig cfg;
  cfg.K = 1;
  cfg.max_combinations = 64;
  cfg.seed = 11;
  const int64_t m = 48;
  EncodedRecord anomaly;
  anomaly.values.assign(static_cast<size_t>(m), 0);
  std::vector<int64_t> mod(static_cast<size_t>(m));
  std::vector<std::vector<int64_t>> cands(static_cast<size_t>(m), {1, 2, 3});
  for (int64_t j = 0; j < m; ++j) mod[static_cast<size_t>(j)] = j;

  const std::vector<EncodedRecord> out = generate_counterfactuals(anomaly, mod, cands, cfg);
  REQUIRE(out.size() == 64);
  std::set<std::vector<int64_t>> distinct;
  for (const EncodedRecord& r : out) {
    for (const int64_t v : r.values) CHECK(v != 0);
    distinct.insert(r.values);
  }
  CHECK(distinct.size() == 64);

  const std::vector<EncodedRecord> again = generate_counterfactuals(anomaly, mod, cands, cfg);
  CHECK(again.size() == out.size());
  for (size_t i = 0; i < out.size(); ++i) CHECK(again[i] == out[i]);
}

TEST_CASE("rank_and_select keeps the least anomalous candidates") {
  const DomainSchema& schema = corpus().schema;
  const AdScorer& scorer = models().scorer;
  const EncodedRecord anomaly = corpus().test[0];

  std::vector<EncodedRecord> raw;
  for (int64_t e = 0; e < schema.vocab_size(0); ++e) {
    if (e == anomaly.values[0]) continue;
    EncodedRecord r = anomaly;
    r.values[0] = e;
    raw.push_back(r);
  }

  const CounterfactualSet all = rank_and_select(anomaly, raw, scorer, 100);
  REQUIRE(all.items.size() == raw.size());
  for (size_t i = 1; i < all.items.size(); ++i)
    CHECK(all.items[i - 1].score >= all.items[i].score);
  CHECK(all.modified_domains == std::vector<int64_t>({0}));
  for (const Counterfactual& cf : all.items) CHECK(cf.changed == std::vector<int64_t>({0}));

  const CounterfactualSet top = rank_and_select(anomaly, raw, scorer, 1);
  REQUIRE(top.items.size() == 1);
  double best = -1e300;
  std::vector<int64_t> best_values;
  for (const EncodedRecord& r : raw) {
    const double s = scorer.score(r);
    if (s > best || (s == best && r.values < best_values)) {
      best = s;
      best_values = r.values;
    }
  }
  CHECK(top.items[0].score == best);
  CHECK(top.items[0].record.values == best_values);

  CHECK_THROWS_AS(rank_and_select(anomaly, {}, scorer, 3), Error);
}

TEST_CASE("rank_and_select breaks score ties lexicographically") {
  const DomainSchema& schema = corpus().schema;
  const AdScorer untrained(models().scorer.config(), schema);
  EncodedRecord anomaly = corpus().test[0];
  std::vector<EncodedRecord> raw;
  for (int64_t e = schema.vocab_size(0); e-- > 0;) {
    if (e == anomaly.values[0]) continue;
    EncodedRecord r = anomaly;
    r.values[0] = e;
    raw.push_back(r);
  }
  const CounterfactualSet picked = rank_and_select(anomaly, raw, untrained, 3);
  REQUIRE(picked.items.size() == 3);
  for (size_t i = 1; i < picked.items.size(); ++i)
    CHECK(picked.items[i - 1].record.values < picked.items[i].record.values);
  CHECK(picked.items[0].record.values[0] == (anomaly.values[0] == 0 ? 1 : 0));
}

TEST_CASE("carat_recourse repairs planted anomalies") {
  const RecourseModels& mm = models();
  const DomainSchema& schema = corpus().schema;
  const GroundTruthLabels labels = generate_synthetic_anomalies(corpus(), 200, 17);
  RecourseConfig cfg;

  int64_t improved = 0;
  int64_t with_stats = 0;
  for (const GroundTruthLabel& gt : labels) {
    RecourseStats stats;
    const CounterfactualSet cf =
        carat_recourse(gt.perturbed, schema, mm.pre.encoder, mm.dec_p, mm.kge, mm.scorer,
                       mm.cooc, mm.metapaths, cfg, &stats);
    REQUIRE(!cf.items.empty());
    CHECK(cf.items.size() <= static_cast<size_t>(cfg.K));
    CHECK(cf.likelihoods.size() == static_cast<size_t>(schema.m()));
    CHECK(!cf.modified_domains.empty());
    for (size_t i = 1; i < cf.items.size(); ++i)
      CHECK(cf.items[i - 1].score >= cf.items[i].score);
    for (const Counterfactual& item : cf.items) {
      CHECK(std::includes(cf.modified_domains.begin(), cf.modified_domains.end(),
                          item.changed.begin(), item.changed.end()));
      for (int64_t j = 0; j < schema.m(); ++j) {
        const bool modified =
            std::binary_search(cf.modified_domains.begin(), cf.modified_domains.end(), j);
        if (!modified)
          CHECK(item.record.values[static_cast<size_t>(j)] ==
                gt.perturbed.values[static_cast<size_t>(j)]);
      }
    }
    double mean = 0.0;
    for (const Counterfactual& item : cf.items) mean += item.score;
    mean /= static_cast<double>(cf.items.size());
    if (mean > mm.scorer.score(gt.perturbed)) ++improved;
    if (stats.knn_queries > 0 || stats.fallback_domains > 0) ++with_stats;
    CHECK(stats.enumerated >= static_cast<int64_t>(cf.items.size()));
    CHECK(stats.scored == stats.enumerated);
  }
  CAPTURE(improved);
  CHECK(improved >= 180);  // the >= 90% repair contract on 200 planted anomalies
  CHECK(with_stats == static_cast<int64_t>(labels.size()));
}

TEST_CASE("carat_recourse is deterministic and validates schema agreement") {
  const RecourseModels& mm = models();
  const DomainSchema& schema = corpus().schema;
  const GroundTruthLabels labels = generate_synthetic_anomalies(corpus(), 3, 23);
  RecourseConfig cfg;

  const CounterfactualSet a = carat_recourse(labels[0].perturbed, schema, mm.pre.encoder,
                                             mm.dec_p, mm.kge, mm.scorer, mm.cooc, mm.metapaths, cfg);
  const CounterfactualSet b = carat_recourse(labels[0].perturbed, schema, mm.pre.encoder,
                                             mm.dec_p, mm.kge, mm.scorer, mm.cooc, mm.metapaths, cfg);
  REQUIRE(a.items.size() == b.items.size());
  CHECK(a.modified_domains == b.modified_domains);
  CHECK(a.likelihoods == b.likelihoods);
  for (size_t i = 0; i < a.items.size(); ++i) {
    CHECK(a.items[i].record == b.items[i].record);
    CHECK(a.items[i].score == b.items[i].score);
    CHECK(a.items[i].changed == b.items[i].changed);
  }

  DomainSchema other = schema;
  other.domains[0] = "Renamed";
  CHECK_THROWS_AS(carat_recourse(labels[0].perturbed, other, mm.pre.encoder, mm.dec_p, mm.kge,
                                 mm.scorer, mm.cooc, mm.metapaths, cfg),
                  Error);

  RecourseConfig bad;
  bad.K = 0;
  CHECK_THROWS_AS(carat_recourse(labels[0].perturbed, schema, mm.pre.encoder, mm.dec_p, mm.kge,
                                 mm.scorer, mm.cooc, mm.metapaths, bad),
                  Error);
}
