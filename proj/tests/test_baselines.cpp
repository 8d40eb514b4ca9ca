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
#include <string>
#include <vector>

#include "carat/baselines/baselines.hpp"
#include "carat/data/cooccurrence.hpp"
#include "carat/data/synthetic.hpp"
#include "carat/kge/distmult.hpp"
#include "carat/kge/hin.hpp"
#include "carat/metrics/metrics.hpp"
#include "carat/recourse/recourse.hpp"
#include "doctest.h"

using namespace carat;

namespace {

DomainSchema tiny_schema(const std::vector<int64_t>& vocab_sizes) {
  DomainSchema s;
  for (size_t j = 0; j < vocab_sizes.size(); ++j) {
    s.domains.push_back("D" + std::to_string(j));
    std::vector<std::string> vocab;
    for (int64_t e = 0; e < vocab_sizes[j]; ++e) vocab.push_back(std::string(1, static_cast<char>('a' + e)));
    s.vocab.push_back(std::move(vocab));
  }
  s.validate();
  return s;
}

EncodedRecord rec(std::vector<int64_t> v) { return EncodedRecord{std::move(v)}; }

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

std::vector<MetapathSchema> metapaths() {
  return {MetapathSchema{{"D0", "D1", "D2"}}, MetapathSchema{{"D2", "D3", "D4"}},
          MetapathSchema{{"D4", "D0"}}, MetapathSchema{{"D1", "D3"}}};
}

struct Models {
  AdScorer scorer;
  Encoder encoder;
  DecoderP decoder_p;
  DistMultModel kge;
  CooccurrenceModel cooccurrence;
};

const Models& models() {
  static const Models m = [] {
    const auto& ds = corpus();

    AdConfig ad_cfg;
    ad_cfg.embedding_dim = 8;
    ad_cfg.negatives_per_positive = 2;
    ad_cfg.epochs = 20;
    ad_cfg.batch_size = 64;
    ad_cfg.learning_rate = 0.01;
    ad_cfg.seed = 3;
    AdScorer scorer = train_ad(ds, ad_cfg);

    EncoderConfig enc_cfg;
    enc_cfg.embedding_dim = 16;
    enc_cfg.num_layers = 1;
    enc_cfg.num_heads = 2;
    ExplainerTrainConfig ex_cfg;
    ex_cfg.epochs = 80;
    ex_cfg.batch_size = 64;
    ex_cfg.learning_rate = 0.005;
    ex_cfg.seed = 9;
    auto pre = pretrain_encoder(ds, enc_cfg, ex_cfg);
    ExplainerTrainConfig head_cfg = ex_cfg;
    head_cfg.epochs = 200;
    head_cfg.learning_rate = 0.01;
    DecoderP decoder_p = train_decoder_p(pre.encoder, ds, head_cfg);

    KgeConfig kge_cfg;
    kge_cfg.dim = 8;
    kge_cfg.negatives_per_positive = 2;
    kge_cfg.epochs = 60;
    kge_cfg.batch_size = 64;
    kge_cfg.learning_rate = 0.02;
    kge_cfg.seed = 7;
    const auto hin = HINGraph::build(ds.schema, ds.train, metapaths());
    DistMultModel kge = train_distmult(hin, kge_cfg);

    auto cooccurrence = CooccurrenceModel::build(ds.schema, ds.train);
    return Models{std::move(scorer), std::move(pre.encoder), std::move(decoder_p),
                  std::move(kge), std::move(cooccurrence)};
  }();
  return m;
}

}  // namespace

TEST_CASE("replace_m enumerates exactly the m-domain swaps") {
  const auto schema = tiny_schema({3, 3});
  AdConfig cfg;
  cfg.embedding_dim = 4;
  const AdScorer flat(cfg, schema);
  const auto x = rec({0, 0});

  // A zero-parameter scorer ties every candidate, so the output is the full
  // enumeration in lexicographic order.
  const auto single = replace_m(x, flat, schema, 10, 1);
  REQUIRE(single.items.size() == 4);
  CHECK(single.items[0].record == rec({0, 1}));
  CHECK(single.items[1].record == rec({0, 2}));
  CHECK(single.items[2].record == rec({1, 0}));
  CHECK(single.items[3].record == rec({2, 0}));
  for (const auto& item : single.items) CHECK(item.changed.size() == 1);
  CHECK(single.modified_domains == std::vector<int64_t>{0, 1});

  const auto pairs = replace_m(x, flat, schema, 10, 2);
  REQUIRE(pairs.items.size() == 4);
  CHECK(pairs.items[0].record == rec({1, 1}));
  CHECK(pairs.items[1].record == rec({1, 2}));
  CHECK(pairs.items[2].record == rec({2, 1}));
  CHECK(pairs.items[3].record == rec({2, 2}));
  for (const auto& item : pairs.items) CHECK(item.changed.size() == 2);

  SUBCASE("bad arguments are rejected") {
    CHECK_THROWS(replace_m(x, flat, schema, 10, 3));
    CHECK_THROWS(replace_m(x, flat, schema, 0, 1));
    const auto other = tiny_schema({3, 3, 3});
    CHECK_THROWS(replace_m(rec({0, 0, 0}), flat, other, 10, 1));
  }
}

TEST_CASE("replace_m K=1 returns the brute-force argmax swap") {
  const auto& ds = corpus();
  const auto& mods = models();
  const auto labels = generate_synthetic_anomalies(ds, 20, 17);
  for (const auto& label : labels) {
    const auto& x = label.perturbed;
    EncodedRecord best;
    double best_score = 0.0;
    bool first = true;
    for (int64_t j = 0; j < ds.schema.m(); ++j) {
      for (int64_t e = 0; e < ds.schema.vocab_size(j); ++e) {
        if (e == x.values[static_cast<size_t>(j)]) continue;
        auto cand = x;
        cand.values[static_cast<size_t>(j)] = e;
        const double s = mods.scorer.score(cand);
        if (first || s > best_score || (s == best_score && cand.values < best.values)) {
          best = cand;
          best_score = s;
          first = false;
        }
      }
    }
    const auto set = replace_m(x, mods.scorer, ds.schema, 1, 1);
    REQUIRE(set.items.size() == 1);
    CHECK(set.items[0].record == best);
    CHECK(set.items[0].score == doctest::Approx(best_score).epsilon(1e-12));
  }
}

TEST_CASE("replace_m is perfectly correct whenever enough swaps outrank the anomaly") {
  const auto& ds = corpus();
  const auto& mods = models();
  const int64_t k = 5;
  const auto labels = generate_synthetic_anomalies(ds, 30, 29);
  std::vector<EncodedRecord> planted;
  for (const auto& l : labels) planted.push_back(l.perturbed);
  const auto dk = build_comparison_sample(ds, planted, 64, 64, 0.01, 41);
  const auto dk_scores = mods.scorer.score_batch(dk);

  int eligible = 0;
  for (const auto& label : labels) {
    const auto& x = label.perturbed;
    const int64_t anomaly_rank = rank_within(mods.scorer.score(x), dk_scores);
    int64_t outranking = 0;
    for (int64_t j = 0; j < ds.schema.m(); ++j) {
      for (int64_t e = 0; e < ds.schema.vocab_size(j); ++e) {
        if (e == x.values[static_cast<size_t>(j)]) continue;
        auto cand = x;
        cand.values[static_cast<size_t>(j)] = e;
        if (rank_within(mods.scorer.score(cand), dk_scores) > anomaly_rank) ++outranking;
      }
    }
    if (outranking < k) continue;
    ++eligible;
    const auto set = replace_m(x, mods.scorer, ds.schema, k, 1);
    std::vector<EncodedRecord> cfs;
    for (const auto& item : set.items) cfs.push_back(item.record);
    CHECK(conditional_correctness(x, cfs, dk, mods.scorer) == doctest::Approx(1.0));
  }
  CHECK(eligible >= 15);
}

TEST_CASE("xformer_r draws distinct seed-stable replacements over the selected domains") {
  const auto& ds = corpus();
  const auto& mods = models();
  const auto labels = generate_synthetic_anomalies(ds, 20, 23);

  bool reseed_differs = false;
  for (const auto& label : labels) {
    const auto& x = label.perturbed;
    const auto set = xformer_r(x, ds.schema, mods.encoder, mods.decoder_p, 5, 31, &mods.scorer);

    const auto expected_likelihoods = entity_likelihoods(mods.encoder, mods.decoder_p, x);
    CHECK(set.likelihoods == expected_likelihoods);
    CHECK(set.modified_domains == select_domains(expected_likelihoods));

    REQUIRE(set.items.size() == 5);
    std::set<std::vector<int64_t>> seen;
    for (size_t i = 0; i < set.items.size(); ++i) {
      CHECK(set.items[i].changed == set.modified_domains);
      CHECK(seen.insert(set.items[i].record.values).second);
      if (i > 0) CHECK(set.items[i - 1].score >= set.items[i].score);
    }

    const auto again = xformer_r(x, ds.schema, mods.encoder, mods.decoder_p, 5, 31, &mods.scorer);
    for (size_t i = 0; i < set.items.size(); ++i) {
      CHECK(again.items[i].record == set.items[i].record);
      CHECK(again.items[i].score == set.items[i].score);
    }
    const auto reseeded = xformer_r(x, ds.schema, mods.encoder, mods.decoder_p, 5, 32, &mods.scorer);
    for (size_t i = 0; i < set.items.size(); ++i) {
      if (!(reseeded.items[i].record == set.items[i].record)) reseed_differs = true;
    }
  }
  CHECK(reseed_differs);
}

TEST_CASE("xformer_r returns every existing counterfactual when K exceeds capacity") {
  const auto schema = tiny_schema({2, 2});
  EncoderConfig enc_cfg;
  enc_cfg.embedding_dim = 4;
  enc_cfg.num_layers = 1;
  enc_cfg.num_heads = 1;
  const Encoder encoder(enc_cfg, schema);
  const DecoderP decoder(enc_cfg, schema);

  // Untrained heads emit likelihood 0.5 everywhere, so the argmin fallback
  // selects domain 0 alone and only one distinct replacement exists.
  const auto set = xformer_r(rec({0, 1}), schema, encoder, decoder, 5, 7);
  CHECK(set.modified_domains == std::vector<int64_t>{0});
  REQUIRE(set.items.size() == 1);
  CHECK(set.items[0].record == rec({1, 1}));
  CHECK(set.items[0].score == 0.0);

  SUBCASE("mismatched schema is rejected") {
    const auto other = tiny_schema({2, 2, 2});
    CHECK_THROWS(xformer_r(rec({0, 1, 0}), other, encoder, decoder, 5, 7));
  }
}

TEST_CASE("random replacement is no more coherent than neighbor-guided replacement") {
  const auto& ds = corpus();
  const auto& mods = models();
  const auto labels = generate_synthetic_anomalies(ds, 25, 37);

  RecourseConfig r_cfg;
  r_cfg.K = 5;
  r_cfg.max_combinations = 400;
  r_cfg.seed = 11;

  std::vector<CounterfactualSet> carat_out, random_out;
  for (const auto& label : labels) {
    carat_out.push_back(carat_recourse(label.perturbed, ds.schema, mods.encoder, mods.decoder_p,
                                       mods.kge, mods.scorer, mods.cooccurrence, metapaths(),
                                       r_cfg));
    random_out.push_back(xformer_r(label.perturbed, ds.schema, mods.encoder, mods.decoder_p, 5, 31,
                                   &mods.scorer));
  }

  EvaluationContext ctx;
  ctx.cooccurrence = &mods.cooccurrence;
  const auto carat_report = evaluate_corpus(carat_out, nullptr, ctx);
  const auto random_report = evaluate_corpus(random_out, nullptr, ctx);
  const auto carat_coh = carat_report.coherence.stat();
  const auto random_coh = random_report.coherence.stat();
  REQUIRE(carat_coh.defined > 0);
  REQUIRE(random_coh.defined > 0);
  CHECK(carat_coh.mean >= random_coh.mean);

  // Single-swap outputs make the sparsity identities exact.
  std::vector<CounterfactualSet> swaps;
  for (const auto& label : labels)
    swaps.push_back(replace_m(label.perturbed, mods.scorer, ds.schema, 5, 1));
  const auto swap_report = evaluate_corpus(swaps, nullptr, ctx);
  CHECK(swap_report.sparsity.stat().mean == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(swap_report.sparsity_normalized.stat().mean == doctest::Approx(5.0 / 6.0).epsilon(1e-12));
}

TEST_CASE("baseline configuration round-trips and validates") {
  CHECK(baseline_method_from_string("replace_m") == BaselineMethod::replace_m);
  CHECK(baseline_method_from_string("xformer_r") == BaselineMethod::xformer_r);
  CHECK(baseline_method_to_string(BaselineMethod::replace_m) == "replace_m");
  CHECK(baseline_method_to_string(BaselineMethod::xformer_r) == "xformer_r");
  CHECK_THROWS(baseline_method_from_string("fimap"));

  BaselineConfig cfg;
  cfg.validate();
  cfg.m = 0;
  CHECK_THROWS(cfg.validate());
  cfg.m = 1;
  cfg.k = 0;
  CHECK_THROWS(cfg.validate());
}
