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
#include <cmath>

#include "carat/anomaly_model/ad_scorer.hpp"
#include "carat/data/synthetic.hpp"
#include "doctest.h"
#include "support.hpp"

using namespace carat;

namespace {

const Dataset& small_corpus() {
  static const Dataset ds = [] {
    RuleCorpusSpec spec;
    spec.m = 4;
    spec.vocab_size = 12;
    spec.clusters = 3;
    spec.train_records = 400;
    spec.test_records = 200;
    spec.noise = 0.01;
    spec.seed = 3;
    return generate_rule_corpus(spec);
  }();
  return ds;
}

AdConfig small_config(AdVariant variant, uint64_t seed = 1) {
  AdConfig cfg;
  cfg.embedding_dim = 8;
  cfg.negatives_per_positive = 2;
  cfg.epochs = 15;
  cfg.batch_size = 64;
  cfg.learning_rate = 0.01;
  cfg.seed = seed;
  cfg.variant = variant;
  return cfg;
}

const AdScorer& trained(AdVariant variant) {
  static const AdScorer additive = train_ad(small_corpus(), small_config(AdVariant::additive));
  static const AdScorer pairwise = train_ad(small_corpus(), small_config(AdVariant::pairwise));
  return variant == AdVariant::additive ? additive : pairwise;
}

}  // namespace

TEST_CASE("trained scorer separates normal from perturbed records") {
  const Dataset& ds = small_corpus();
  const GroundTruthLabels labels = generate_synthetic_anomalies(ds, 120, 21);
  for (const AdVariant variant : {AdVariant::additive, AdVariant::pairwise}) {
    const AdScorer& scorer = trained(variant);

    double mean_normal = 0.0, mean_perturbed = 0.0;
    int64_t pairs_ordered = 0;
    for (const GroundTruthLabel& gt : labels) {
      const double s_orig = scorer.score(gt.original);
      const double s_pert = scorer.score(gt.perturbed);
      CHECK(std::isfinite(s_orig));
      CHECK(std::isfinite(s_pert));
      mean_normal += s_orig;
      mean_perturbed += s_pert;
      pairs_ordered += s_pert < s_orig ? 1 : 0;
    }
    mean_normal /= static_cast<double>(labels.size());
    mean_perturbed /= static_cast<double>(labels.size());
    CHECK(mean_normal > mean_perturbed);
    CHECK(static_cast<double>(pairs_ordered) >= 0.8 * static_cast<double>(labels.size()));
  }
}

TEST_CASE("training is seed deterministic and seed sensitive") {
  const Dataset& ds = small_corpus();
  AdScorer a = train_ad(ds, small_config(AdVariant::additive, 5));
  AdScorer b = train_ad(ds, small_config(AdVariant::additive, 5));
  AdScorer c = train_ad(ds, small_config(AdVariant::additive, 6));

  const EncodedRecord probe = ds.test[0];
  CHECK(a.score(probe) == b.score(probe));
  CHECK(a.score(probe) != c.score(probe));
  CHECK(std::isfinite(c.score(probe)));
}

TEST_CASE("scoring is a pure function, invariant to batch composition") {
  const AdScorer& scorer = trained(AdVariant::additive);
  const Dataset& ds = small_corpus();
  const std::vector<EncodedRecord> batch(ds.test.begin(), ds.test.begin() + 10);
  const std::vector<double> batched = scorer.score_batch(batch);
  for (size_t i = 0; i < batch.size(); ++i) {
    CHECK(scorer.score(batch[i]) == batched[i]);
  }
  CHECK(scorer.score(batch[0]) == scorer.score(batch[0]));
}

TEST_CASE("additive score depends only on the embedding sum") {
  DomainSchema schema;
  schema.domains = {"A", "B"};
  schema.vocab = {{"a0", "a1"}, {"b0", "b1"}};
  AdConfig cfg = small_config(AdVariant::additive);
  cfg.embedding_dim = 4;
  AdScorer scorer(cfg, schema);

  Rng rng(9);
  std::vector<double> u(4), v(4);
  for (double& x : u) x = rng.uniform(-1.0, 1.0);
  for (double& x : v) x = rng.uniform(-1.0, 1.0);
  for (nn::Param* p : scorer.params()) {
    if (p->name == "embed_0") {
      std::copy(u.begin(), u.end(), p->value.v.begin());
      std::copy(v.begin(), v.end(), p->value.v.begin() + 4);
    } else if (p->name == "embed_1") {
      std::copy(v.begin(), v.end(), p->value.v.begin());
      std::copy(u.begin(), u.end(), p->value.v.begin() + 4);
    } else {
      carat::testing::fill_away_from_zero(*p, rng);
    }
  }
  // embeddings sum to u+v for (0,0) and v+u for (1,1)
  CHECK(scorer.score({{0, 0}}) == scorer.score({{1, 1}}));
}

TEST_CASE("flag_anomalies selects the ceil(fraction*n) lowest scorers") {
  std::vector<double> scores(200);
  for (size_t i = 0; i < scores.size(); ++i) scores[i] = static_cast<double>(i);
  CHECK(flag_anomalies(scores, 0.01) == std::vector<int64_t>({0, 1}));
  CHECK(flag_anomalies(scores, 1.0).size() == 200);

  CHECK(flag_anomalies({3.0, 1.0, 2.0}, 0.34) == std::vector<int64_t>({1, 2}));
  CHECK(flag_anomalies({1.0, 1.0, 1.0, 0.0}, 0.5) == std::vector<int64_t>({0, 3}));
  CHECK_THROWS_AS(flag_anomalies(std::vector<double>{}, 0.5), Error);
  CHECK_THROWS_AS(flag_anomalies({1.0}, 0.0), Error);
}

TEST_CASE("rank_within follows the anomalous-first tie rule") {
  CHECK(rank_within(0.0, {1.0, 2.0, 3.0, 4.0, 5.0}) == 1);
  CHECK(rank_within(9.0, {1.0, 2.0, 3.0, 4.0, 5.0}) == 6);
  CHECK(rank_within(2.0, {2.0}) == 1);
  CHECK(rank_within(2.0, {1.0, 2.0, 3.0}) == 2);
  CHECK_THROWS_AS(rank_within(1.0, {}), Error);
}

TEST_CASE("training loss gradients match finite differences") {
  DomainSchema schema;
  schema.domains = {"A", "B", "C"};
  schema.vocab = {{"a0", "a1", "a2", "a3"}, {"b0", "b1", "b2", "b3"}, {"c0", "c1", "c2", "c3"}};

  const std::vector<EncodedRecord> batch = {
      {{0, 1, 2}}, {{1, 1, 1}}, {{3, 0, 2}}, {{2, 2, 0}}, {{0, 3, 3}},
      {{3, 1, 2}}, {{1, 0, 1}}, {{2, 3, 0}}, {{0, 0, 2}}, {{1, 2, 3}}};
  const std::vector<double> labels = {1, 1, 1, 1, 1, 0, 0, 0, 0, 0};

  for (const AdVariant variant : {AdVariant::additive, AdVariant::pairwise}) {
    AdConfig cfg = small_config(variant);
    cfg.embedding_dim = 3;
    AdScorer scorer(cfg, schema);
    Rng rng(31);
    for (nn::Param* p : scorer.params()) carat::testing::fill_away_from_zero(*p, rng);
    carat::testing::check_grads(scorer.params(), [&](nn::Graph& g) {
      return ad_loss_graph(g, scorer, batch, labels);
    }, 1e-4);
  }
}

TEST_CASE("both variants share the scoring interface") {
  const Dataset& ds = small_corpus();
  for (const AdVariant variant : {AdVariant::additive, AdVariant::pairwise}) {
    const AdScorer& scorer = trained(variant);
    CHECK(scorer.schema_hash() == ds.schema.hash());
    const std::vector<int64_t> flagged = flag_anomalies(scorer, ds.test, 0.01);
    CHECK(flagged.size() == 2);
    for (const int64_t i : flagged) {
      CHECK(i >= 0);
      CHECK(i < static_cast<int64_t>(ds.test.size()));
    }
    CHECK(rank_within(scorer, ds.test[0], {ds.test.begin() + 1, ds.test.begin() + 6}) >= 1);
  }
}
