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
#include "carat/anomaly_model/ad_scorer.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "carat/nn/adam.hpp"
#include "carat/nn/graph.hpp"
#include "carat/rng.hpp"

namespace carat {

AdVariant ad_variant_from_string(const std::string& s) {
  if (s == "additive") return AdVariant::additive;
  if (s == "pairwise") return AdVariant::pairwise;
  fail("unknown anomaly scorer variant '" + s + "'");
}

std::string ad_variant_to_string(AdVariant v) {
  return v == AdVariant::additive ? "additive" : "pairwise";
}

void AdConfig::validate() const {
  require(embedding_dim >= 1, "ad config: embedding_dim must be >= 1");
  require(negatives_per_positive >= 1, "ad config: negatives_per_positive must be >= 1");
  require(epochs >= 1 && batch_size >= 1, "ad config: epochs and batch_size must be >= 1");
  require(learning_rate > 0.0, "ad config: learning_rate must be positive");
}

AdScorer::AdScorer(AdConfig cfg, const DomainSchema& schema) : cfg_(std::move(cfg)) {
  cfg_.validate();
  schema.validate();
  schema_hash_ = schema.hash();
  const int64_t m = schema.m();
  const int64_t d = cfg_.embedding_dim;
  vocab_sizes_.resize(static_cast<size_t>(m));
  embed_.reserve(static_cast<size_t>(m));
  for (int64_t j = 0; j < m; ++j) {
    vocab_sizes_[static_cast<size_t>(j)] = schema.vocab_size(j);
    embed_.emplace_back("embed_" + std::to_string(j),
                        std::vector<int64_t>{schema.vocab_size(j), d});
  }
  if (cfg_.variant == AdVariant::additive) {
    w_ = nn::Param("w", {d, d});
    b_ = nn::Param("b", {d});
    c_ = nn::Param("c", {1});
  } else {
    const int64_t n_pairs = m * (m - 1) / 2;
    w_ = nn::Param("w", {n_pairs, 1});
    b_ = nn::Param("b", {1});
    c_ = nn::Param("c", {1});
  }
}

std::vector<nn::Param*> AdScorer::params() {
  std::vector<nn::Param*> ps;
  for (nn::Param& e : embed_) ps.push_back(&e);
  ps.push_back(&w_);
  ps.push_back(&b_);
  if (cfg_.variant == AdVariant::additive) ps.push_back(&c_);
  return ps;
}

namespace {

// Shared forward pass; `enter` wires params in as trainable or frozen.
int score_logits(nn::Graph& g, const std::vector<EncodedRecord>& rs, AdVariant variant,
                 const std::vector<int>& embed_nodes, int w, int b, int c) {
  const int64_t m = static_cast<int64_t>(embed_nodes.size());
  const int64_t B = static_cast<int64_t>(rs.size());
  std::vector<int> gathered(static_cast<size_t>(m));
  for (int64_t j = 0; j < m; ++j) {
    std::vector<int64_t> idx(static_cast<size_t>(B));
    for (int64_t i = 0; i < B; ++i) idx[static_cast<size_t>(i)] = rs[static_cast<size_t>(i)].values[static_cast<size_t>(j)];
    gathered[static_cast<size_t>(j)] = g.rows(embed_nodes[static_cast<size_t>(j)], std::move(idx));
  }
  if (variant == AdVariant::additive) {
    int s = gathered[0];
    for (int64_t j = 1; j < m; ++j) s = g.add(s, gathered[static_cast<size_t>(j)]);
    const int h = g.add_bias(g.matmul(s, w), b);
    const int neg_sq = g.scale(g.row_sum(g.mul(h, h)), -1.0);
    return g.add_bias(neg_sq, c);
  }
  std::vector<int> dots;
  for (int64_t i = 0; i < m; ++i)
    for (int64_t j = i + 1; j < m; ++j) {
      const int d = g.row_sum(g.mul(gathered[static_cast<size_t>(i)], gathered[static_cast<size_t>(j)]));
      dots.push_back(d);
    }
  int dot_mat = dots[0];
  for (size_t p = 1; p < dots.size(); ++p) dot_mat = g.concat_cols(dot_mat, dots[p]);
  return g.add_bias(g.matmul(dot_mat, w), b);
}

}  // namespace

std::vector<double> AdScorer::score_batch(const std::vector<EncodedRecord>& rs) const {
  require(!rs.empty(), "score_batch: empty input");
  for (const EncodedRecord& r : rs) {
    require(static_cast<int64_t>(r.values.size()) == static_cast<int64_t>(vocab_sizes_.size()),
            "score_batch: record arity mismatch");
    for (size_t j = 0; j < r.values.size(); ++j)
      require(r.values[j] >= 0 && r.values[j] < vocab_sizes_[j], "score_batch: entity out of range");
  }
  nn::Graph g;
  std::vector<int> embed_nodes;
  for (const nn::Param& e : embed_) embed_nodes.push_back(g.frozen(e));
  const int logits = score_logits(g, rs, cfg_.variant, embed_nodes, g.frozen(w_), g.frozen(b_),
                                  g.frozen(c_));
  const nn::Tensor& t = g.val(logits);
  std::vector<double> out(t.v.begin(), t.v.end());
  for (const double s : out) require(std::isfinite(s), "score_batch: non-finite score");
  return out;
}

double AdScorer::score(const EncodedRecord& r) const { return score_batch({r})[0]; }

int ad_loss_graph(nn::Graph& g, AdScorer& scorer, const std::vector<EncodedRecord>& batch,
                  std::vector<double> labels) {
  require(batch.size() == labels.size(), "ad_loss_graph: batch/label size mismatch");
  std::vector<int> embed_nodes;
  for (nn::Param& e : scorer.embed_) embed_nodes.push_back(g.param(e));
  const int logits = score_logits(g, batch, scorer.cfg_.variant, embed_nodes, g.param(scorer.w_),
                                  g.param(scorer.b_), g.param(scorer.c_));
  return g.bce_logits(logits, std::move(labels));
}

AdScorer train_ad(const Dataset& dataset, const AdConfig& cfg) {
  dataset.validate();
  AdScorer scorer(cfg, dataset.schema);
  const DomainSchema& schema = dataset.schema;
  const int64_t m = schema.m();
  const int64_t n = static_cast<int64_t>(dataset.train.size());

  Rng init_rng(Rng::derive(cfg.seed, "ad-init"));
  for (nn::Param* p : scorer.params()) p->init_normal(init_rng, 0.1);

  Rng order_rng(Rng::derive(cfg.seed, "ad-order"));
  Rng neg_rng(Rng::derive(cfg.seed, "ad-neg"));
  nn::Adam opt(cfg.learning_rate);
  opt.attach(scorer.params());

  std::vector<int64_t> eligible;
  for (int64_t j = 0; j < m; ++j)
    if (schema.vocab_size(j) >= 2) eligible.push_back(j);
  require(!eligible.empty(), "train_ad: no domain has a vocabulary of size >= 2");

  std::vector<int64_t> order(static_cast<size_t>(n));
  std::iota(order.begin(), order.end(), 0);

  for (int64_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    order_rng.shuffle(order);
    for (int64_t start = 0; start < n; start += cfg.batch_size) {
      const int64_t stop = std::min(n, start + cfg.batch_size);
      std::vector<EncodedRecord> batch;
      std::vector<double> labels;
      for (int64_t i = start; i < stop; ++i) {
        const EncodedRecord& pos = dataset.train[static_cast<size_t>(order[static_cast<size_t>(i)])];
        batch.push_back(pos);
        labels.push_back(1.0);
        for (int64_t k = 0; k < cfg.negatives_per_positive; ++k) {
          EncodedRecord neg = pos;
          const int64_t j =
              eligible[static_cast<size_t>(neg_rng.uniform_int(static_cast<int64_t>(eligible.size())))];
          neg.values[static_cast<size_t>(j)] = neg_rng.uniform_int_excluding(
              schema.vocab_size(j), pos.values[static_cast<size_t>(j)]);
          batch.push_back(std::move(neg));
          labels.push_back(0.0);
        }
      }
      nn::Graph g;
      const int loss = ad_loss_graph(g, scorer, batch, std::move(labels));
      require(std::isfinite(g.scalar(loss)), "ad training diverged: non-finite loss");
      g.backward(loss);
      opt.step();
    }
  }
  return scorer;
}

std::vector<int64_t> flag_anomalies(const std::vector<double>& scores, double fraction) {
  require(!scores.empty(), "flag_anomalies: empty input");
  require(fraction > 0.0 && fraction <= 1.0, "flag_anomalies: fraction must be in (0, 1]");
  const int64_t n = static_cast<int64_t>(scores.size());
  const int64_t k = static_cast<int64_t>(std::ceil(fraction * static_cast<double>(n)));
  std::vector<int64_t> idx(scores.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::stable_sort(idx.begin(), idx.end(), [&](int64_t a, int64_t b) {
    return scores[static_cast<size_t>(a)] < scores[static_cast<size_t>(b)];
  });
  idx.resize(static_cast<size_t>(k));
  std::sort(idx.begin(), idx.end());
  return idx;
}

std::vector<int64_t> flag_anomalies(const AdScorer& scorer, const std::vector<EncodedRecord>& records,
                                    double fraction) {
  return flag_anomalies(scorer.score_batch(records), fraction);
}

int64_t rank_within(double instance_score, const std::vector<double>& comparison_scores) {
  require(!comparison_scores.empty(), "rank_within: empty comparison set");
  int64_t below = 0;
  for (const double s : comparison_scores)
    if (s < instance_score) ++below;
  return below + 1;
}

int64_t rank_within(const AdScorer& scorer, const EncodedRecord& instance,
                    const std::vector<EncodedRecord>& comparison) {
  return rank_within(scorer.score(instance), scorer.score_batch(comparison));
}

}  // namespace carat
