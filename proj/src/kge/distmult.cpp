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
#include "carat/kge/distmult.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "carat/nn/adam.hpp"
#include "carat/nn/graph.hpp"
#include "carat/rng.hpp"

namespace carat {

void KgeConfig::validate() const {
  require(dim >= 1, "kge config: dim must be >= 1");
  require(negatives_per_positive >= 1, "kge config: negatives_per_positive must be >= 1");
  require(epochs >= 1 && batch_size >= 1, "kge config: epochs and batch_size must be >= 1");
  require(learning_rate > 0.0, "kge config: learning_rate must be positive");
}

DistMultModel::DistMultModel(KgeConfig cfg, std::vector<int64_t> vocab_sizes,
                             std::vector<Relation> relations, uint64_t schema_hash)
    : cfg_(std::move(cfg)), vocab_sizes_(std::move(vocab_sizes)), relations_(std::move(relations)),
      schema_hash_(schema_hash) {
  cfg_.validate();
  require(!vocab_sizes_.empty(), "distmult: no domains");
  require(!relations_.empty(), "distmult: no relations");
  require(std::is_sorted(relations_.begin(), relations_.end()), "distmult: relations must be sorted");
  const int64_t m = static_cast<int64_t>(vocab_sizes_.size());
  for (const Relation& r : relations_) {
    require(r.dom_a >= 0 && r.dom_a < r.dom_b && r.dom_b < m, "distmult: bad relation domain pair");
  }
  offsets_.resize(vocab_sizes_.size() + 1, 0);
  for (size_t j = 0; j < vocab_sizes_.size(); ++j) {
    require(vocab_sizes_[j] >= 1, "distmult: empty domain vocabulary");
    offsets_[j + 1] = offsets_[j] + vocab_sizes_[j];
  }
  node_embed_ = nn::Param("node_embed", {offsets_.back(), cfg_.dim});
  rel_embed_ = nn::Param("rel_embed", {static_cast<int64_t>(relations_.size()), cfg_.dim});
}

std::vector<nn::Param*> DistMultModel::params() { return {&node_embed_, &rel_embed_}; }

int64_t DistMultModel::node_id(const EntityRef& e) const {
  require(e.domain >= 0 && e.domain < static_cast<int64_t>(vocab_sizes_.size()),
          "distmult: domain out of range");
  require(e.entity >= 0 && e.entity < vocab_sizes_[static_cast<size_t>(e.domain)],
          "distmult: entity out of range");
  return offsets_[static_cast<size_t>(e.domain)] + e.entity;
}

int64_t DistMultModel::relation_index(int64_t dom_x, int64_t dom_y) const {
  const Relation key{std::min(dom_x, dom_y), std::max(dom_x, dom_y)};
  const auto it = std::lower_bound(relations_.begin(), relations_.end(), key);
  if (it == relations_.end() || !(*it == key)) return -1;
  return it - relations_.begin();
}

double DistMultModel::score_triple(const EntityRef& head, int64_t relation,
                                   const EntityRef& tail) const {
  require(relation >= 0 && relation < static_cast<int64_t>(relations_.size()),
          "distmult: relation out of range");
  const Relation rel = relations_[static_cast<size_t>(relation)];
  const bool fits = (head.domain == rel.dom_a && tail.domain == rel.dom_b) ||
                    (head.domain == rel.dom_b && tail.domain == rel.dom_a);
  require(fits, "distmult: head/tail domains do not match the relation");
  const int64_t d = cfg_.dim;
  const double* eh = &node_embed_.value.v[static_cast<size_t>(node_id(head) * d)];
  const double* et = &node_embed_.value.v[static_cast<size_t>(node_id(tail) * d)];
  const double* r = &rel_embed_.value.v[static_cast<size_t>(relation * d)];
  double acc = 0.0;
  for (int64_t k = 0; k < d; ++k) acc += r[k] * (eh[k] * et[k]);
  return acc;
}

std::vector<int64_t> DistMultModel::knn_tails(const EntityRef& head, int64_t relation,
                                              int64_t target_domain, int64_t K) const {
  require(K >= 1, "knn_tails: K must be >= 1");
  require(relation >= 0 && relation < static_cast<int64_t>(relations_.size()),
          "knn_tails: relation out of range");
  const Relation rel = relations_[static_cast<size_t>(relation)];
  const bool covered = (head.domain == rel.dom_a && target_domain == rel.dom_b) ||
                       (head.domain == rel.dom_b && target_domain == rel.dom_a);
  require(covered, "knn_tails: relation does not cover the domain pair");

  const int64_t n = vocab_sizes_[static_cast<size_t>(target_domain)];
  std::vector<double> scores(static_cast<size_t>(n));
  for (int64_t t = 0; t < n; ++t)
    scores[static_cast<size_t>(t)] = score_triple(head, relation, {target_domain, t});

  std::vector<int64_t> order(static_cast<size_t>(n));
  std::iota(order.begin(), order.end(), 0);
  const int64_t k = std::min(K, n);
  std::partial_sort(order.begin(), order.begin() + k, order.end(), [&](int64_t a, int64_t b) {
    const double sa = scores[static_cast<size_t>(a)], sb = scores[static_cast<size_t>(b)];
    return sa != sb ? sa > sb : a < b;
  });
  order.resize(static_cast<size_t>(k));
  return order;
}

int kge_loss_graph(nn::Graph& g, DistMultModel& model, const std::vector<Triple>& batch,
                   std::vector<double> labels) {
  require(!batch.empty() && batch.size() == labels.size(), "kge_loss_graph: bad batch");
  const int nodes = g.param(model.node_embed_);
  const int rels = g.param(model.rel_embed_);
  std::vector<int64_t> h_idx, t_idx, r_idx;
  for (const Triple& tr : batch) {
    h_idx.push_back(model.node_id(tr.head));
    t_idx.push_back(model.node_id(tr.tail));
    require(tr.relation >= 0 && tr.relation < static_cast<int64_t>(model.relations_.size()),
            "kge_loss_graph: relation out of range");
    r_idx.push_back(tr.relation);
  }
  const int h = g.rows(nodes, std::move(h_idx));
  const int t = g.rows(nodes, std::move(t_idx));
  const int r = g.rows(rels, std::move(r_idx));
  const int logits = g.row_sum(g.mul(g.mul(h, t), r));
  return g.bce_logits(logits, std::move(labels));
}

DistMultModel train_distmult(const HINGraph& hin, const KgeConfig& cfg) {
  require(hin.edge_count() >= 1, "train_distmult: graph has no edges");
  DistMultModel model(cfg, hin.vocab_sizes(), hin.relations(), hin.schema_hash());

  Rng init_rng(Rng::derive(cfg.seed, "kge-init"));
  for (nn::Param* p : model.params()) p->init_normal(init_rng, 0.1);

  // Every undirected edge trains in both orientations so the corruption
  // pressure reaches the tails of both domains.
  std::vector<Triple> positives;
  for (int64_t r = 0; r < static_cast<int64_t>(hin.relations().size()); ++r) {
    const Relation rel = hin.relations()[static_cast<size_t>(r)];
    for (const auto& [ea, eb] : hin.edges(r)) {
      positives.push_back({{rel.dom_a, ea}, r, {rel.dom_b, eb}});
      positives.push_back({{rel.dom_b, eb}, r, {rel.dom_a, ea}});
    }
  }

  Rng order_rng(Rng::derive(cfg.seed, "kge-order"));
  Rng neg_rng(Rng::derive(cfg.seed, "kge-neg"));
  nn::Adam opt(cfg.learning_rate);
  opt.attach(model.params());

  const int64_t n = static_cast<int64_t>(positives.size());
  std::vector<int64_t> order(static_cast<size_t>(n));
  std::iota(order.begin(), order.end(), 0);

  for (int64_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    order_rng.shuffle(order);
    for (int64_t start = 0; start < n; start += cfg.batch_size) {
      const int64_t stop = std::min(n, start + cfg.batch_size);
      std::vector<Triple> batch;
      std::vector<double> labels;
      for (int64_t i = start; i < stop; ++i) {
        const Triple& pos = positives[static_cast<size_t>(order[static_cast<size_t>(i)])];
        batch.push_back(pos);
        labels.push_back(1.0);
        const int64_t tail_vocab = hin.vocab_sizes()[static_cast<size_t>(pos.tail.domain)];
        if (tail_vocab < 2) continue;
        for (int64_t kneg = 0; kneg < cfg.negatives_per_positive; ++kneg) {
          Triple neg = pos;
          neg.tail.entity = neg_rng.uniform_int_excluding(tail_vocab, pos.tail.entity);
          batch.push_back(neg);
          labels.push_back(0.0);
        }
      }
      nn::Graph g;
      const int loss = kge_loss_graph(g, model, batch, std::move(labels));
      require(std::isfinite(g.scalar(loss)), "distmult training diverged: non-finite loss");
      g.backward(loss);
      opt.step();
    }
  }
  return model;
}

}  // namespace carat
