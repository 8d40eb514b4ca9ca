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

#include "carat/kge/hin.hpp"
#include "carat/nn/tensor.hpp"

namespace carat::nn {
class Graph;
}

namespace carat {

struct KgeConfig {
  int64_t dim = 100;
  int64_t negatives_per_positive = 4;
  int64_t epochs = 300;
  int64_t batch_size = 1024;
  double learning_rate = 0.001;
  uint64_t seed = 1;

  void validate() const;
};

struct EntityRef {
  int64_t domain;
  int64_t entity;
};

// One oriented positive edge plus its relation, used in training batches.
struct Triple {
  EntityRef head;
  int64_t relation;
  EntityRef tail;
};

// Diagonal bilinear embedding model over the typed entity graph. The score
// sums r[k] * (e_h[k] * e_t[k]); grouping the entity product first makes
// the head/tail symmetry hold bit-exactly, not just algebraically.
class DistMultModel {
 public:
  DistMultModel(KgeConfig cfg, std::vector<int64_t> vocab_sizes, std::vector<Relation> relations,
                uint64_t schema_hash);

  double score_triple(const EntityRef& head, int64_t relation, const EntityRef& tail) const;

  // Top-K entities of target_domain by score against the head, score
  // descending, ties by entity index ascending. Exact: scans the domain.
  std::vector<int64_t> knn_tails(const EntityRef& head, int64_t relation, int64_t target_domain,
                                 int64_t K) const;

  int64_t relation_index(int64_t dom_x, int64_t dom_y) const;
  const std::vector<Relation>& relations() const { return relations_; }
  const std::vector<int64_t>& vocab_sizes() const { return vocab_sizes_; }
  const KgeConfig& config() const { return cfg_; }
  uint64_t schema_hash() const { return schema_hash_; }

  std::vector<nn::Param*> params();

 private:
  friend int kge_loss_graph(nn::Graph& g, DistMultModel& model, const std::vector<Triple>& batch,
                            std::vector<double> labels);

  int64_t node_id(const EntityRef& e) const;

  KgeConfig cfg_;
  std::vector<int64_t> vocab_sizes_;
  std::vector<int64_t> offsets_;
  std::vector<Relation> relations_;
  uint64_t schema_hash_ = 0;
  nn::Param node_embed_;
  nn::Param rel_embed_;
};

// Logistic loss over positive edges (both orientations) and uniformly
// tail-corrupted negatives, Adam, deterministic under config seed.
DistMultModel train_distmult(const HINGraph& hin, const KgeConfig& cfg);

// The exact training objective on the tape, for gradient verification.
int kge_loss_graph(nn::Graph& g, DistMultModel& model, const std::vector<Triple>& batch,
                   std::vector<double> labels);

// Interface parity wrapper: answers neighbor queries through the exact
// domain scan of the model.
class NeighborIndex {
 public:
  explicit NeighborIndex(const DistMultModel& model) : model_(&model) {}

  std::vector<int64_t> knn_tails(const EntityRef& head, int64_t relation, int64_t target_domain,
                                 int64_t K) const {
    return model_->knn_tails(head, relation, target_domain, K);
  }

 private:
  const DistMultModel* model_;
};

}  // namespace carat
