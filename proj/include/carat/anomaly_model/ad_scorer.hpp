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
#include <memory>
#include <string>
#include <vector>

#include "carat/data/schema.hpp"
#include "carat/nn/tensor.hpp"

namespace carat::nn {
class Graph;
}

namespace carat {

enum class AdVariant { additive, pairwise };

AdVariant ad_variant_from_string(const std::string& s);
std::string ad_variant_to_string(AdVariant v);

struct AdConfig {
  int64_t embedding_dim = 32;
  int64_t negatives_per_positive = 4;
  int64_t epochs = 30;
  int64_t batch_size = 512;
  double learning_rate = 0.0005;
  uint64_t seed = 1;
  AdVariant variant = AdVariant::additive;

  void validate() const;
};

// Likelihood scorer over records; higher score = more normal. The rest of
// the toolkit treats this as a black box behind score()/score_batch().
//
// additive: score = c - |W s + b|^2 with s the sum of entity embeddings.
// pairwise: score = w . (per-pair embedding dot products) + b.
class AdScorer {
 public:
  AdScorer(AdConfig cfg, const DomainSchema& schema);

  double score(const EncodedRecord& r) const;
  std::vector<double> score_batch(const std::vector<EncodedRecord>& rs) const;

  const AdConfig& config() const { return cfg_; }
  uint64_t schema_hash() const { return schema_hash_; }

  // Exposed for the trainer and the archive writer; order is stable.
  std::vector<nn::Param*> params();

 private:
  friend int ad_loss_graph(nn::Graph& g, AdScorer& scorer, const std::vector<EncodedRecord>& batch,
                           std::vector<double> labels);

  AdConfig cfg_;
  uint64_t schema_hash_ = 0;
  std::vector<int64_t> vocab_sizes_;
  std::vector<nn::Param> embed_;
  nn::Param w_, b_, c_;
};

// Noise-contrastive training: observed records positive, copies with one
// uniformly resampled entity negative, logistic loss, Adam.
AdScorer train_ad(const Dataset& dataset, const AdConfig& cfg);

// Builds the training loss on the tape with the scorer's parameters as
// trainable leaves. This is the exact objective train_ad optimizes;
// exposed so gradient checks can probe it.
int ad_loss_graph(nn::Graph& g, AdScorer& scorer, const std::vector<EncodedRecord>& batch,
                  std::vector<double> labels);

// Indices of the ceil(fraction * n) lowest-scoring records, ascending;
// score ties broken by record index ascending.
std::vector<int64_t> flag_anomalies(const AdScorer& scorer, const std::vector<EncodedRecord>& records,
                                    double fraction);
std::vector<int64_t> flag_anomalies(const std::vector<double>& scores, double fraction);

// Rank of the instance within comparison + {instance}, ascending by score,
// rank 1 = most anomalous; ties rank the instance as more anomalous.
int64_t rank_within(const AdScorer& scorer, const EncodedRecord& instance,
                    const std::vector<EncodedRecord>& comparison);
int64_t rank_within(double instance_score, const std::vector<double>& comparison_scores);

}  // namespace carat
