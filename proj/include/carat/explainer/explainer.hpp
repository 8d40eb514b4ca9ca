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

#include "carat/data/schema.hpp"
#include "carat/nn/tensor.hpp"

namespace carat::nn {
class Graph;
}

namespace carat {

struct EncoderConfig {
  int64_t embedding_dim = 64;
  int64_t num_layers = 4;
  int64_t num_heads = 8;

  // Token width is the embedding/positional concatenation.
  int64_t token_width() const { return 2 * embedding_dim; }
  void validate() const;
};

struct ExplainerTrainConfig {
  double mask_fraction = 0.2;
  double perturb_fraction = 0.2;
  double alpha = 0.3;
  int64_t epochs = 250;
  int64_t batch_size = 512;
  double learning_rate = 0.0005;
  bool loss_on_corrupted_only = false;
  uint64_t seed = 1;

  void validate() const;
};

// Per-record likelihood that each domain's entity belongs in its context.
using LikelihoodVector = std::vector<double>;

// Self-attention encoder over record tokens. Each domain contributes one
// token: its entity embedding concatenated with a learned per-domain
// positional vector. Embedding tables carry one extra MASK row.
class Encoder {
 public:
  Encoder(EncoderConfig cfg, const DomainSchema& schema);

  // Tape handles for the assembled input tokens and contextual outputs,
  // both (batch * m, 2d) in record-major row order, plus the positional
  // table (m, d). `order` permutes the token slots of every record (slot t
  // holds domain order[t]); slot_of_domain inverts it so downstream heads
  // can find their domain's rows.
  struct Forward {
    int x;
    int z;
    int pos;
    std::vector<int64_t> slot_of_domain;
  };
  Forward forward(nn::Graph& g, const std::vector<EncodedRecord>& batch,
                  const std::vector<int64_t>* order = nullptr) const;
  Forward forward_train(nn::Graph& g, const std::vector<EncodedRecord>& batch);

  std::vector<nn::Param*> params();
  const EncoderConfig& config() const { return cfg_; }
  uint64_t schema_hash() const { return schema_hash_; }
  int64_t m() const { return static_cast<int64_t>(vocab_sizes_.size()); }
  const std::vector<int64_t>& vocab_sizes() const { return vocab_sizes_; }

 private:
  Forward forward_impl(nn::Graph& g, const std::vector<EncodedRecord>& batch, bool trainable,
                       const std::vector<int64_t>* order);

  struct Layer {
    nn::Param wq, bq, wk, bk, wv, bv, wo, bo;
    nn::Param ln1_gain, ln1_bias;
    nn::Param ff1_w, ff1_b, ff2_w, ff2_b;
    nn::Param ln2_gain, ln2_bias;
  };

  EncoderConfig cfg_;
  uint64_t schema_hash_ = 0;
  std::vector<int64_t> vocab_sizes_;
  std::vector<nn::Param> embed_;
  nn::Param pos_;
  std::vector<Layer> layers_;
};

// Reconstruction head used only to pretrain the encoder: one shared dense
// layer, positional re-injection by concatenation, then parallel per-domain
// heads ending in a categorical distribution over that domain's vocabulary.
class DecoderR {
 public:
  DecoderR(const EncoderConfig& enc_cfg, const DomainSchema& schema);

  // Per-domain logits over the vocabulary, each (batch, vocab_j), from the
  // encoder forward handles.
  std::vector<int> logits(nn::Graph& g, const Encoder::Forward& fwd, int64_t batch,
                          bool trainable);

  std::vector<nn::Param*> params();

  static constexpr int64_t kSharedWidth = 256;
  static constexpr int64_t kHidden1 = 128;
  static constexpr int64_t kHidden2 = 64;

 private:
  int64_t d_;
  nn::Param shared_w_, shared_b_;
  std::vector<nn::Param> h1_w_, h1_b_, h2_w_, h2_b_, out_w_, out_b_;
  std::vector<int64_t> vocab_sizes_;
};

// Likelihood head: per domain, a bilinear interaction between the input
// token and its contextual output feeds a small dense stack with a
// logistic output.
class DecoderP {
 public:
  DecoderP(const EncoderConfig& enc_cfg, const DomainSchema& schema);

  // Domain-major logits (m stacked (batch,1) blocks) for all positions.
  int logits(nn::Graph& g, const Encoder::Forward& fwd, int64_t batch, bool trainable);

  std::vector<nn::Param*> params();

  static constexpr int64_t kHidden1 = 32;
  static constexpr int64_t kHidden2 = 16;

 private:
  int64_t d_;
  std::vector<nn::Param> bil_w_, bil_b_, l1_w_, l1_b_, l2_w_, l2_b_, out_w_, out_b_;
};

struct PretrainResult {
  Encoder encoder;
  DecoderR decoder_r;
};

// Joint reconstruction pretraining: per position, ~mask_fraction replaced
// by MASK and ~perturb_fraction by a random other entity of the domain;
// loss is categorical cross-entropy against the originals, over all
// positions (or only corrupted ones when configured).
PretrainResult pretrain_encoder(const Dataset& dataset, const EncoderConfig& enc_cfg,
                                const ExplainerTrainConfig& cfg);

// Trains the likelihood head against planted perturbations with the
// encoder parameters frozen: fraction alpha of records stay unchanged
// (labels all 1), the rest get 1 or 2 domains replaced (labels 0 there).
DecoderP train_decoder_p(const Encoder& encoder, const Dataset& dataset,
                         const ExplainerTrainConfig& cfg);

// Exact training objectives on the tape, for gradient verification.
// corrupted: the model inputs; originals: reconstruction targets;
// corrupted_positions: per record, the positions that were masked or
// perturbed (consulted when corrupted_only is set).
int pretrain_loss_graph(nn::Graph& g, Encoder& encoder, DecoderR& decoder,
                        const std::vector<EncodedRecord>& corrupted,
                        const std::vector<EncodedRecord>& originals,
                        const std::vector<std::vector<int64_t>>& corrupted_positions,
                        bool corrupted_only);
// labels are record-major (record i, domain j) -> i*m + j.
int decoder_p_loss_graph(nn::Graph& g, const Encoder& encoder, DecoderP& decoder,
                         const std::vector<EncodedRecord>& batch, const std::vector<double>& labels);

// Per-domain reconstruction distributions for a batch of records, each
// (batch, vocab_j), rows summing to 1.
std::vector<nn::Tensor> reconstruct(const Encoder& encoder, const DecoderR& decoder,
                                    const std::vector<EncodedRecord>& batch);

LikelihoodVector entity_likelihoods(const Encoder& encoder, const DecoderP& decoder,
                                    const EncodedRecord& record);
std::vector<LikelihoodVector> entity_likelihoods_batch(const Encoder& encoder,
                                                       const DecoderP& decoder,
                                                       const std::vector<EncodedRecord>& batch);
// Feeds token slots in the given domain order; results are reported per
// domain regardless of order, so any permutation must agree with the
// identity order up to attention round-off.
LikelihoodVector entity_likelihoods_ordered(const Encoder& encoder, const DecoderP& decoder,
                                            const EncodedRecord& record,
                                            const std::vector<int64_t>& order);

// Domains whose likelihood falls below the threshold; argmin fallback
// (lowest index on ties) keeps the result non-empty.
std::vector<int64_t> select_domains(const LikelihoodVector& likelihoods, double threshold = 0.5);

}  // namespace carat
