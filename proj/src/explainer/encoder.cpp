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
#include <numeric>

#include "carat/explainer/explainer.hpp"
#include "carat/nn/graph.hpp"

namespace carat {

namespace {
constexpr int64_t kFfnFactor = 2;  // FFN hidden width = factor * token width
}

void EncoderConfig::validate() const {
  require(embedding_dim >= 1, "encoder config: embedding_dim must be >= 1");
  require(num_layers >= 1, "encoder config: num_layers must be >= 1");
  require(num_heads >= 1, "encoder config: num_heads must be >= 1");
  require(token_width() % num_heads == 0, "encoder config: token width not divisible by heads");
}

Encoder::Encoder(EncoderConfig cfg, const DomainSchema& schema) : cfg_(cfg) {
  cfg_.validate();
  schema.validate();
  schema_hash_ = schema.hash();
  const int64_t d = cfg_.embedding_dim;
  const int64_t w = cfg_.token_width();
  const int64_t m = schema.m();
  vocab_sizes_.resize(static_cast<size_t>(m));
  embed_.reserve(static_cast<size_t>(m));
  for (int64_t j = 0; j < m; ++j) {
    vocab_sizes_[static_cast<size_t>(j)] = schema.vocab_size(j);
    embed_.emplace_back("enc_embed_" + std::to_string(j),
                        std::vector<int64_t>{schema.vocab_size(j) + 1, d});
  }
  pos_ = nn::Param("enc_pos", {m, d});
  layers_.resize(static_cast<size_t>(cfg_.num_layers));
  for (int64_t l = 0; l < cfg_.num_layers; ++l) {
    Layer& L = layers_[static_cast<size_t>(l)];
    const std::string p = "enc_l" + std::to_string(l) + "_";
    L.wq = nn::Param(p + "wq", {w, w});
    L.bq = nn::Param(p + "bq", {w});
    L.wk = nn::Param(p + "wk", {w, w});
    L.bk = nn::Param(p + "bk", {w});
    L.wv = nn::Param(p + "wv", {w, w});
    L.bv = nn::Param(p + "bv", {w});
    L.wo = nn::Param(p + "wo", {w, w});
    L.bo = nn::Param(p + "bo", {w});
    L.ln1_gain = nn::Param(p + "ln1_gain", {w});
    L.ln1_bias = nn::Param(p + "ln1_bias", {w});
    L.ff1_w = nn::Param(p + "ff1_w", {w, kFfnFactor * w});
    L.ff1_b = nn::Param(p + "ff1_b", {kFfnFactor * w});
    L.ff2_w = nn::Param(p + "ff2_w", {kFfnFactor * w, w});
    L.ff2_b = nn::Param(p + "ff2_b", {w});
    L.ln2_gain = nn::Param(p + "ln2_gain", {w});
    L.ln2_bias = nn::Param(p + "ln2_bias", {w});
  }
}

std::vector<nn::Param*> Encoder::params() {
  std::vector<nn::Param*> ps;
  for (nn::Param& e : embed_) ps.push_back(&e);
  ps.push_back(&pos_);
  for (Layer& L : layers_) {
    for (nn::Param* p : {&L.wq, &L.bq, &L.wk, &L.bk, &L.wv, &L.bv, &L.wo, &L.bo, &L.ln1_gain,
                         &L.ln1_bias, &L.ff1_w, &L.ff1_b, &L.ff2_w, &L.ff2_b, &L.ln2_gain,
                         &L.ln2_bias})
      ps.push_back(p);
  }
  return ps;
}

Encoder::Forward Encoder::forward_impl(nn::Graph& g, const std::vector<EncodedRecord>& batch,
                                       bool trainable, const std::vector<int64_t>* order) {
  require(!batch.empty(), "encoder forward: empty batch");
  const int64_t m = this->m();
  const int64_t B = static_cast<int64_t>(batch.size());
  std::vector<int64_t> slots(static_cast<size_t>(m));
  if (order) {
    require(static_cast<int64_t>(order->size()) == m, "encoder forward: order length != m");
    std::vector<bool> seen(static_cast<size_t>(m), false);
    for (int64_t t = 0; t < m; ++t) {
      const int64_t j = (*order)[static_cast<size_t>(t)];
      require(j >= 0 && j < m && !seen[static_cast<size_t>(j)], "encoder forward: order not a permutation");
      seen[static_cast<size_t>(j)] = true;
      slots[static_cast<size_t>(j)] = t;
    }
  } else {
    std::iota(slots.begin(), slots.end(), 0);
  }

  auto enter = [&](nn::Param& p) { return trainable ? g.param(p) : g.frozen(p); };

  for (const EncodedRecord& r : batch) {
    require(static_cast<int64_t>(r.values.size()) == m, "encoder forward: record arity mismatch");
    for (int64_t j = 0; j < m; ++j) {
      const int64_t v = r.values[static_cast<size_t>(j)];
      require(v >= 0 && v <= vocab_sizes_[static_cast<size_t>(j)],
              "encoder forward: entity index out of range");
    }
  }

  const int pos_node = enter(pos_);

  // One (B, 2d) token block per domain, then interleaved to record-major.
  std::vector<int> blocks(static_cast<size_t>(m));
  for (int64_t j = 0; j < m; ++j) {
    std::vector<int64_t> idx(static_cast<size_t>(B));
    for (int64_t i = 0; i < B; ++i) idx[static_cast<size_t>(i)] = batch[static_cast<size_t>(i)].values[static_cast<size_t>(j)];
    const int emb = g.rows(enter(embed_[static_cast<size_t>(j)]), std::move(idx));
    const int pos = g.rows(pos_node, std::vector<int64_t>(static_cast<size_t>(B), j));
    blocks[static_cast<size_t>(j)] = g.concat_cols(emb, pos);
  }
  int stacked = g.concat_rows(blocks);  // domain-major: row j*B + i
  std::vector<int64_t> perm(static_cast<size_t>(B * m));
  for (int64_t i = 0; i < B; ++i)
    for (int64_t j = 0; j < m; ++j)
      perm[static_cast<size_t>(i * m + slots[static_cast<size_t>(j)])] = j * B + i;
  const int x = g.rows(stacked, std::move(perm));

  int h = x;
  for (Layer& L : layers_) {
    const int q = g.add_bias(g.matmul(h, enter(L.wq)), enter(L.bq));
    const int k = g.add_bias(g.matmul(h, enter(L.wk)), enter(L.bk));
    const int v = g.add_bias(g.matmul(h, enter(L.wv)), enter(L.bv));
    const int att = g.attention(q, k, v, B, m, cfg_.num_heads);
    const int proj = g.add_bias(g.matmul(att, enter(L.wo)), enter(L.bo));
    const int ln1 = g.layernorm(g.add(h, proj), enter(L.ln1_gain), enter(L.ln1_bias));
    const int ff = g.add_bias(
        g.matmul(g.gelu(g.add_bias(g.matmul(ln1, enter(L.ff1_w)), enter(L.ff1_b))), enter(L.ff2_w)),
        enter(L.ff2_b));
    h = g.layernorm(g.add(ln1, ff), enter(L.ln2_gain), enter(L.ln2_bias));
  }

  Forward fwd;
  fwd.x = x;
  fwd.z = h;
  fwd.pos = pos_node;
  fwd.slot_of_domain = std::move(slots);
  return fwd;
}

Encoder::Forward Encoder::forward(nn::Graph& g, const std::vector<EncodedRecord>& batch,
                                  const std::vector<int64_t>* order) const {
  return const_cast<Encoder*>(this)->forward_impl(g, batch, false, order);
}

Encoder::Forward Encoder::forward_train(nn::Graph& g, const std::vector<EncodedRecord>& batch) {
  return forward_impl(g, batch, true, nullptr);
}

}  // namespace carat
