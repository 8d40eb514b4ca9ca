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
#include "carat/explainer/explainer.hpp"
#include "carat/nn/graph.hpp"

namespace carat {

namespace {

// Rows of the (B*m, w) record-major token matrix belonging to domain j.
std::vector<int64_t> domain_rows(const Encoder::Forward& fwd, int64_t batch, int64_t m, int64_t j) {
  std::vector<int64_t> idx(static_cast<size_t>(batch));
  const int64_t slot = fwd.slot_of_domain[static_cast<size_t>(j)];
  for (int64_t i = 0; i < batch; ++i) idx[static_cast<size_t>(i)] = i * m + slot;
  return idx;
}

}  // namespace

DecoderR::DecoderR(const EncoderConfig& enc_cfg, const DomainSchema& schema) {
  enc_cfg.validate();
  schema.validate();
  d_ = enc_cfg.embedding_dim;
  const int64_t w = enc_cfg.token_width();
  const int64_t m = schema.m();
  shared_w_ = nn::Param("decr_shared_w", {w, kSharedWidth});
  shared_b_ = nn::Param("decr_shared_b", {kSharedWidth});
  for (int64_t j = 0; j < m; ++j) {
    const std::string p = "decr_d" + std::to_string(j) + "_";
    const int64_t vj = schema.vocab_size(j);
    vocab_sizes_.push_back(vj);
    h1_w_.emplace_back(p + "h1_w", std::vector<int64_t>{kSharedWidth + d_, kHidden1});
    h1_b_.emplace_back(p + "h1_b", std::vector<int64_t>{kHidden1});
    h2_w_.emplace_back(p + "h2_w", std::vector<int64_t>{kHidden1, kHidden2});
    h2_b_.emplace_back(p + "h2_b", std::vector<int64_t>{kHidden2});
    out_w_.emplace_back(p + "out_w", std::vector<int64_t>{kHidden2, vj});
    out_b_.emplace_back(p + "out_b", std::vector<int64_t>{vj});
  }
}

std::vector<nn::Param*> DecoderR::params() {
  std::vector<nn::Param*> ps = {&shared_w_, &shared_b_};
  for (size_t j = 0; j < h1_w_.size(); ++j) {
    ps.push_back(&h1_w_[j]);
    ps.push_back(&h1_b_[j]);
    ps.push_back(&h2_w_[j]);
    ps.push_back(&h2_b_[j]);
    ps.push_back(&out_w_[j]);
    ps.push_back(&out_b_[j]);
  }
  return ps;
}

std::vector<int> DecoderR::logits(nn::Graph& g, const Encoder::Forward& fwd, int64_t batch,
                                  bool trainable) {
  const int64_t m = static_cast<int64_t>(vocab_sizes_.size());
  auto enter = [&](nn::Param& p) { return trainable ? g.param(p) : g.frozen(p); };
  const int shared_w = enter(shared_w_);
  const int shared_b = enter(shared_b_);
  std::vector<int> out(static_cast<size_t>(m));
  for (int64_t j = 0; j < m; ++j) {
    const int zj = g.rows(fwd.z, domain_rows(fwd, batch, m, j));
    const int shared = g.gelu(g.add_bias(g.matmul(zj, shared_w), shared_b));
    const int pos = g.rows(fwd.pos, std::vector<int64_t>(static_cast<size_t>(batch), j));
    const int h0 = g.concat_cols(shared, pos);
    const size_t sj = static_cast<size_t>(j);
    const int h1 = g.gelu(g.add_bias(g.matmul(h0, enter(h1_w_[sj])), enter(h1_b_[sj])));
    const int h2 = g.gelu(g.add_bias(g.matmul(h1, enter(h2_w_[sj])), enter(h2_b_[sj])));
    out[sj] = g.add_bias(g.matmul(h2, enter(out_w_[sj])), enter(out_b_[sj]));
  }
  return out;
}

DecoderP::DecoderP(const EncoderConfig& enc_cfg, const DomainSchema& schema) {
  enc_cfg.validate();
  schema.validate();
  d_ = enc_cfg.embedding_dim;
  const int64_t w = enc_cfg.token_width();
  for (int64_t j = 0; j < schema.m(); ++j) {
    const std::string p = "decp_d" + std::to_string(j) + "_";
    bil_w_.emplace_back(p + "bil_w", std::vector<int64_t>{d_, w, w});
    bil_b_.emplace_back(p + "bil_b", std::vector<int64_t>{d_});
    l1_w_.emplace_back(p + "l1_w", std::vector<int64_t>{d_, kHidden1});
    l1_b_.emplace_back(p + "l1_b", std::vector<int64_t>{kHidden1});
    l2_w_.emplace_back(p + "l2_w", std::vector<int64_t>{kHidden1, kHidden2});
    l2_b_.emplace_back(p + "l2_b", std::vector<int64_t>{kHidden2});
    out_w_.emplace_back(p + "out_w", std::vector<int64_t>{kHidden2, 1});
    out_b_.emplace_back(p + "out_b", std::vector<int64_t>{1});
  }
}

std::vector<nn::Param*> DecoderP::params() {
  std::vector<nn::Param*> ps;
  for (size_t j = 0; j < bil_w_.size(); ++j) {
    ps.push_back(&bil_w_[j]);
    ps.push_back(&bil_b_[j]);
    ps.push_back(&l1_w_[j]);
    ps.push_back(&l1_b_[j]);
    ps.push_back(&l2_w_[j]);
    ps.push_back(&l2_b_[j]);
    ps.push_back(&out_w_[j]);
    ps.push_back(&out_b_[j]);
  }
  return ps;
}

int DecoderP::logits(nn::Graph& g, const Encoder::Forward& fwd, int64_t batch, bool trainable) {
  const int64_t m = static_cast<int64_t>(bil_w_.size());
  auto enter = [&](nn::Param& p) { return trainable ? g.param(p) : g.frozen(p); };
  std::vector<int> per_domain(static_cast<size_t>(m));
  for (int64_t j = 0; j < m; ++j) {
    const std::vector<int64_t> idx = domain_rows(fwd, batch, m, j);
    const int xj = g.rows(fwd.x, idx);
    const int zj = g.rows(fwd.z, idx);
    const size_t sj = static_cast<size_t>(j);
    const int inter = g.bilinear(xj, zj, enter(bil_w_[sj]), enter(bil_b_[sj]));
    const int h1 = g.relu(g.add_bias(g.matmul(inter, enter(l1_w_[sj])), enter(l1_b_[sj])));
    const int h2 = g.relu(g.add_bias(g.matmul(h1, enter(l2_w_[sj])), enter(l2_b_[sj])));
    per_domain[sj] = g.add_bias(g.matmul(h2, enter(out_w_[sj])), enter(out_b_[sj]));
  }
  return g.concat_rows(per_domain);
}

}  // namespace carat
