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
#include <cmath>
#include <cstdio>
#include <numeric>

#include "carat/explainer/explainer.hpp"
#include "carat/nn/adam.hpp"
#include "carat/nn/graph.hpp"
#include "carat/rng.hpp"

namespace carat {

void ExplainerTrainConfig::validate() const {
  require(mask_fraction >= 0.0 && mask_fraction <= 1.0, "explainer config: mask_fraction in [0,1]");
  require(perturb_fraction >= 0.0 && perturb_fraction <= 1.0,
          "explainer config: perturb_fraction in [0,1]");
  require(mask_fraction + perturb_fraction <= 1.0,
          "explainer config: mask_fraction + perturb_fraction must not exceed 1");
  require(alpha >= 0.0 && alpha <= 1.0, "explainer config: alpha in [0,1]");
  require(epochs >= 1 && batch_size >= 1, "explainer config: epochs and batch_size must be >= 1");
  require(learning_rate > 0.0, "explainer config: learning_rate must be positive");
}

namespace {

void init_encoder(Encoder& enc, Rng& rng) {
  for (nn::Param* p : enc.params()) {
    const std::string& n = p->name;
    if (n.find("gain") != std::string::npos)
      p->init_const(1.0);
    else if (n == "enc_pos" || n.find("embed") != std::string::npos)
      p->init_normal(rng, 0.1);
    else if (p->value.shape.size() >= 2)
      p->init_xavier(rng);
    else
      p->init_const(0.0);
  }
}

void init_dense_stack(std::vector<nn::Param*> params, Rng& rng) {
  for (nn::Param* p : params) {
    if (p->value.shape.size() >= 2)
      p->init_xavier(rng);
    else
      p->init_const(0.0);
  }
}

}  // namespace

int pretrain_loss_graph(nn::Graph& g, Encoder& encoder, DecoderR& decoder,
                        const std::vector<EncodedRecord>& corrupted,
                        const std::vector<EncodedRecord>& originals,
                        const std::vector<std::vector<int64_t>>& corrupted_positions,
                        bool corrupted_only) {
  require(corrupted.size() == originals.size(), "pretrain loss: batch size mismatch");
  const int64_t B = static_cast<int64_t>(corrupted.size());
  const int64_t m = encoder.m();
  const Encoder::Forward fwd = encoder.forward_train(g, corrupted);
  const std::vector<int> logits = decoder.logits(g, fwd, B, true);

  int total = -1;
  for (int64_t j = 0; j < m; ++j) {
    std::vector<int64_t> rows;
    std::vector<int64_t> targets;
    for (int64_t i = 0; i < B; ++i) {
      if (corrupted_only) {
        const auto& cp = corrupted_positions[static_cast<size_t>(i)];
        if (std::find(cp.begin(), cp.end(), j) == cp.end()) continue;
      }
      rows.push_back(i);
      targets.push_back(originals[static_cast<size_t>(i)].values[static_cast<size_t>(j)]);
    }
    if (rows.empty()) continue;
    int lg = logits[static_cast<size_t>(j)];
    if (static_cast<int64_t>(rows.size()) != B) lg = g.rows(lg, rows);
    const int xent = g.softmax_xent(lg, std::move(targets));
    total = total < 0 ? xent : g.add(total, xent);
  }
  require(total >= 0, "pretrain loss: batch contains no loss positions");
  return total;
}

int decoder_p_loss_graph(nn::Graph& g, const Encoder& encoder, DecoderP& decoder,
                         const std::vector<EncodedRecord>& batch,
                         const std::vector<double>& labels) {
  const int64_t B = static_cast<int64_t>(batch.size());
  const int64_t m = encoder.m();
  require(static_cast<int64_t>(labels.size()) == B * m, "decoder-p loss: label count != batch*m");
  const Encoder::Forward fwd = encoder.forward(g, batch);
  const int logits = decoder.logits(g, fwd, B, true);
  std::vector<double> domain_major(static_cast<size_t>(B * m));
  for (int64_t i = 0; i < B; ++i)
    for (int64_t j = 0; j < m; ++j)
      domain_major[static_cast<size_t>(j * B + i)] = labels[static_cast<size_t>(i * m + j)];
  return g.bce_logits(logits, std::move(domain_major));
}

PretrainResult pretrain_encoder(const Dataset& dataset, const EncoderConfig& enc_cfg,
                                const ExplainerTrainConfig& cfg) {
  dataset.validate();
  cfg.validate();
  const DomainSchema& schema = dataset.schema;
  const int64_t m = schema.m();
  const int64_t n = static_cast<int64_t>(dataset.train.size());

  PretrainResult result{Encoder(enc_cfg, schema), DecoderR(enc_cfg, schema)};
  Rng init_rng(Rng::derive(cfg.seed, "explainer-init"));
  init_encoder(result.encoder, init_rng);
  init_dense_stack(result.decoder_r.params(), init_rng);

  std::vector<nn::Param*> all_params = result.encoder.params();
  for (nn::Param* p : result.decoder_r.params()) all_params.push_back(p);
  nn::Adam opt(cfg.learning_rate);
  opt.attach(all_params);

  Rng order_rng(Rng::derive(cfg.seed, "explainer-order"));
  Rng corrupt_rng(Rng::derive(cfg.seed, "explainer-corrupt"));
  std::vector<int64_t> order(static_cast<size_t>(n));
  std::iota(order.begin(), order.end(), 0);

  for (int64_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    order_rng.shuffle(order);
    for (int64_t start = 0; start < n; start += cfg.batch_size) {
      const int64_t stop = std::min(n, start + cfg.batch_size);
      std::vector<EncodedRecord> corrupted, originals;
      std::vector<std::vector<int64_t>> positions;
      for (int64_t i = start; i < stop; ++i) {
        const EncodedRecord& orig =
            dataset.train[static_cast<size_t>(order[static_cast<size_t>(i)])];
        EncodedRecord rec = orig;
        std::vector<int64_t> pos;
        for (int64_t j = 0; j < m; ++j) {
          const double u = corrupt_rng.uniform();
          if (u < cfg.mask_fraction) {
            rec.values[static_cast<size_t>(j)] = schema.mask_index(j);
            pos.push_back(j);
          } else if (u < cfg.mask_fraction + cfg.perturb_fraction && schema.vocab_size(j) >= 2) {
            rec.values[static_cast<size_t>(j)] = corrupt_rng.uniform_int_excluding(
                schema.vocab_size(j), orig.values[static_cast<size_t>(j)]);
            pos.push_back(j);
          }
        }
        corrupted.push_back(std::move(rec));
        originals.push_back(orig);
        positions.push_back(std::move(pos));
      }
      if (cfg.loss_on_corrupted_only) {
        bool any = false;
        for (const auto& p : positions) any = any || !p.empty();
        if (!any) continue;
      }
      nn::Graph g;
      const int loss = pretrain_loss_graph(g, result.encoder, result.decoder_r, corrupted,
                                           originals, positions, cfg.loss_on_corrupted_only);
      require(std::isfinite(g.scalar(loss)), "explainer pretraining diverged: non-finite loss");
      g.backward(loss);
      opt.step();
    }
  }
  return result;
}

DecoderP train_decoder_p(const Encoder& encoder, const Dataset& dataset,
                         const ExplainerTrainConfig& cfg) {
  dataset.validate();
  cfg.validate();
  const DomainSchema& schema = dataset.schema;
  require(encoder.schema_hash() == schema.hash(), "train_decoder_p: encoder schema mismatch");
  if (cfg.alpha >= 1.0)
    std::fprintf(stderr,
                 "warning: alpha = 1 leaves every decoder-p training label positive; the "
                 "likelihood head cannot learn to flag perturbations\n");

  const int64_t m = schema.m();
  const int64_t n = static_cast<int64_t>(dataset.train.size());
  std::vector<int64_t> eligible;
  for (int64_t j = 0; j < m; ++j)
    if (schema.vocab_size(j) >= 2) eligible.push_back(j);
  require(!eligible.empty(), "train_decoder_p: no domain has a vocabulary of size >= 2");

  DecoderP decoder(encoder.config(), schema);
  Rng init_rng(Rng::derive(cfg.seed, "decoder-p-init"));
  init_dense_stack(decoder.params(), init_rng);

  nn::Adam opt(cfg.learning_rate);
  opt.attach(decoder.params());

  Rng order_rng(Rng::derive(cfg.seed, "decoder-p-order"));
  Rng perturb_rng(Rng::derive(cfg.seed, "decoder-p-perturb"));
  std::vector<int64_t> order(static_cast<size_t>(n));
  std::iota(order.begin(), order.end(), 0);

  for (int64_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    order_rng.shuffle(order);
    for (int64_t start = 0; start < n; start += cfg.batch_size) {
      const int64_t stop = std::min(n, start + cfg.batch_size);
      std::vector<EncodedRecord> batch;
      std::vector<double> labels;
      for (int64_t i = start; i < stop; ++i) {
        EncodedRecord rec = dataset.train[static_cast<size_t>(order[static_cast<size_t>(i)])];
        std::vector<double> lab(static_cast<size_t>(m), 1.0);
        if (perturb_rng.uniform() >= cfg.alpha) {
          int64_t count = 1 + perturb_rng.uniform_int(2);
          count = std::min(count, static_cast<int64_t>(eligible.size()));
          const std::vector<int64_t> picks =
              perturb_rng.sample_without_replacement(static_cast<int64_t>(eligible.size()), count);
          for (const int64_t p : picks) {
            const int64_t j = eligible[static_cast<size_t>(p)];
            rec.values[static_cast<size_t>(j)] = perturb_rng.uniform_int_excluding(
                schema.vocab_size(j), rec.values[static_cast<size_t>(j)]);
            lab[static_cast<size_t>(j)] = 0.0;
          }
        }
        batch.push_back(std::move(rec));
        labels.insert(labels.end(), lab.begin(), lab.end());
      }
      nn::Graph g;
      const int loss = decoder_p_loss_graph(g, encoder, decoder, batch, labels);
      require(std::isfinite(g.scalar(loss)), "decoder-p training diverged: non-finite loss");
      g.backward(loss);
      opt.step();
    }
  }
  return decoder;
}

std::vector<nn::Tensor> reconstruct(const Encoder& encoder, const DecoderR& decoder,
                                    const std::vector<EncodedRecord>& batch) {
  require(!batch.empty(), "reconstruct: empty batch");
  nn::Graph g;
  const Encoder::Forward fwd = encoder.forward(g, batch);
  const std::vector<int> logits = const_cast<DecoderR&>(decoder).logits(
      g, fwd, static_cast<int64_t>(batch.size()), false);
  std::vector<nn::Tensor> out;
  out.reserve(logits.size());
  for (const int lg : logits) out.push_back(g.val(g.softmax_rows(lg)));
  return out;
}

std::vector<LikelihoodVector> entity_likelihoods_batch(const Encoder& encoder,
                                                       const DecoderP& decoder,
                                                       const std::vector<EncodedRecord>& batch) {
  require(!batch.empty(), "entity_likelihoods: empty batch");
  const int64_t m = encoder.m();
  const int64_t B = static_cast<int64_t>(batch.size());
  for (const EncodedRecord& r : batch) {
    require(static_cast<int64_t>(r.values.size()) == m, "entity_likelihoods: record arity mismatch");
    for (int64_t j = 0; j < m; ++j)
      require(r.values[static_cast<size_t>(j)] >= 0 &&
                  r.values[static_cast<size_t>(j)] < encoder.vocab_sizes()[static_cast<size_t>(j)],
              "entity_likelihoods: entity index out of range (MASK not allowed)");
  }
  nn::Graph g;
  const Encoder::Forward fwd = encoder.forward(g, batch);
  const int logits = const_cast<DecoderP&>(decoder).logits(g, fwd, B, false);
  const nn::Tensor& sig = g.val(g.sigmoid(logits));
  std::vector<LikelihoodVector> out(static_cast<size_t>(B), LikelihoodVector(static_cast<size_t>(m)));
  for (int64_t j = 0; j < m; ++j)
    for (int64_t i = 0; i < B; ++i)
      out[static_cast<size_t>(i)][static_cast<size_t>(j)] = sig.v[static_cast<size_t>(j * B + i)];
  return out;
}

LikelihoodVector entity_likelihoods(const Encoder& encoder, const DecoderP& decoder,
                                    const EncodedRecord& record) {
  return entity_likelihoods_batch(encoder, decoder, {record})[0];
}

LikelihoodVector entity_likelihoods_ordered(const Encoder& encoder, const DecoderP& decoder,
                                            const EncodedRecord& record,
                                            const std::vector<int64_t>& order) {
  nn::Graph g;
  const Encoder::Forward fwd = encoder.forward(g, {record}, &order);
  const int logits = const_cast<DecoderP&>(decoder).logits(g, fwd, 1, false);
  const nn::Tensor& sig = g.val(g.sigmoid(logits));
  return LikelihoodVector(sig.v.begin(), sig.v.end());
}

std::vector<int64_t> select_domains(const LikelihoodVector& likelihoods, double threshold) {
  require(!likelihoods.empty(), "select_domains: empty likelihood vector");
  for (const double p : likelihoods)
    require(std::isfinite(p) && p >= 0.0 && p <= 1.0, "select_domains: likelihood out of [0,1]");
  std::vector<int64_t> out;
  for (size_t j = 0; j < likelihoods.size(); ++j)
    if (likelihoods[j] < threshold) out.push_back(static_cast<int64_t>(j));
  if (out.empty()) {
    const auto it = std::min_element(likelihoods.begin(), likelihoods.end());
    out.push_back(it - likelihoods.begin());
  }
  return out;
}

}  // namespace carat
