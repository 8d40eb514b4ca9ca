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
#include "carat/pipeline/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "carat/baselines/baselines.hpp"
#include "carat/data/csv.hpp"
#include "carat/data/synthetic.hpp"
#include "carat/io/archive.hpp"
#include "carat/io/formats.hpp"
#include "carat/kge/hin.hpp"
#include "carat/metrics/metrics.hpp"
#include "carat/rng.hpp"
#include "carat/util.hpp"
#include "json.hpp"

namespace carat {
namespace {

namespace fs = std::filesystem;

std::string apath(const PipelineConfig& cfg, const std::string& name) {
  return (fs::path(cfg.out_dir) / name).string();
}

void ensure_out_dir(const PipelineConfig& cfg) {
  std::error_code ec;
  fs::create_directories(cfg.out_dir, ec);
  require(!ec, "cannot create output directory " + cfg.out_dir + ": " + ec.message());
}

ArtifactIdentity run_identity(const PipelineConfig& cfg, const DomainSchema& schema) {
  return ArtifactIdentity{schema.hash(), cfg.digest(), cfg.seed};
}

void check_identity(const ArtifactIdentity& id, const PipelineConfig& cfg, uint64_t schema_hash,
                    const std::string& path) {
  require(id.schema_hash == schema_hash,
          path + ": schema-hash mismatch: artifact records " + to_hex(id.schema_hash) +
              ", dataset in hand is " + to_hex(schema_hash));
  require(id.config_digest == cfg.digest(),
          path + ": produced under config digest " + to_hex(id.config_digest) +
              ", current config is " + to_hex(cfg.digest()) + "; regenerate the artifact");
  require(id.seed == cfg.seed, path + ": produced under seed " + std::to_string(id.seed) +
                                   ", current seed is " + std::to_string(cfg.seed) +
                                   "; regenerate the artifact");
}

void require_exists(const std::string& path, const std::string& producer) {
  require(fs::exists(path), "missing artifact " + path + "; run " + producer + " first");
}

Dataset load_dataset(const PipelineConfig& cfg) {
  const std::string path = apath(cfg, artifact::kDataset);
  require_exists(path, "gen-corpus or ingest");
  ArtifactIdentity id;
  Dataset ds = read_dataset(path, &id);
  check_identity(id, cfg, ds.schema.hash(), path);
  return ds;
}

GroundTruthLabels load_labels(const PipelineConfig& cfg, const DomainSchema& schema) {
  const std::string path = apath(cfg, artifact::kAnomalies);
  require_exists(path, "gen-anomalies");
  ArtifactIdentity id;
  GroundTruthLabels labels = read_anomalies(path, schema, &id);
  check_identity(id, cfg, schema.hash(), path);
  return labels;
}

Archive load_model_archive(const PipelineConfig& cfg, const char* name, const std::string& kind,
                           uint64_t schema_hash, const std::string& producer) {
  const std::string path = apath(cfg, name);
  require_exists(path, producer);
  Archive archive = read_archive(path);
  require(archive.kind == kind,
          path + ": expected archive kind '" + kind + "', found '" + archive.kind + "'");
  check_identity(ArtifactIdentity{archive.schema_hash, archive.config_digest, archive.seed}, cfg,
                 schema_hash, path);
  return archive;
}

std::string ad_config_json(const AdConfig& c) {
  nlohmann::json j{{"embedding_dim", c.embedding_dim},
                   {"negatives_per_positive", c.negatives_per_positive},
                   {"epochs", c.epochs},
                   {"batch_size", c.batch_size},
                   {"learning_rate", c.learning_rate},
                   {"variant", ad_variant_to_string(c.variant)}};
  return j.dump();
}

std::string encoder_config_json(const EncoderConfig& c) {
  nlohmann::json j{{"embedding_dim", c.embedding_dim},
                   {"num_layers", c.num_layers},
                   {"num_heads", c.num_heads}};
  return j.dump();
}

// The relations array is load-bearing: it restores the relation row order
// of the embedding table without rebuilding the graph.
std::string kge_config_json(const KgeConfig& c, const std::vector<Relation>& relations) {
  nlohmann::json rel = nlohmann::json::array();
  for (const auto& r : relations) rel.push_back({r.dom_a, r.dom_b});
  nlohmann::json j{{"dim", c.dim},
                   {"negatives_per_positive", c.negatives_per_positive},
                   {"epochs", c.epochs},
                   {"batch_size", c.batch_size},
                   {"learning_rate", c.learning_rate},
                   {"relations", rel}};
  return j.dump();
}

AdScorer load_ad(const PipelineConfig& cfg, const DomainSchema& schema) {
  const Archive archive =
      load_model_archive(cfg, artifact::kAdModel, "ad-scorer", schema.hash(), "train-ad");
  AdScorer scorer(cfg.ad, schema);
  unpack_params(archive, scorer.params());
  return scorer;
}

Encoder load_encoder(const PipelineConfig& cfg, const DomainSchema& schema) {
  const Archive archive = load_model_archive(cfg, artifact::kEncoderModel, "explainer-encoder",
                                             schema.hash(), "pretrain-explainer");
  Encoder encoder(cfg.explainer.encoder, schema);
  unpack_params(archive, encoder.params());
  return encoder;
}

DecoderP load_decoder_p(const PipelineConfig& cfg, const DomainSchema& schema) {
  const Archive archive = load_model_archive(cfg, artifact::kDecoderPModel,
                                             "explainer-likelihood", schema.hash(),
                                             "train-explainer");
  DecoderP decoder(cfg.explainer.encoder, schema);
  unpack_params(archive, decoder.params());
  return decoder;
}

DistMultModel load_kge(const PipelineConfig& cfg, const DomainSchema& schema) {
  const std::string path = apath(cfg, artifact::kKgeModel);
  const Archive archive =
      load_model_archive(cfg, artifact::kKgeModel, "kge-distmult", schema.hash(), "train-kge");
  std::vector<Relation> relations;
  try {
    const nlohmann::json j = nlohmann::json::parse(archive.config_json);
    for (const auto& r : j.at("relations"))
      relations.push_back(Relation{r.at(0).get<int64_t>(), r.at(1).get<int64_t>()});
  } catch (const nlohmann::json::exception& e) {
    fail(path + ": bad archive metadata: " + e.what());
  }
  std::vector<int64_t> vocab_sizes;
  for (int64_t j = 0; j < schema.m(); ++j) vocab_sizes.push_back(schema.vocab_size(j));
  DistMultModel model(cfg.kge, std::move(vocab_sizes), std::move(relations), schema.hash());
  unpack_params(archive, model.params());
  return model;
}

std::vector<MetapathSchema> metapath_schemas(const PipelineConfig& cfg,
                                             const DomainSchema& schema) {
  require(!cfg.metapaths.empty(), "config: no metapaths declared");
  std::vector<MetapathSchema> out;
  for (const auto& names : cfg.metapaths) {
    MetapathSchema mp{names};
    mp.validate(schema);
    out.push_back(std::move(mp));
  }
  return out;
}

struct RecourseModels {
  Dataset dataset;
  GroundTruthLabels labels;
  AdScorer scorer;
  DistMultModel kge;
  Encoder encoder;
  DecoderP decoder_p;
  CooccurrenceModel cooccurrence;
  std::vector<MetapathSchema> metapaths;
};

RecourseModels load_recourse_models(const PipelineConfig& cfg) {
  Dataset ds = load_dataset(cfg);
  GroundTruthLabels labels = load_labels(cfg, ds.schema);
  AdScorer scorer = load_ad(cfg, ds.schema);
  DistMultModel kge = load_kge(cfg, ds.schema);
  Encoder encoder = load_encoder(cfg, ds.schema);
  DecoderP decoder_p = load_decoder_p(cfg, ds.schema);
  CooccurrenceModel cooccurrence = CooccurrenceModel::build(ds.schema, ds.train);
  std::vector<MetapathSchema> metapaths = metapath_schemas(cfg, ds.schema);
  return RecourseModels{std::move(ds),        std::move(labels),  std::move(scorer),
                        std::move(kge),       std::move(encoder), std::move(decoder_p),
                        std::move(cooccurrence), std::move(metapaths)};
}

RecourseConfig per_anomaly_config(const RecourseConfig& base, size_t index) {
  RecourseConfig rc = base;
  rc.seed = Rng::derive(base.seed, "anomaly-" + std::to_string(index));
  return rc;
}

void cmd_gen_corpus(const PipelineConfig& cfg) {
  require(cfg.data.source == "rule_corpus",
          "gen-corpus: config data.source is '" + cfg.data.source + "', expected rule_corpus");
  const Dataset ds = generate_rule_corpus(cfg.data.rule_corpus);
  ensure_out_dir(cfg);
  write_dataset(apath(cfg, artifact::kDataset), ds, run_identity(cfg, ds.schema));
}

void cmd_ingest(const PipelineConfig& cfg) {
  require(cfg.data.source == "csv",
          "ingest: config data.source is '" + cfg.data.source + "', expected csv");
  const RawRows raw = load_csv(cfg.data.csv_path, cfg.data.domains);
  if (raw.dropped > 0)
    std::fprintf(stderr, "ingest: dropped %lld incomplete rows\n",
                 static_cast<long long>(raw.dropped));
  require(!raw.rows.empty(), "ingest: no complete rows in " + cfg.data.csv_path);

  Dataset ds;
  ds.schema = build_schema(raw);
  std::vector<EncodedRecord> all;
  all.reserve(raw.rows.size());
  for (const auto& row : raw.rows) all.push_back(encode_record(ds.schema, row));

  const int64_t n = static_cast<int64_t>(all.size());
  const int64_t n_test = std::max<int64_t>(
      1, static_cast<int64_t>(std::floor(static_cast<double>(n) * cfg.data.test_fraction)));
  require(n_test < n, "ingest: test fraction leaves no training rows");
  Rng rng(Rng::derive(cfg.seed, "stage-split"));
  const std::vector<int64_t> perm = rng.permutation(n);
  for (int64_t i = 0; i < n; ++i) {
    auto& split = i < n - n_test ? ds.train : ds.test;
    split.push_back(all[static_cast<size_t>(perm[static_cast<size_t>(i)])]);
  }
  ds.validate();
  ensure_out_dir(cfg);
  write_dataset(apath(cfg, artifact::kDataset), ds, run_identity(cfg, ds.schema));
}

void cmd_train_ad(const PipelineConfig& cfg) {
  const Dataset ds = load_dataset(cfg);
  AdScorer scorer = train_ad(ds, cfg.ad);
  write_archive(apath(cfg, artifact::kAdModel),
                pack_params("ad-scorer", ds.schema.hash(), cfg.digest(), cfg.seed,
                            ad_config_json(cfg.ad), scorer.params()));
}

void cmd_train_kge(const PipelineConfig& cfg) {
  const Dataset ds = load_dataset(cfg);
  const auto metapaths = metapath_schemas(cfg, ds.schema);
  const HINGraph hin = HINGraph::build(ds.schema, ds.train, metapaths);
  DistMultModel model = train_distmult(hin, cfg.kge);
  write_archive(apath(cfg, artifact::kKgeModel),
                pack_params("kge-distmult", ds.schema.hash(), cfg.digest(), cfg.seed,
                            kge_config_json(cfg.kge, model.relations()), model.params()));
}

void cmd_pretrain_explainer(const PipelineConfig& cfg) {
  const Dataset ds = load_dataset(cfg);
  PretrainResult pre = pretrain_encoder(ds, cfg.explainer.encoder, cfg.explainer.pretrain);
  const std::string enc_json = encoder_config_json(cfg.explainer.encoder);
  write_archive(apath(cfg, artifact::kEncoderModel),
                pack_params("explainer-encoder", ds.schema.hash(), cfg.digest(), cfg.seed,
                            enc_json, pre.encoder.params()));
  write_archive(apath(cfg, artifact::kDecoderRModel),
                pack_params("explainer-reconstruction", ds.schema.hash(), cfg.digest(), cfg.seed,
                            enc_json, pre.decoder_r.params()));
}

void cmd_train_explainer(const PipelineConfig& cfg) {
  const Dataset ds = load_dataset(cfg);
  Encoder encoder = load_encoder(cfg, ds.schema);
  DecoderP decoder = train_decoder_p(encoder, ds, cfg.explainer.head);
  write_archive(apath(cfg, artifact::kDecoderPModel),
                pack_params("explainer-likelihood", ds.schema.hash(), cfg.digest(), cfg.seed,
                            encoder_config_json(cfg.explainer.encoder), decoder.params()));
}

void cmd_gen_anomalies(const PipelineConfig& cfg) {
  const Dataset ds = load_dataset(cfg);
  const GroundTruthLabels labels =
      generate_synthetic_anomalies(ds, cfg.anomaly_count, Rng::derive(cfg.seed, "stage-anomalies"));
  write_anomalies(apath(cfg, artifact::kAnomalies), ds.schema, labels,
                  run_identity(cfg, ds.schema));
}

void cmd_recourse(const PipelineConfig& cfg) {
  const RecourseModels m = load_recourse_models(cfg);
  std::vector<CounterfactualSet> sets;
  sets.reserve(m.labels.size());
  for (size_t i = 0; i < m.labels.size(); ++i)
    sets.push_back(carat_recourse(m.labels[i].perturbed, m.dataset.schema, m.encoder,
                                  m.decoder_p, m.kge, m.scorer, m.cooccurrence, m.metapaths,
                                  per_anomaly_config(cfg.recourse, i)));
  write_counterfactuals(apath(cfg, artifact::kRecourse), m.dataset.schema, sets,
                        run_identity(cfg, m.dataset.schema));
}

void cmd_baseline(const PipelineConfig& cfg) {
  require(!cfg.baselines.empty(), "baseline: config lists no baselines");
  const Dataset ds = load_dataset(cfg);
  const GroundTruthLabels labels = load_labels(cfg, ds.schema);
  const AdScorer scorer = load_ad(cfg, ds.schema);

  const bool needs_explainer =
      std::any_of(cfg.baselines.begin(), cfg.baselines.end(),
                  [](const BaselineConfig& b) { return b.method == BaselineMethod::xformer_r; });
  std::optional<Encoder> encoder;
  std::optional<DecoderP> decoder;
  if (needs_explainer) {
    encoder.emplace(load_encoder(cfg, ds.schema));
    decoder.emplace(load_decoder_p(cfg, ds.schema));
  }

  for (const BaselineConfig& b : cfg.baselines) {
    std::vector<CounterfactualSet> sets;
    sets.reserve(labels.size());
    for (size_t i = 0; i < labels.size(); ++i) {
      if (b.method == BaselineMethod::replace_m) {
        sets.push_back(replace_m(labels[i].perturbed, scorer, ds.schema, b.k, b.m));
      } else {
        sets.push_back(xformer_r(labels[i].perturbed, ds.schema, *encoder, *decoder, b.k,
                                 Rng::derive(b.seed, "anomaly-" + std::to_string(i)), &scorer,
                                 cfg.recourse.likelihood_threshold));
      }
    }
    write_counterfactuals(apath(cfg, baseline_artifact_name(b.method)), ds.schema, sets,
                          run_identity(cfg, ds.schema));
  }
}

std::vector<std::pair<std::string, MetricSeries>> named_series(const MetricReport& r) {
  return {{"sparsity_index", r.sparsity},
          {"sparsity_index_normalized", r.sparsity_normalized},
          {"coherence", r.coherence},
          {"coherence_raw", r.coherence_raw},
          {"conditional_correctness", r.correctness},
          {"feature_accuracy", r.feature_accuracy},
          {"heterogeneity", r.heterogeneity}};
}

void cmd_evaluate(const PipelineConfig& cfg) {
  const Dataset ds = load_dataset(cfg);
  const GroundTruthLabels labels = load_labels(cfg, ds.schema);
  const AdScorer scorer = load_ad(cfg, ds.schema);
  const CooccurrenceModel cooccurrence = CooccurrenceModel::build(ds.schema, ds.train);

  std::vector<EncodedRecord> anomaly_pool;
  anomaly_pool.reserve(labels.size());
  for (const auto& label : labels) anomaly_pool.push_back(label.perturbed);

  EvaluationContext ctx;
  ctx.cooccurrence = &cooccurrence;
  ctx.scorer = &scorer;
  ctx.comparison = build_comparison_sample(ds, anomaly_pool, cfg.evaluation.comparison_train,
                                           cfg.evaluation.comparison_test, cfg.anomaly_fraction,
                                           Rng::derive(cfg.seed, "stage-comparison"));

  std::vector<std::pair<std::string, std::string>> candidates = {
      {"carat", apath(cfg, artifact::kRecourse)}};
  for (const BaselineConfig& b : cfg.baselines)
    candidates.emplace_back(baseline_method_to_string(b.method),
                            apath(cfg, baseline_artifact_name(b.method)));

  EvaluationArtifact evaluation;
  evaluation.identity = run_identity(cfg, ds.schema);
  for (const auto& [method, path] : candidates) {
    if (!fs::exists(path)) continue;
    ArtifactIdentity id;
    const auto sets = read_counterfactuals(path, ds.schema, &id);
    check_identity(id, cfg, ds.schema.hash(), path);
    const MetricReport report = evaluate_corpus(sets, &labels, ctx);
    MethodEvaluation method_eval;
    method_eval.method = method;
    method_eval.anomalies = static_cast<int64_t>(sets.size());
    method_eval.metrics = named_series(report);
    evaluation.methods.push_back(std::move(method_eval));
  }
  require(!evaluation.methods.empty(),
          "evaluate: no counterfactual artifacts found; run recourse or baseline first");
  write_evaluation(apath(cfg, artifact::kEvaluation), evaluation);
}

std::string render_report(const EvaluationArtifact& evaluation) {
  std::string out = "counterfactual evaluation report\n";
  out += "================================\n\n";
  out += "schema  " + to_hex(evaluation.identity.schema_hash) + "\n";
  out += "digest  " + to_hex(evaluation.identity.config_digest) + "\n";
  out += "seed    " + std::to_string(evaluation.identity.seed) + "\n";
  char line[160];
  for (const auto& method : evaluation.methods) {
    out += "\nmethod " + method.method + " (" + std::to_string(method.anomalies) +
           " anomalies)\n";
    std::snprintf(line, sizeof line, "  %-26s %10s %10s %9s %11s\n", "metric", "mean", "stddev",
                  "defined", "undefined");
    out += line;
    for (const auto& [name, series] : method.metrics) {
      const MetricStat s = series.stat();
      if (s.defined > 0) {
        std::snprintf(line, sizeof line, "  %-26s %10.4f %10.4f %9lld %11lld\n", name.c_str(),
                      s.mean, s.stddev, static_cast<long long>(s.defined),
                      static_cast<long long>(s.undefined));
      } else {
        std::snprintf(line, sizeof line, "  %-26s %10s %10s %9lld %11lld\n", name.c_str(), "-",
                      "-", static_cast<long long>(s.defined),
                      static_cast<long long>(s.undefined));
      }
      out += line;
    }
  }
  return out;
}

std::string render_timing_report(const TimingArtifact& timing) {
  std::string out = "recourse timing report\n";
  out += "======================\n\n";
  out += "schema  " + to_hex(timing.identity.schema_hash) + "\n";
  out += "digest  " + to_hex(timing.identity.config_digest) + "\n";
  out += "seed    " + std::to_string(timing.identity.seed) + "\n\n";

  const size_t n = timing.entries.size();
  char line[160];
  std::snprintf(line, sizeof line, "anomalies      %zu\n", n);
  out += line;
  std::snprintf(line, sizeof line, "total seconds  %.6f\n", timing.total_seconds);
  out += line;
  if (n == 0) return out;

  double min_s = timing.entries[0].seconds;
  double max_s = timing.entries[0].seconds;
  double sum_s = 0.0;
  for (const auto& e : timing.entries) {
    min_s = std::min(min_s, e.seconds);
    max_s = std::max(max_s, e.seconds);
    sum_s += e.seconds;
  }
  std::snprintf(line, sizeof line, "mean seconds   %.6f\n", sum_s / static_cast<double>(n));
  out += line;
  std::snprintf(line, sizeof line, "min seconds    %.6f\n", min_s);
  out += line;
  std::snprintf(line, sizeof line, "max seconds    %.6f\n", max_s);
  out += line;

  out += "\nwork = modified_domains * neighbor_queries\n";
  double mean_x = 0.0;
  double mean_y = 0.0;
  for (const auto& e : timing.entries) {
    mean_x += static_cast<double>(e.modified_domains * e.neighbor_queries);
    mean_y += e.seconds;
  }
  mean_x /= static_cast<double>(n);
  mean_y /= static_cast<double>(n);
  double cov = 0.0;
  double var_x = 0.0;
  double var_y = 0.0;
  for (const auto& e : timing.entries) {
    const double dx = static_cast<double>(e.modified_domains * e.neighbor_queries) - mean_x;
    const double dy = e.seconds - mean_y;
    cov += dx * dy;
    var_x += dx * dx;
    var_y += dy * dy;
  }
  if (var_x > 0.0 && var_y > 0.0) {
    std::snprintf(line, sizeof line, "work-time correlation  %.4f\n",
                  cov / std::sqrt(var_x * var_y));
    out += line;
    std::snprintf(line, sizeof line, "seconds per work unit  %.9f (intercept %.6f)\n",
                  cov / var_x, mean_y - (cov / var_x) * mean_x);
    out += line;
  } else {
    out += "work-time correlation  n/a (no variation)\n";
  }
  return out;
}

void cmd_report(const PipelineConfig& cfg) {
  const Dataset ds = load_dataset(cfg);
  const std::string eval_path = apath(cfg, artifact::kEvaluation);
  require_exists(eval_path, "evaluate");
  const EvaluationArtifact evaluation = read_evaluation(eval_path);
  check_identity(evaluation.identity, cfg, ds.schema.hash(), eval_path);
  write_text_file(apath(cfg, artifact::kReport), render_report(evaluation));

  const std::string timing_path = apath(cfg, artifact::kTiming);
  if (fs::exists(timing_path)) {
    const TimingArtifact timing = read_timing(timing_path);
    check_identity(timing.identity, cfg, ds.schema.hash(), timing_path);
    write_text_file(apath(cfg, artifact::kTimingReport), render_timing_report(timing));
  }
}

void cmd_timing(const PipelineConfig& cfg) {
  const RecourseModels m = load_recourse_models(cfg);
  TimingArtifact timing;
  timing.identity = run_identity(cfg, m.dataset.schema);
  for (size_t i = 0; i < m.labels.size(); ++i) {
    RecourseStats stats;
    const CounterfactualSet set = carat_recourse(
        m.labels[i].perturbed, m.dataset.schema, m.encoder, m.decoder_p, m.kge, m.scorer,
        m.cooccurrence, m.metapaths, per_anomaly_config(cfg.recourse, i), &stats);
    TimingEntry entry;
    entry.modified_domains = static_cast<int64_t>(set.modified_domains.size());
    entry.neighbor_queries = stats.knn_queries;
    entry.enumerated = stats.enumerated;
    entry.scored = stats.scored;
    entry.seconds = stats.seconds;
    timing.total_seconds += stats.seconds;
    timing.entries.push_back(entry);
  }
  write_timing(apath(cfg, artifact::kTiming), timing);
}

}  // namespace

std::string baseline_artifact_name(BaselineMethod method) {
  return "cf_" + baseline_method_to_string(method) + ".txt";
}

const std::vector<std::string>& pipeline_commands() {
  static const std::vector<std::string> kCommands = {
      "ingest",        "gen-corpus",    "train-ad", "train-kge", "pretrain-explainer",
      "train-explainer", "gen-anomalies", "recourse", "baseline",  "evaluate",
      "report",        "timing"};
  return kCommands;
}

void run_command(const std::string& command, const PipelineConfig& cfg) {
  cfg.validate();
  if (command == "ingest") return cmd_ingest(cfg);
  if (command == "gen-corpus") return cmd_gen_corpus(cfg);
  if (command == "train-ad") return cmd_train_ad(cfg);
  if (command == "train-kge") return cmd_train_kge(cfg);
  if (command == "pretrain-explainer") return cmd_pretrain_explainer(cfg);
  if (command == "train-explainer") return cmd_train_explainer(cfg);
  if (command == "gen-anomalies") return cmd_gen_anomalies(cfg);
  if (command == "recourse") return cmd_recourse(cfg);
  if (command == "baseline") return cmd_baseline(cfg);
  if (command == "evaluate") return cmd_evaluate(cfg);
  if (command == "report") return cmd_report(cfg);
  if (command == "timing") return cmd_timing(cfg);
  std::string known;
  for (const auto& c : pipeline_commands()) known += (known.empty() ? "" : ", ") + c;
  fail("unknown command '" + command + "'; expected one of: " + known);
}

}  // namespace carat
