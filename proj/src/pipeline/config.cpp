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
#include "carat/pipeline/config.hpp"

#include <fstream>
#include <set>

#include "carat/rng.hpp"
#include "carat/util.hpp"
#include "json.hpp"

namespace carat {
namespace {

using nlohmann::json;

void check_keys(const json& obj, const std::string& where, const std::set<std::string>& allowed) {
  require(obj.is_object(), "config: '" + where + "' must be an object");
  for (const auto& item : obj.items()) {
    require(allowed.count(item.key()) > 0, "config: unknown key '" + item.key() + "' in " + where);
  }
}

template <typename T>
T get_or(const json& obj, const std::string& key, T fallback) {
  if (!obj.contains(key)) return fallback;
  try {
    return obj.at(key).get<T>();
  } catch (const json::exception& e) {
    fail("config: bad value for '" + key + "': " + e.what());
  }
}

void parse_data(const json& j, DataConfig& data) {
  check_keys(j, "data",
             {"source", "csv_path", "domains", "test_fraction", "rule_corpus"});
  data.source = get_or<std::string>(j, "source", data.source);
  data.csv_path = get_or<std::string>(j, "csv_path", data.csv_path);
  data.domains = get_or<std::vector<std::string>>(j, "domains", data.domains);
  data.test_fraction = get_or<double>(j, "test_fraction", data.test_fraction);
  if (j.contains("rule_corpus")) {
    const json& rc = j.at("rule_corpus");
    check_keys(rc, "data.rule_corpus",
               {"m", "vocab_size", "clusters", "train_records", "test_records", "noise"});
    data.rule_corpus.m = get_or<int64_t>(rc, "m", data.rule_corpus.m);
    data.rule_corpus.vocab_size = get_or<int64_t>(rc, "vocab_size", data.rule_corpus.vocab_size);
    data.rule_corpus.clusters = get_or<int64_t>(rc, "clusters", data.rule_corpus.clusters);
    data.rule_corpus.train_records =
        get_or<int64_t>(rc, "train_records", data.rule_corpus.train_records);
    data.rule_corpus.test_records =
        get_or<int64_t>(rc, "test_records", data.rule_corpus.test_records);
    data.rule_corpus.noise = get_or<double>(rc, "noise", data.rule_corpus.noise);
  }
}

void parse_ad(const json& j, AdConfig& ad) {
  check_keys(j, "ad",
             {"embedding_dim", "negatives_per_positive", "epochs", "batch_size", "learning_rate",
              "variant"});
  ad.embedding_dim = get_or<int64_t>(j, "embedding_dim", ad.embedding_dim);
  ad.negatives_per_positive =
      get_or<int64_t>(j, "negatives_per_positive", ad.negatives_per_positive);
  ad.epochs = get_or<int64_t>(j, "epochs", ad.epochs);
  ad.batch_size = get_or<int64_t>(j, "batch_size", ad.batch_size);
  ad.learning_rate = get_or<double>(j, "learning_rate", ad.learning_rate);
  if (j.contains("variant")) ad.variant = ad_variant_from_string(j.at("variant").get<std::string>());
}

void parse_explainer(const json& j, ExplainerBundleConfig& ex) {
  check_keys(j, "explainer",
             {"embedding_dim", "num_layers", "num_heads", "mask_fraction", "perturb_fraction",
              "alpha", "epochs", "batch_size", "learning_rate", "head_epochs",
              "head_learning_rate"});
  ex.encoder.embedding_dim = get_or<int64_t>(j, "embedding_dim", ex.encoder.embedding_dim);
  ex.encoder.num_layers = get_or<int64_t>(j, "num_layers", ex.encoder.num_layers);
  ex.encoder.num_heads = get_or<int64_t>(j, "num_heads", ex.encoder.num_heads);
  ex.pretrain.mask_fraction = get_or<double>(j, "mask_fraction", ex.pretrain.mask_fraction);
  ex.pretrain.perturb_fraction =
      get_or<double>(j, "perturb_fraction", ex.pretrain.perturb_fraction);
  ex.pretrain.alpha = get_or<double>(j, "alpha", ex.pretrain.alpha);
  ex.pretrain.epochs = get_or<int64_t>(j, "epochs", ex.pretrain.epochs);
  ex.pretrain.batch_size = get_or<int64_t>(j, "batch_size", ex.pretrain.batch_size);
  ex.pretrain.learning_rate = get_or<double>(j, "learning_rate", ex.pretrain.learning_rate);
  ex.head = ex.pretrain;
  ex.head.epochs = get_or<int64_t>(j, "head_epochs", ex.pretrain.epochs);
  ex.head.learning_rate = get_or<double>(j, "head_learning_rate", ex.pretrain.learning_rate);
}

void parse_kge(const json& j, KgeConfig& kge) {
  check_keys(j, "kge",
             {"dim", "negatives_per_positive", "epochs", "batch_size", "learning_rate"});
  kge.dim = get_or<int64_t>(j, "dim", kge.dim);
  kge.negatives_per_positive =
      get_or<int64_t>(j, "negatives_per_positive", kge.negatives_per_positive);
  kge.epochs = get_or<int64_t>(j, "epochs", kge.epochs);
  kge.batch_size = get_or<int64_t>(j, "batch_size", kge.batch_size);
  kge.learning_rate = get_or<double>(j, "learning_rate", kge.learning_rate);
}

void parse_recourse(const json& j, RecourseConfig& rc) {
  check_keys(j, "recourse", {"K", "neighbor_k", "max_combinations", "likelihood_threshold"});
  rc.K = get_or<int64_t>(j, "K", rc.K);
  rc.neighbor_k = get_or<int64_t>(j, "neighbor_k", rc.neighbor_k);
  rc.max_combinations = get_or<int64_t>(j, "max_combinations", rc.max_combinations);
  rc.likelihood_threshold = get_or<double>(j, "likelihood_threshold", rc.likelihood_threshold);
}

void parse_baselines(const json& j, std::vector<BaselineConfig>& out) {
  require(j.is_array(), "config: 'baselines' must be an array");
  out.clear();
  for (const auto& item : j) {
    check_keys(item, "baselines[]", {"method", "m", "k"});
    BaselineConfig b;
    require(item.contains("method"), "config: baselines[] entries need a 'method'");
    b.method = baseline_method_from_string(item.at("method").get<std::string>());
    b.m = get_or<int64_t>(item, "m", b.m);
    b.k = get_or<int64_t>(item, "k", b.k);
    out.push_back(b);
  }
}

void parse_evaluation(const json& j, EvaluationConfig& ev) {
  check_keys(j, "evaluation", {"comparison_train", "comparison_test"});
  ev.comparison_train = get_or<int64_t>(j, "comparison_train", ev.comparison_train);
  ev.comparison_test = get_or<int64_t>(j, "comparison_test", ev.comparison_test);
}

json data_to_json(const DataConfig& d) {
  json j;
  j["source"] = d.source;
  if (d.source == "csv") {
    j["csv_path"] = d.csv_path;
    j["domains"] = d.domains;
    j["test_fraction"] = d.test_fraction;
  } else {
    j["rule_corpus"] = {{"m", d.rule_corpus.m},
                        {"vocab_size", d.rule_corpus.vocab_size},
                        {"clusters", d.rule_corpus.clusters},
                        {"train_records", d.rule_corpus.train_records},
                        {"test_records", d.rule_corpus.test_records},
                        {"noise", d.rule_corpus.noise}};
  }
  return j;
}

json to_json(const PipelineConfig& cfg) {
  json j;
  j["seed"] = cfg.seed;
  j["out_dir"] = cfg.out_dir;
  j["anomaly_fraction"] = cfg.anomaly_fraction;
  j["anomaly_count"] = cfg.anomaly_count;
  j["data"] = data_to_json(cfg.data);
  j["metapaths"] = cfg.metapaths;
  j["ad"] = {{"embedding_dim", cfg.ad.embedding_dim},
             {"negatives_per_positive", cfg.ad.negatives_per_positive},
             {"epochs", cfg.ad.epochs},
             {"batch_size", cfg.ad.batch_size},
             {"learning_rate", cfg.ad.learning_rate},
             {"variant", ad_variant_to_string(cfg.ad.variant)}};
  j["explainer"] = {{"embedding_dim", cfg.explainer.encoder.embedding_dim},
                    {"num_layers", cfg.explainer.encoder.num_layers},
                    {"num_heads", cfg.explainer.encoder.num_heads},
                    {"mask_fraction", cfg.explainer.pretrain.mask_fraction},
                    {"perturb_fraction", cfg.explainer.pretrain.perturb_fraction},
                    {"alpha", cfg.explainer.pretrain.alpha},
                    {"epochs", cfg.explainer.pretrain.epochs},
                    {"batch_size", cfg.explainer.pretrain.batch_size},
                    {"learning_rate", cfg.explainer.pretrain.learning_rate},
                    {"head_epochs", cfg.explainer.head.epochs},
                    {"head_learning_rate", cfg.explainer.head.learning_rate}};
  j["kge"] = {{"dim", cfg.kge.dim},
              {"negatives_per_positive", cfg.kge.negatives_per_positive},
              {"epochs", cfg.kge.epochs},
              {"batch_size", cfg.kge.batch_size},
              {"learning_rate", cfg.kge.learning_rate}};
  j["recourse"] = {{"K", cfg.recourse.K},
                   {"neighbor_k", cfg.recourse.neighbor_k},
                   {"max_combinations", cfg.recourse.max_combinations},
                   {"likelihood_threshold", cfg.recourse.likelihood_threshold}};
  j["baselines"] = json::array();
  for (const auto& b : cfg.baselines) {
    j["baselines"].push_back(
        {{"method", baseline_method_to_string(b.method)}, {"m", b.m}, {"k", b.k}});
  }
  j["evaluation"] = {{"comparison_train", cfg.evaluation.comparison_train},
                     {"comparison_test", cfg.evaluation.comparison_test}};
  return j;
}

}  // namespace

// Stage seeds never appear in config files; they all descend from the one
// global seed so a seed override re-keys every stage coherently.
void PipelineConfig::reseed(uint64_t new_seed) {
  seed = new_seed;
  data.rule_corpus.seed = Rng::derive(seed, "stage-corpus");
  ad.seed = Rng::derive(seed, "stage-ad");
  explainer.pretrain.seed = Rng::derive(seed, "stage-explainer-pretrain");
  explainer.head.seed = Rng::derive(seed, "stage-explainer-head");
  kge.seed = Rng::derive(seed, "stage-kge");
  recourse.seed = Rng::derive(seed, "stage-recourse");
  for (auto& b : baselines)
    b.seed = Rng::derive(seed, "stage-baseline-" + baseline_method_to_string(b.method));
}

void PipelineConfig::validate() const {
  require(!out_dir.empty(), "config: out_dir must not be empty");
  require(anomaly_fraction > 0.0 && anomaly_fraction <= 1.0,
          "config: anomaly_fraction outside (0, 1]");
  require(anomaly_count >= 1, "config: anomaly_count must be >= 1");
  require(data.source == "rule_corpus" || data.source == "csv",
          "config: data.source must be rule_corpus or csv");
  if (data.source == "csv") {
    require(!data.csv_path.empty(), "config: csv source needs data.csv_path");
    require(data.domains.size() >= 2, "config: csv source needs at least two declared domains");
    require(data.test_fraction > 0.0 && data.test_fraction < 1.0,
            "config: data.test_fraction outside (0, 1)");
  }
  for (const auto& mp : metapaths)
    require(mp.size() >= 2, "config: every metapath needs at least two domains");
  ad.validate();
  explainer.encoder.validate();
  explainer.pretrain.validate();
  explainer.head.validate();
  kge.validate();
  recourse.validate();
  for (const auto& b : baselines) b.validate();
  for (size_t i = 0; i < baselines.size(); ++i)
    for (size_t j = i + 1; j < baselines.size(); ++j)
      require(baselines[i].method != baselines[j].method,
              "config: baseline method '" + baseline_method_to_string(baselines[i].method) +
                  "' listed twice");
  require(evaluation.comparison_train >= 0 && evaluation.comparison_test >= 0,
          "config: comparison sample sizes must be >= 0");
  require(evaluation.comparison_train + evaluation.comparison_test >= 1,
          "config: the comparison sample must not be empty");
}

std::string PipelineConfig::canonical_json() const { return to_json(*this).dump(2) + "\n"; }

uint64_t PipelineConfig::digest() const {
  json j = to_json(*this);
  j.erase("out_dir");
  return fnv1a64(j.dump());
}

PipelineConfig pipeline_config_from_json(const std::string& json_text) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::exception& e) {
    fail(std::string("config: invalid JSON: ") + e.what());
  }
  check_keys(j, "config root",
             {"seed", "out_dir", "anomaly_fraction", "anomaly_count", "data", "metapaths", "ad",
              "explainer", "kge", "recourse", "baselines", "evaluation"});

  PipelineConfig cfg;
  cfg.seed = get_or<uint64_t>(j, "seed", cfg.seed);
  cfg.out_dir = get_or<std::string>(j, "out_dir", cfg.out_dir);
  cfg.anomaly_fraction = get_or<double>(j, "anomaly_fraction", cfg.anomaly_fraction);
  cfg.anomaly_count = get_or<int64_t>(j, "anomaly_count", cfg.anomaly_count);
  if (j.contains("data")) parse_data(j.at("data"), cfg.data);
  cfg.metapaths =
      get_or<std::vector<std::vector<std::string>>>(j, "metapaths", cfg.metapaths);
  if (j.contains("ad")) parse_ad(j.at("ad"), cfg.ad);
  if (j.contains("explainer")) parse_explainer(j.at("explainer"), cfg.explainer);
  if (j.contains("kge")) parse_kge(j.at("kge"), cfg.kge);
  if (j.contains("recourse")) parse_recourse(j.at("recourse"), cfg.recourse);
  if (j.contains("baselines")) parse_baselines(j.at("baselines"), cfg.baselines);
  if (j.contains("evaluation")) parse_evaluation(j.at("evaluation"), cfg.evaluation);

  cfg.reseed(cfg.seed);
  cfg.validate();
  return cfg;
}

PipelineConfig load_pipeline_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  require(in.good(), "config: cannot open " + path);
  std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return pipeline_config_from_json(text);
}

}  // namespace carat
