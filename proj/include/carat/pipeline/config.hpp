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
#include <string>
#include <vector>

#include "carat/anomaly_model/ad_scorer.hpp"
#include "carat/baselines/baselines.hpp"
#include "carat/data/synthetic.hpp"
#include "carat/explainer/explainer.hpp"
#include "carat/kge/distmult.hpp"
#include "carat/recourse/recourse.hpp"

namespace carat {

struct DataConfig {
  std::string source = "rule_corpus";  // rule_corpus | csv
  std::string csv_path;
  std::vector<std::string> domains;  // declared order for csv ingestion
  double test_fraction = 0.2;
  RuleCorpusSpec rule_corpus;
};

struct ExplainerBundleConfig {
  EncoderConfig encoder;
  ExplainerTrainConfig pretrain;
  ExplainerTrainConfig head;
};

// Comparison-sample composition for correctness ranking; the anomaly share
// comes from the top-level anomaly_fraction.
struct EvaluationConfig {
  int64_t comparison_train = 64;
  int64_t comparison_test = 64;
};

// One file drives every stage. The global seed is the only seed a config
// carries; stage seeds are derived from it by label, so runs are
// reproducible end to end from (config, seed) alone.
struct PipelineConfig {
  uint64_t seed = 1;
  std::string out_dir = "out";
  double anomaly_fraction = 0.01;
  int64_t anomaly_count = 200;
  DataConfig data;
  std::vector<std::vector<std::string>> metapaths;
  AdConfig ad;
  ExplainerBundleConfig explainer;
  KgeConfig kge;
  RecourseConfig recourse;
  std::vector<BaselineConfig> baselines;
  EvaluationConfig evaluation;

  void validate() const;

  // Replaces the global seed and re-derives every stage seed from it.
  void reseed(uint64_t new_seed);

  // Canonical serialization (sorted keys, derived seeds excluded); two
  // configs differing only in formatting serialize identically.
  std::string canonical_json() const;

  // Artifact identity: digest over the canonical form minus out_dir, so
  // relocating outputs never invalidates trained models.
  uint64_t digest() const;
};

PipelineConfig pipeline_config_from_json(const std::string& json_text);
PipelineConfig load_pipeline_config(const std::string& path);

}  // namespace carat
