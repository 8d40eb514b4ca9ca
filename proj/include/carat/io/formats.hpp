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
#include <utility>
#include <vector>

#include "carat/data/schema.hpp"
#include "carat/metrics/metrics.hpp"
#include "carat/recourse/recourse.hpp"

namespace carat {

// Structured text artifacts: LF lines, TAB-separated decoded labels, one
// version header per format. Doubles render in shortest round-trip form so
// rereads are bit-exact; a non-finite score renders as "?" (the convention
// for externally produced counterfactuals with no scorer).
//
// Every artifact opens with an identity block (schema hash, config digest,
// seed) right after the version line. Writers refuse an identity whose
// schema hash disagrees with the schema being written; readers refuse a
// file whose recorded schema hash disagrees with the schema in hand.

struct ArtifactIdentity {
  uint64_t schema_hash = 0;
  uint64_t config_digest = 0;
  uint64_t seed = 0;

  bool operator==(const ArtifactIdentity&) const = default;
};

// CARAT-DATASET: schema (domain names and vocabularies) plus both splits.
void write_dataset(const std::string& path, const Dataset& dataset,
                   const ArtifactIdentity& identity);
Dataset read_dataset(const std::string& path, ArtifactIdentity* identity = nullptr);

// CARAT-ANOMALIES: planted ground truth, each anomaly as original record,
// perturbed record, and the corrupted domain names.
void write_anomalies(const std::string& path, const DomainSchema& schema,
                     const GroundTruthLabels& labels, const ArtifactIdentity& identity);
GroundTruthLabels read_anomalies(const std::string& path, const DomainSchema& schema,
                                 ArtifactIdentity* identity = nullptr);

// CARAT-CF: per anomaly, the modified domains, the per-domain likelihoods
// when present, and the counterfactual records with scores. Changed-domain
// sets are recomputed on read, so external files only need records.
void write_counterfactuals(const std::string& path, const DomainSchema& schema,
                           const std::vector<CounterfactualSet>& sets,
                           const ArtifactIdentity& identity);
std::vector<CounterfactualSet> read_counterfactuals(const std::string& path,
                                                    const DomainSchema& schema,
                                                    ArtifactIdentity* identity = nullptr);

// One method's per-anomaly metric series, keyed by metric name.
struct MethodEvaluation {
  std::string method;
  int64_t anomalies = 0;
  std::vector<std::pair<std::string, MetricSeries>> metrics;
};

// CARAT-EVAL: machine-readable per-anomaly metric values for every
// evaluated method; an undefined value renders as "?".
struct EvaluationArtifact {
  ArtifactIdentity identity;
  std::vector<MethodEvaluation> methods;
};

void write_evaluation(const std::string& path, const EvaluationArtifact& evaluation);
EvaluationArtifact read_evaluation(const std::string& path);

// One anomaly's recourse execution measurements. Wall-clock seconds are a
// measurement, not a deterministic artifact value.
struct TimingEntry {
  int64_t modified_domains = 0;
  int64_t neighbor_queries = 0;
  int64_t enumerated = 0;
  int64_t scored = 0;
  double seconds = 0.0;
};

// CARAT-TIMING: per-anomaly recourse wall-clock, training excluded (models
// load from archives). Excluded from byte-identity comparisons.
struct TimingArtifact {
  ArtifactIdentity identity;
  std::vector<TimingEntry> entries;
  double total_seconds = 0.0;
};

void write_timing(const std::string& path, const TimingArtifact& timing);
TimingArtifact read_timing(const std::string& path);

// Shortest round-trip rendering shared by every text artifact.
std::string format_double(double v);
double parse_double(const std::string& s);

// Whole-file text write, binary mode, used for every text artifact.
void write_text_file(const std::string& path, const std::string& body);

}  // namespace carat
