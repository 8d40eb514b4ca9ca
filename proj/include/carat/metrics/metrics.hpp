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
#include <optional>
#include <vector>

#include "carat/anomaly_model/ad_scorer.hpp"
#include "carat/data/cooccurrence.hpp"
#include "carat/data/schema.hpp"
#include "carat/data/synthetic.hpp"
#include "carat/recourse/recourse.hpp"

namespace carat {

// Aggregate over the defined per-anomaly values: mean, sample standard
// deviation (n-1; zero when fewer than two values), and how many anomalies
// had the metric defined vs undefined.
struct MetricStat {
  double mean = 0.0;
  double stddev = 0.0;
  int64_t defined = 0;
  int64_t undefined = 0;
};

// Per-anomaly metric values; an empty optional marks the metric undefined
// for that anomaly (excluded from the aggregate, counted).
struct MetricSeries {
  std::vector<std::optional<double>> values;

  MetricStat stat() const;
};

struct MetricReport {
  MetricSeries sparsity;             // mean over Y of 1/(1 + changes)
  MetricSeries sparsity_normalized;  // mean over Y of 1/(1 + changes/m)
  MetricSeries coherence;            // per replaced entity (raw / |D_p|)
  MetricSeries coherence_raw;        // summed over replaced entities
  MetricSeries correctness;
  MetricSeries feature_accuracy;
  MetricSeries heterogeneity;
};

// Mean over the counterfactuals of 1/(1 + number of changed domains).
double sparsity_index(const EncodedRecord& anomaly, const std::vector<EncodedRecord>& cfs);

// Hamming-normalized variant, 1/(1 + changes/m); comparable across arities
// and the scale on which near-identical methods land in (0.5, 1].
double sparsity_index_normalized(const EncodedRecord& anomaly,
                                 const std::vector<EncodedRecord>& cfs);

// Mean training co-occurrence probability of each replaced entity against
// the retained context entities, summed over replaced entities (raw) or
// additionally divided by their number (per-entity). Undefined when the
// counterfactual changes nothing or changes every domain.
std::optional<double> coherence_raw(const EncodedRecord& anomaly, const EncodedRecord& cf,
                                    const CooccurrenceModel& cooccurrence);
std::optional<double> coherence(const EncodedRecord& anomaly, const EncodedRecord& cf,
                                const CooccurrenceModel& cooccurrence);

// Mean of the defined per-counterfactual values; undefined when no
// counterfactual has a defined value.
std::optional<double> coherence_mean(const EncodedRecord& anomaly,
                                     const std::vector<EncodedRecord>& cfs,
                                     const CooccurrenceModel& cooccurrence);
std::optional<double> coherence_mean_raw(const EncodedRecord& anomaly,
                                         const std::vector<EncodedRecord>& cfs,
                                         const CooccurrenceModel& cooccurrence);

// Fraction of counterfactuals ranked strictly less anomalous than the
// anomaly within the same comparison sample.
double conditional_correctness(const EncodedRecord& anomaly,
                               const std::vector<EncodedRecord>& cfs,
                               const std::vector<EncodedRecord>& comparison,
                               const AdScorer& scorer);

// Per counterfactual and domain, scores 1 when the domain's treatment
// matches the ground truth (changed iff corrupted); mean over domains and
// counterfactuals. `corrupted` is the sorted ground-truth domain set.
double feature_accuracy(const EncodedRecord& anomaly, const std::vector<EncodedRecord>& cfs,
                        const std::vector<int64_t>& corrupted);

// Pairwise disagreement between counterfactuals, counted only on domains
// both treat correctly, scaled by 1/(K^2 m).
double heterogeneity(const EncodedRecord& anomaly, const std::vector<EncodedRecord>& cfs,
                     const std::vector<int64_t>& corrupted);

// Seeded comparison sample: n_train training records, n_test test records,
// and ceil(anomaly_fraction * (n_train + n_test)) planted anomalies.
std::vector<EncodedRecord> build_comparison_sample(const Dataset& dataset,
                                                   const std::vector<EncodedRecord>& anomalies,
                                                   int64_t n_train, int64_t n_test,
                                                   double anomaly_fraction, uint64_t seed);

// Optional ingredients for evaluate_corpus; absent ingredients mark the
// metrics that need them undefined rather than failing the run.
struct EvaluationContext {
  const CooccurrenceModel* cooccurrence = nullptr;
  const AdScorer* scorer = nullptr;
  std::vector<EncodedRecord> comparison;
};

// Per-anomaly metric series over one method's counterfactual sets. When
// ground truth is given it must align with the outputs (labels[i].perturbed
// == outputs[i].anomaly); without it the ground-truth metrics are undefined.
MetricReport evaluate_corpus(const std::vector<CounterfactualSet>& outputs,
                             const GroundTruthLabels* labels, const EvaluationContext& ctx);

}  // namespace carat
