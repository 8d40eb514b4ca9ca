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
#include "carat/metrics/metrics.hpp"

#include <algorithm>
#include <cmath>

#include "carat/rng.hpp"
#include "carat/util.hpp"

namespace carat {
namespace {

std::vector<int64_t> changed_domains(const EncodedRecord& anomaly, const EncodedRecord& cf) {
  require(cf.values.size() == anomaly.values.size(),
          "metrics: counterfactual arity differs from the anomaly");
  std::vector<int64_t> changed;
  for (size_t j = 0; j < anomaly.values.size(); ++j) {
    if (cf.values[j] != anomaly.values[j]) changed.push_back(static_cast<int64_t>(j));
  }
  return changed;
}

void check_inputs(const EncodedRecord& anomaly, const std::vector<EncodedRecord>& cfs) {
  require(!anomaly.values.empty(), "metrics: anomaly has no domains");
  require(!cfs.empty(), "metrics: empty counterfactual set");
}

// Per-domain treatment indicator: 1 when the domain was changed exactly if
// it was corrupted.
std::vector<std::vector<bool>> treatment_correct(const EncodedRecord& anomaly,
                                                 const std::vector<EncodedRecord>& cfs,
                                                 const std::vector<int64_t>& corrupted) {
  const int64_t m = static_cast<int64_t>(anomaly.values.size());
  std::vector<bool> is_corrupted(static_cast<size_t>(m), false);
  require(!corrupted.empty(), "metrics: empty ground-truth corruption set");
  for (int64_t d : corrupted) {
    require(d >= 0 && d < m, "metrics: corrupted domain out of range");
    is_corrupted[static_cast<size_t>(d)] = true;
  }
  std::vector<std::vector<bool>> correct(cfs.size());
  for (size_t k = 0; k < cfs.size(); ++k) {
    require(cfs[k].values.size() == anomaly.values.size(),
            "metrics: counterfactual arity differs from the anomaly");
    correct[k].resize(static_cast<size_t>(m));
    for (size_t j = 0; j < static_cast<size_t>(m); ++j) {
      const bool changed = cfs[k].values[j] != anomaly.values[j];
      correct[k][j] = changed == is_corrupted[j];
    }
  }
  return correct;
}

std::optional<double> series_mean(const EncodedRecord& anomaly,
                                  const std::vector<EncodedRecord>& cfs,
                                  const CooccurrenceModel& cooccurrence, bool per_entity) {
  check_inputs(anomaly, cfs);
  double sum = 0.0;
  int64_t defined = 0;
  for (const auto& cf : cfs) {
    auto v = per_entity ? coherence(anomaly, cf, cooccurrence)
                        : coherence_raw(anomaly, cf, cooccurrence);
    if (v) {
      sum += *v;
      ++defined;
    }
  }
  if (defined == 0) return std::nullopt;
  return sum / static_cast<double>(defined);
}

}  // namespace

MetricStat MetricSeries::stat() const {
  MetricStat s;
  double sum = 0.0;
  for (const auto& v : values) {
    if (v) {
      sum += *v;
      ++s.defined;
    } else {
      ++s.undefined;
    }
  }
  if (s.defined == 0) return s;
  s.mean = sum / static_cast<double>(s.defined);
  if (s.defined >= 2) {
    double sq = 0.0;
    for (const auto& v : values) {
      if (v) sq += (*v - s.mean) * (*v - s.mean);
    }
    s.stddev = std::sqrt(sq / static_cast<double>(s.defined - 1));
  }
  return s;
}

double sparsity_index(const EncodedRecord& anomaly, const std::vector<EncodedRecord>& cfs) {
  check_inputs(anomaly, cfs);
  double sum = 0.0;
  for (const auto& cf : cfs) {
    const auto changed = changed_domains(anomaly, cf);
    sum += 1.0 / (1.0 + static_cast<double>(changed.size()));
  }
  return sum / static_cast<double>(cfs.size());
}

double sparsity_index_normalized(const EncodedRecord& anomaly,
                                 const std::vector<EncodedRecord>& cfs) {
  check_inputs(anomaly, cfs);
  const double m = static_cast<double>(anomaly.values.size());
  double sum = 0.0;
  for (const auto& cf : cfs) {
    const auto changed = changed_domains(anomaly, cf);
    sum += 1.0 / (1.0 + static_cast<double>(changed.size()) / m);
  }
  return sum / static_cast<double>(cfs.size());
}

std::optional<double> coherence_raw(const EncodedRecord& anomaly, const EncodedRecord& cf,
                                    const CooccurrenceModel& cooccurrence) {
  const auto changed = changed_domains(anomaly, cf);
  const int64_t m = static_cast<int64_t>(anomaly.values.size());
  const int64_t retained = m - static_cast<int64_t>(changed.size());
  if (changed.empty() || retained == 0) return std::nullopt;
  std::vector<bool> is_changed(static_cast<size_t>(m), false);
  for (int64_t d : changed) is_changed[static_cast<size_t>(d)] = true;
  double total = 0.0;
  for (int64_t i : changed) {
    double ctx = 0.0;
    for (int64_t j = 0; j < m; ++j) {
      if (is_changed[static_cast<size_t>(j)]) continue;
      ctx += cooccurrence.prob(i, cf.values[static_cast<size_t>(i)], j,
                               anomaly.values[static_cast<size_t>(j)]);
    }
    total += ctx / static_cast<double>(retained);
  }
  return total;
}

std::optional<double> coherence(const EncodedRecord& anomaly, const EncodedRecord& cf,
                                const CooccurrenceModel& cooccurrence) {
  const auto changed = changed_domains(anomaly, cf);
  auto raw = coherence_raw(anomaly, cf, cooccurrence);
  if (!raw) return std::nullopt;
  return *raw / static_cast<double>(changed.size());
}

std::optional<double> coherence_mean(const EncodedRecord& anomaly,
                                     const std::vector<EncodedRecord>& cfs,
                                     const CooccurrenceModel& cooccurrence) {
  return series_mean(anomaly, cfs, cooccurrence, /*per_entity=*/true);
}

std::optional<double> coherence_mean_raw(const EncodedRecord& anomaly,
                                         const std::vector<EncodedRecord>& cfs,
                                         const CooccurrenceModel& cooccurrence) {
  return series_mean(anomaly, cfs, cooccurrence, /*per_entity=*/false);
}

double conditional_correctness(const EncodedRecord& anomaly,
                               const std::vector<EncodedRecord>& cfs,
                               const std::vector<EncodedRecord>& comparison,
                               const AdScorer& scorer) {
  check_inputs(anomaly, cfs);
  require(!comparison.empty(), "conditional_correctness: empty comparison sample");
  const auto comparison_scores = scorer.score_batch(comparison);
  const int64_t anomaly_rank = rank_within(scorer.score(anomaly), comparison_scores);
  const auto cf_scores = scorer.score_batch(cfs);
  int64_t hits = 0;
  for (double s : cf_scores) {
    if (rank_within(s, comparison_scores) - anomaly_rank > 0) ++hits;
  }
  return static_cast<double>(hits) / static_cast<double>(cfs.size());
}

double feature_accuracy(const EncodedRecord& anomaly, const std::vector<EncodedRecord>& cfs,
                        const std::vector<int64_t>& corrupted) {
  check_inputs(anomaly, cfs);
  const auto correct = treatment_correct(anomaly, cfs, corrupted);
  const double m = static_cast<double>(anomaly.values.size());
  double sum = 0.0;
  for (const auto& row : correct) {
    double q = 0.0;
    for (bool c : row) q += c ? 1.0 : 0.0;
    sum += q / m;
  }
  return sum / static_cast<double>(cfs.size());
}

double heterogeneity(const EncodedRecord& anomaly, const std::vector<EncodedRecord>& cfs,
                     const std::vector<int64_t>& corrupted) {
  check_inputs(anomaly, cfs);
  const auto correct = treatment_correct(anomaly, cfs, corrupted);
  const size_t k = cfs.size();
  const size_t m = anomaly.values.size();
  double sum = 0.0;
  for (size_t i = 0; i < k; ++i) {
    for (size_t j = i + 1; j < k; ++j) {
      for (size_t l = 0; l < m; ++l) {
        if (correct[i][l] && correct[j][l] && cfs[i].values[l] != cfs[j].values[l]) sum += 1.0;
      }
    }
  }
  return sum / (static_cast<double>(k) * static_cast<double>(k) * static_cast<double>(m));
}

std::vector<EncodedRecord> build_comparison_sample(const Dataset& dataset,
                                                   const std::vector<EncodedRecord>& anomalies,
                                                   int64_t n_train, int64_t n_test,
                                                   double anomaly_fraction, uint64_t seed) {
  require(n_train >= 0 && n_test >= 0, "build_comparison_sample: negative sample size");
  require(anomaly_fraction >= 0.0 && anomaly_fraction <= 1.0,
          "build_comparison_sample: anomaly_fraction outside [0, 1]");
  require(n_train <= static_cast<int64_t>(dataset.train.size()),
          "build_comparison_sample: n_train exceeds the training set");
  require(n_test <= static_cast<int64_t>(dataset.test.size()),
          "build_comparison_sample: n_test exceeds the test set");
  int64_t n_anom = static_cast<int64_t>(
      std::ceil(anomaly_fraction * static_cast<double>(n_train + n_test)));
  n_anom = std::min(n_anom, static_cast<int64_t>(anomalies.size()));

  std::vector<EncodedRecord> out;
  out.reserve(static_cast<size_t>(n_train + n_test + n_anom));
  Rng train_rng(Rng::derive(seed, "comparison-train"));
  for (int64_t i : train_rng.sample_without_replacement(
           static_cast<int64_t>(dataset.train.size()), n_train)) {
    out.push_back(dataset.train[static_cast<size_t>(i)]);
  }
  Rng test_rng(Rng::derive(seed, "comparison-test"));
  for (int64_t i : test_rng.sample_without_replacement(
           static_cast<int64_t>(dataset.test.size()), n_test)) {
    out.push_back(dataset.test[static_cast<size_t>(i)]);
  }
  Rng anom_rng(Rng::derive(seed, "comparison-anomaly"));
  for (int64_t i : anom_rng.sample_without_replacement(
           static_cast<int64_t>(anomalies.size()), n_anom)) {
    out.push_back(anomalies[static_cast<size_t>(i)]);
  }
  for (const auto& r : out) validate_record(dataset.schema, r);
  return out;
}

MetricReport evaluate_corpus(const std::vector<CounterfactualSet>& outputs,
                             const GroundTruthLabels* labels, const EvaluationContext& ctx) {
  require(!outputs.empty(), "evaluate_corpus: no counterfactual sets");
  if (labels != nullptr) {
    require(labels->size() == outputs.size(),
            "evaluate_corpus: ground truth count differs from the output count");
    for (size_t i = 0; i < outputs.size(); ++i) {
      require((*labels)[i].perturbed == outputs[i].anomaly,
              "evaluate_corpus: ground truth does not align with the outputs");
    }
  }
  const bool can_rank = ctx.scorer != nullptr && !ctx.comparison.empty();

  MetricReport report;
  for (size_t i = 0; i < outputs.size(); ++i) {
    const auto& set = outputs[i];
    require(!set.items.empty(), "evaluate_corpus: counterfactual set is empty");
    std::vector<EncodedRecord> cfs;
    cfs.reserve(set.items.size());
    for (const auto& item : set.items) cfs.push_back(item.record);

    report.sparsity.values.push_back(sparsity_index(set.anomaly, cfs));
    report.sparsity_normalized.values.push_back(sparsity_index_normalized(set.anomaly, cfs));
    if (ctx.cooccurrence != nullptr) {
      report.coherence.values.push_back(coherence_mean(set.anomaly, cfs, *ctx.cooccurrence));
      report.coherence_raw.values.push_back(
          coherence_mean_raw(set.anomaly, cfs, *ctx.cooccurrence));
    } else {
      report.coherence.values.push_back(std::nullopt);
      report.coherence_raw.values.push_back(std::nullopt);
    }
    if (can_rank) {
      report.correctness.values.push_back(
          conditional_correctness(set.anomaly, cfs, ctx.comparison, *ctx.scorer));
    } else {
      report.correctness.values.push_back(std::nullopt);
    }
    if (labels != nullptr) {
      const auto& corrupted = (*labels)[i].corrupted;
      report.feature_accuracy.values.push_back(feature_accuracy(set.anomaly, cfs, corrupted));
      report.heterogeneity.values.push_back(heterogeneity(set.anomaly, cfs, corrupted));
    } else {
      report.feature_accuracy.values.push_back(std::nullopt);
      report.heterogeneity.values.push_back(std::nullopt);
    }
  }
  return report;
}

}  // namespace carat
