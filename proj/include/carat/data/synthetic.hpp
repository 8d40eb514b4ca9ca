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

#include "carat/data/schema.hpp"

namespace carat {

// Plants anomalies by perturbing test records: sources sampled without
// replacement, 1 or 2 domains corrupted with equal probability, each new
// entity drawn uniformly from the domain vocabulary minus the original.
GroundTruthLabels generate_synthetic_anomalies(const Dataset& dataset, int64_t count, uint64_t seed);

// Synthetic stand-in for a real categorical table. Entities are grouped
// into latent clusters: per domain, cluster c owns the contiguous index
// block [c*block, (c+1)*block). A record picks one cluster and draws every
// domain value inside that cluster's block; with probability `noise` a
// domain instead draws uniformly from the whole vocabulary.
struct RuleCorpusSpec {
  int64_t m = 5;
  int64_t vocab_size = 60;
  int64_t clusters = 12;
  int64_t train_records = 3000;
  int64_t test_records = 600;
  double noise = 0.01;
  uint64_t seed = 1;

  void validate() const;
};

Dataset generate_rule_corpus(const RuleCorpusSpec& spec);

}  // namespace carat
