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

#include "carat/anomaly_model/ad_scorer.hpp"
#include "carat/data/schema.hpp"
#include "carat/explainer/explainer.hpp"
#include "carat/recourse/recourse.hpp"

namespace carat {

enum class BaselineMethod { replace_m, xformer_r };

BaselineMethod baseline_method_from_string(const std::string& s);
std::string baseline_method_to_string(BaselineMethod m);

struct BaselineConfig {
  BaselineMethod method = BaselineMethod::replace_m;
  int64_t m = 1;
  int64_t k = 5;
  uint64_t seed = 1;

  void validate() const;
};

// Exhaustively enumerates every record that differs from the anomaly in
// exactly m domains, scores all of them, and keeps the K least anomalous.
// No sampling; the enumeration size is the caller's bill, so it is capped
// by a hard guard rather than silently truncated.
CounterfactualSet replace_m(const EncodedRecord& anomaly, const AdScorer& scorer,
                            const DomainSchema& schema, int64_t k, int64_t m = 1);

// Random-replacement baseline: picks the low-likelihood domains with the
// explainer, then draws each counterfactual by resampling every selected
// domain uniformly among its other entities. Returns K distinct records,
// or all that exist plus a warning when the vocabularies cannot supply K.
// Items carry AD scores and least-anomalous-first order when a scorer is
// given; without one they carry zero scores in lexicographic order.
CounterfactualSet xformer_r(const EncodedRecord& anomaly, const DomainSchema& schema,
                            const Encoder& encoder, const DecoderP& decoder_p, int64_t k,
                            uint64_t seed, const AdScorer* scorer = nullptr,
                            double likelihood_threshold = 0.5);

}  // namespace carat
