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

#include "carat/util.hpp"

namespace carat {

// Ordered domains with per-domain sorted vocabularies. Index vocab_size(j)
// is the reserved MASK slot of domain j; it never appears in stored data.
struct DomainSchema {
  std::vector<std::string> domains;
  std::vector<std::vector<std::string>> vocab;

  int64_t m() const { return static_cast<int64_t>(domains.size()); }
  int64_t vocab_size(int64_t j) const { return static_cast<int64_t>(vocab[static_cast<size_t>(j)].size()); }
  int64_t mask_index(int64_t j) const { return vocab_size(j); }

  // Binary search over the sorted vocabulary; unseen labels are hard errors.
  int64_t entity_index(int64_t j, const std::string& label) const;
  const std::string& entity_label(int64_t j, int64_t index) const;

  void validate() const;

  // Digest over domain names and vocabularies; artifacts trained on one
  // schema refuse to combine with artifacts from another.
  uint64_t hash() const;
};

// One row of the table, as per-domain entity indices.
struct EncodedRecord {
  std::vector<int64_t> values;

  bool operator==(const EncodedRecord& o) const { return values == o.values; }
};

struct Dataset {
  DomainSchema schema;
  std::vector<EncodedRecord> train;
  std::vector<EncodedRecord> test;

  void validate() const;
};

// A planted anomaly: the clean source record, its corrupted version and the
// exact domains that were corrupted. Evaluation treats this as ground truth.
struct GroundTruthLabel {
  EncodedRecord original;
  EncodedRecord perturbed;
  std::vector<int64_t> corrupted;
};

using GroundTruthLabels = std::vector<GroundTruthLabel>;

void validate_record(const DomainSchema& schema, const EncodedRecord& r, bool allow_mask = false);
void validate_labels(const DomainSchema& schema, const GroundTruthLabels& labels);

}  // namespace carat
