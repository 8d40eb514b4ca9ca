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

#include <string>
#include <vector>

#include "carat/data/schema.hpp"

namespace carat {

// Rows surviving ingestion, cells reordered to the declared domain order.
struct RawRows {
  std::vector<std::string> domains;
  std::vector<std::vector<std::string>> rows;
  int64_t dropped = 0;
};

// Comma-delimited UTF-8 with a header row. Rows missing any declared cell
// are dropped and counted, not errors.
RawRows load_csv(const std::string& path, const std::vector<std::string>& declared_domains);

// Per-domain vocabulary = sorted unique observed labels.
DomainSchema build_schema(const RawRows& raw);

EncodedRecord encode_record(const DomainSchema& schema, const std::vector<std::string>& row);
std::vector<std::string> decode_record(const DomainSchema& schema, const EncodedRecord& r);

}  // namespace carat
