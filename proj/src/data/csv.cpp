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
#include "carat/data/csv.hpp"

#include <algorithm>
#include <fstream>
#include <set>

namespace carat {

namespace {

std::vector<std::string> split_line(const std::string& line) {
  std::vector<std::string> cells;
  size_t start = 0;
  while (true) {
    const size_t comma = line.find(',', start);
    if (comma == std::string::npos) {
      cells.push_back(line.substr(start));
      break;
    }
    cells.push_back(line.substr(start, comma - start));
    start = comma + 1;
  }
  for (std::string& c : cells) {
    while (!c.empty() && (c.back() == '\r' || c.back() == '\n')) c.pop_back();
  }
  return cells;
}

}  // namespace

RawRows load_csv(const std::string& path, const std::vector<std::string>& declared_domains) {
  require(!declared_domains.empty(), "load_csv: no domains declared");
  std::ifstream in(path);
  if (!in) fail("load_csv: cannot open '" + path + "'");

  std::string line;
  if (!std::getline(in, line)) fail("load_csv: empty file '" + path + "'");
  const std::vector<std::string> header = split_line(line);

  std::vector<size_t> col(declared_domains.size());
  for (size_t d = 0; d < declared_domains.size(); ++d) {
    const auto it = std::find(header.begin(), header.end(), declared_domains[d]);
    if (it == header.end()) fail("load_csv: header lacks declared domain '" + declared_domains[d] + "'");
    col[d] = static_cast<size_t>(it - header.begin());
  }

  RawRows out;
  out.domains = declared_domains;
  while (std::getline(in, line)) {
    if (line.empty() || line == "\r") continue;
    const std::vector<std::string> cells = split_line(line);
    std::vector<std::string> row(declared_domains.size());
    bool ok = true;
    for (size_t d = 0; d < declared_domains.size(); ++d) {
      if (col[d] >= cells.size() || cells[col[d]].empty()) {
        ok = false;
        break;
      }
      row[d] = cells[col[d]];
    }
    if (ok)
      out.rows.push_back(std::move(row));
    else
      ++out.dropped;
  }
  require(!out.rows.empty(), "load_csv: no usable rows in '" + path + "'");
  return out;
}

DomainSchema build_schema(const RawRows& raw) {
  require(!raw.rows.empty(), "build_schema: no rows");
  DomainSchema schema;
  schema.domains = raw.domains;
  schema.vocab.resize(raw.domains.size());
  for (size_t d = 0; d < raw.domains.size(); ++d) {
    std::set<std::string> uniq;
    for (const auto& row : raw.rows) uniq.insert(row[d]);
    schema.vocab[d].assign(uniq.begin(), uniq.end());
  }
  schema.validate();
  return schema;
}

EncodedRecord encode_record(const DomainSchema& schema, const std::vector<std::string>& row) {
  require(static_cast<int64_t>(row.size()) == schema.m(), "encode_record: arity mismatch");
  EncodedRecord r;
  r.values.resize(row.size());
  for (int64_t j = 0; j < schema.m(); ++j)
    r.values[static_cast<size_t>(j)] = schema.entity_index(j, row[static_cast<size_t>(j)]);
  return r;
}

std::vector<std::string> decode_record(const DomainSchema& schema, const EncodedRecord& r) {
  validate_record(schema, r);
  std::vector<std::string> row(r.values.size());
  for (int64_t j = 0; j < schema.m(); ++j)
    row[static_cast<size_t>(j)] = schema.entity_label(j, r.values[static_cast<size_t>(j)]);
  return row;
}

}  // namespace carat
