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
#include "carat/io/formats.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "carat/util.hpp"

namespace carat {
namespace {

void check_label(const std::string& s) {
  require(!s.empty(), "text artifact: empty label");
  require(s.find('\t') == std::string::npos && s.find('\n') == std::string::npos &&
              s.find('\r') == std::string::npos,
          "text artifact: label contains a TAB or line break: " + s);
}

std::vector<std::string> split_tabs(const std::string& line) {
  std::vector<std::string> out;
  size_t start = 0;
  while (true) {
    const size_t tab = line.find('\t', start);
    if (tab == std::string::npos) {
      out.push_back(line.substr(start));
      return out;
    }
    out.push_back(line.substr(start, tab - start));
    start = tab + 1;
  }
}

class LineReader {
 public:
  explicit LineReader(const std::string& path) : path_(path), in_(path, std::ios::binary) {
    require(in_.good(), "text artifact: cannot open " + path);
  }

  std::string next() {
    std::string line;
    require(static_cast<bool>(std::getline(in_, line)),
            path_ + ":" + std::to_string(line_no_ + 1) + ": unexpected end of file");
    ++line_no_;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    return line;
  }

  void expect_end() {
    std::string line;
    require(!std::getline(in_, line),
            path_ + ":" + std::to_string(line_no_ + 1) + ": trailing content");
  }

  // Position of the line most recently consumed.
  std::string where() const { return path_ + ":" + std::to_string(line_no_); }

 private:
  std::string path_;
  std::ifstream in_;
  int64_t line_no_ = 0;
};

int64_t parse_count(const LineReader& r, const std::string& token) {
  int64_t v = 0;
  const auto res = std::from_chars(token.data(), token.data() + token.size(), v);
  require(res.ec == std::errc() && res.ptr == token.data() + token.size() && v >= 0,
          r.where() + ": bad count '" + token + "'");
  return v;
}

std::vector<std::string> expect_fields(LineReader& r, const std::string& keyword,
                                       size_t min_fields) {
  const std::string line = r.next();
  auto fields = split_tabs(line);
  require(!fields.empty() && fields[0] == keyword,
          r.where() + ": expected '" + keyword + "', got '" + line + "'");
  require(fields.size() >= min_fields, r.where() + ": too few fields for '" + keyword + "'");
  return fields;
}

void append_record(std::string& body, const DomainSchema& schema, const EncodedRecord& r) {
  validate_record(schema, r);
  for (int64_t j = 0; j < schema.m(); ++j) {
    body.push_back('\t');
    body.append(schema.entity_label(j, r.values[static_cast<size_t>(j)]));
  }
}

EncodedRecord parse_record(const LineReader& r, const DomainSchema& schema,
                           const std::vector<std::string>& fields, size_t first) {
  require(fields.size() - first == static_cast<size_t>(schema.m()),
          r.where() + ": record has " + std::to_string(fields.size() - first) + " cells, schema has " +
              std::to_string(schema.m()) + " domains");
  EncodedRecord rec;
  for (int64_t j = 0; j < schema.m(); ++j)
    rec.values.push_back(schema.entity_index(j, fields[first + static_cast<size_t>(j)]));
  return rec;
}

int64_t domain_index(const LineReader& r, const DomainSchema& schema, const std::string& name) {
  for (int64_t j = 0; j < schema.m(); ++j)
    if (schema.domains[static_cast<size_t>(j)] == name) return j;
  fail(r.where() + ": unknown domain '" + name + "'");
}

std::string keyword_value(LineReader& r, const std::string& keyword) {
  const std::string line = r.next();
  require(line.rfind(keyword + " ", 0) == 0,
          r.where() + ": expected '" + keyword + " <value>', got '" + line + "'");
  return line.substr(keyword.size() + 1);
}

uint64_t parse_u64(const LineReader& r, const std::string& token) {
  uint64_t v = 0;
  const auto res = std::from_chars(token.data(), token.data() + token.size(), v);
  require(res.ec == std::errc() && res.ptr == token.data() + token.size(),
          r.where() + ": bad unsigned integer '" + token + "'");
  return v;
}

std::string identity_block(const ArtifactIdentity& id) {
  return "schema " + to_hex(id.schema_hash) + "\n" + "digest " + to_hex(id.config_digest) +
         "\n" + "seed " + std::to_string(id.seed) + "\n";
}

ArtifactIdentity read_identity(LineReader& r) {
  ArtifactIdentity id;
  id.schema_hash = from_hex(keyword_value(r, "schema"));
  id.config_digest = from_hex(keyword_value(r, "digest"));
  id.seed = parse_u64(r, keyword_value(r, "seed"));
  return id;
}

void check_write_identity(const ArtifactIdentity& id, const DomainSchema& schema,
                          const char* what) {
  require(id.schema_hash == schema.hash(),
          std::string(what) + ": identity schema hash disagrees with the schema being written");
}

void check_read_identity(const LineReader& r, const ArtifactIdentity& id,
                         const DomainSchema& schema) {
  require(id.schema_hash == schema.hash(),
          r.where() + ": schema-hash mismatch: artifact records " + to_hex(id.schema_hash) +
              ", expected " + to_hex(schema.hash()));
}

}  // namespace

void write_text_file(const std::string& path, const std::string& body) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  require(out.good(), "text artifact: cannot open " + path + " for writing");
  out.write(body.data(), static_cast<std::streamsize>(body.size()));
  out.flush();
  require(out.good(), "text artifact: write failed for " + path);
}

std::string format_double(double v) {
  if (!std::isfinite(v)) return "?";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

double parse_double(const std::string& s) {
  if (s == "?") return std::nan("");
  double v = 0.0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  require(res.ec == std::errc() && res.ptr == s.data() + s.size(),
          "text artifact: bad number '" + s + "'");
  return v;
}

void write_dataset(const std::string& path, const Dataset& dataset,
                   const ArtifactIdentity& identity) {
  dataset.validate();
  check_write_identity(identity, dataset.schema, "write_dataset");
  std::string body = "CARAT-DATASET 1\n";
  body += identity_block(identity);
  body += "domains " + std::to_string(dataset.schema.m()) + "\n";
  for (int64_t j = 0; j < dataset.schema.m(); ++j) {
    const auto& name = dataset.schema.domains[static_cast<size_t>(j)];
    check_label(name);
    body += "domain\t" + name + "\t" + std::to_string(dataset.schema.vocab_size(j)) + "\n";
    for (const auto& label : dataset.schema.vocab[static_cast<size_t>(j)]) {
      check_label(label);
      body += label + "\n";
    }
  }
  body += "train " + std::to_string(dataset.train.size()) + "\n";
  for (const auto& r : dataset.train) {
    std::string line = "row";
    append_record(line, dataset.schema, r);
    body += line + "\n";
  }
  body += "test " + std::to_string(dataset.test.size()) + "\n";
  for (const auto& r : dataset.test) {
    std::string line = "row";
    append_record(line, dataset.schema, r);
    body += line + "\n";
  }
  write_text_file(path, body);
}

Dataset read_dataset(const std::string& path, ArtifactIdentity* identity) {
  LineReader r(path);
  require(r.next() == "CARAT-DATASET 1", path + ": not a CARAT-DATASET version 1 file");
  const ArtifactIdentity id = read_identity(r);

  Dataset ds;
  {
    const auto fields = split_tabs(r.next());
    require(fields.size() == 1 && fields[0].rfind("domains ", 0) == 0,
            r.where() + ": expected 'domains <m>'");
    const int64_t m = parse_count(r, fields[0].substr(8));
    for (int64_t j = 0; j < m; ++j) {
      const auto head = expect_fields(r, "domain", 3);
      require(head.size() == 3, r.where() + ": 'domain' takes a name and a size");
      ds.schema.domains.push_back(head[1]);
      const int64_t vocab = parse_count(r, head[2]);
      std::vector<std::string> labels;
      for (int64_t e = 0; e < vocab; ++e) labels.push_back(r.next());
      ds.schema.vocab.push_back(std::move(labels));
    }
    ds.schema.validate();
    check_read_identity(r, id, ds.schema);
  }
  for (const bool is_train : {true, false}) {
    const auto fields = split_tabs(r.next());
    const std::string keyword = is_train ? "train " : "test ";
    require(fields.size() == 1 && fields[0].rfind(keyword, 0) == 0,
            r.where() + ": expected '" + keyword + "<n>'");
    const int64_t n = parse_count(r, fields[0].substr(keyword.size()));
    auto& split = is_train ? ds.train : ds.test;
    for (int64_t i = 0; i < n; ++i) {
      const auto row = expect_fields(r, "row", 1);
      split.push_back(parse_record(r, ds.schema, row, 1));
    }
  }
  r.expect_end();
  ds.validate();
  if (identity) *identity = id;
  return ds;
}

void write_anomalies(const std::string& path, const DomainSchema& schema,
                     const GroundTruthLabels& labels, const ArtifactIdentity& identity) {
  validate_labels(schema, labels);
  check_write_identity(identity, schema, "write_anomalies");
  std::string body = "CARAT-ANOMALIES 1\n";
  body += identity_block(identity);
  body += "count " + std::to_string(labels.size()) + "\n";
  for (const auto& label : labels) {
    std::string line = "original";
    append_record(line, schema, label.original);
    body += line + "\n";
    line = "perturbed";
    append_record(line, schema, label.perturbed);
    body += line + "\n";
    line = "corrupted";
    for (int64_t d : label.corrupted) {
      line.push_back('\t');
      line += schema.domains[static_cast<size_t>(d)];
    }
    body += line + "\n";
  }
  write_text_file(path, body);
}

GroundTruthLabels read_anomalies(const std::string& path, const DomainSchema& schema,
                                 ArtifactIdentity* identity) {
  LineReader r(path);
  require(r.next() == "CARAT-ANOMALIES 1", path + ": not a CARAT-ANOMALIES version 1 file");
  const ArtifactIdentity id = read_identity(r);
  check_read_identity(r, id, schema);
  if (identity) *identity = id;
  const auto count_fields = split_tabs(r.next());
  require(count_fields.size() == 1 && count_fields[0].rfind("count ", 0) == 0,
          r.where() + ": expected 'count <n>'");
  const int64_t n = parse_count(r, count_fields[0].substr(6));

  GroundTruthLabels labels;
  for (int64_t i = 0; i < n; ++i) {
    GroundTruthLabel label;
    const auto original = expect_fields(r, "original", 1);
    label.original = parse_record(r, schema, original, 1);
    const auto perturbed = expect_fields(r, "perturbed", 1);
    label.perturbed = parse_record(r, schema, perturbed, 1);
    const auto corrupted = expect_fields(r, "corrupted", 1);
    for (size_t f = 1; f < corrupted.size(); ++f)
      label.corrupted.push_back(domain_index(r, schema, corrupted[f]));
    labels.push_back(std::move(label));
  }
  r.expect_end();
  validate_labels(schema, labels);
  return labels;
}

void write_counterfactuals(const std::string& path, const DomainSchema& schema,
                           const std::vector<CounterfactualSet>& sets,
                           const ArtifactIdentity& identity) {
  check_write_identity(identity, schema, "write_counterfactuals");
  std::string body = "CARAT-CF 1\n";
  body += identity_block(identity);
  body += "count " + std::to_string(sets.size()) + "\n";
  for (const auto& set : sets) {
    std::string line = "anomaly";
    append_record(line, schema, set.anomaly);
    body += line + "\n";
    line = "modified";
    for (int64_t d : set.modified_domains) {
      require(d >= 0 && d < schema.m(), "write_counterfactuals: modified domain out of range");
      line.push_back('\t');
      line += schema.domains[static_cast<size_t>(d)];
    }
    body += line + "\n";
    require(set.likelihoods.empty() ||
                set.likelihoods.size() == static_cast<size_t>(schema.m()),
            "write_counterfactuals: likelihood vector arity mismatch");
    line = "likelihoods";
    for (double v : set.likelihoods) {
      line.push_back('\t');
      line += format_double(v);
    }
    body += line + "\n";
    body += "items " + std::to_string(set.items.size()) + "\n";
    for (const auto& item : set.items) {
      line = "cf\t" + format_double(item.score);
      append_record(line, schema, item.record);
      body += line + "\n";
    }
  }
  write_text_file(path, body);
}

std::vector<CounterfactualSet> read_counterfactuals(const std::string& path,
                                                    const DomainSchema& schema,
                                                    ArtifactIdentity* identity) {
  LineReader r(path);
  require(r.next() == "CARAT-CF 1", path + ": not a CARAT-CF version 1 file");
  const ArtifactIdentity id = read_identity(r);
  check_read_identity(r, id, schema);
  if (identity) *identity = id;
  const auto count_fields = split_tabs(r.next());
  require(count_fields.size() == 1 && count_fields[0].rfind("count ", 0) == 0,
          r.where() + ": expected 'count <n>'");
  const int64_t n = parse_count(r, count_fields[0].substr(6));

  std::vector<CounterfactualSet> sets;
  for (int64_t i = 0; i < n; ++i) {
    CounterfactualSet set;
    const auto anomaly = expect_fields(r, "anomaly", 1);
    set.anomaly = parse_record(r, schema, anomaly, 1);
    const auto modified = expect_fields(r, "modified", 1);
    for (size_t f = 1; f < modified.size(); ++f)
      set.modified_domains.push_back(domain_index(r, schema, modified[f]));
    const auto likelihoods = expect_fields(r, "likelihoods", 1);
    for (size_t f = 1; f < likelihoods.size(); ++f)
      set.likelihoods.push_back(parse_double(likelihoods[f]));
    require(set.likelihoods.empty() ||
                set.likelihoods.size() == static_cast<size_t>(schema.m()),
            r.where() + ": likelihood vector arity mismatch");
    const auto items_fields = split_tabs(r.next());
    require(items_fields.size() == 1 && items_fields[0].rfind("items ", 0) == 0,
            r.where() + ": expected 'items <k>'");
    const int64_t k = parse_count(r, items_fields[0].substr(6));
    for (int64_t item_idx = 0; item_idx < k; ++item_idx) {
      const auto fields = expect_fields(r, "cf", 2);
      Counterfactual cf;
      cf.score = parse_double(fields[1]);
      cf.record = parse_record(r, schema, fields, 2);
      for (size_t j = 0; j < cf.record.values.size(); ++j)
        if (cf.record.values[j] != set.anomaly.values[j])
          cf.changed.push_back(static_cast<int64_t>(j));
      set.items.push_back(std::move(cf));
    }
    sets.push_back(std::move(set));
  }
  r.expect_end();
  return sets;
}

void write_evaluation(const std::string& path, const EvaluationArtifact& evaluation) {
  std::string body = "CARAT-EVAL 1\n";
  body += identity_block(evaluation.identity);
  body += "methods " + std::to_string(evaluation.methods.size()) + "\n";
  for (const auto& method : evaluation.methods) {
    check_label(method.method);
    require(method.anomalies >= 0, "write_evaluation: negative anomaly count");
    body += "method " + method.method + "\n";
    body += "anomalies " + std::to_string(method.anomalies) + "\n";
    body += "metrics " + std::to_string(method.metrics.size()) + "\n";
    for (const auto& [name, series] : method.metrics) {
      check_label(name);
      require(series.values.size() == static_cast<size_t>(method.anomalies),
              "write_evaluation: series length mismatch for metric " + name);
      std::string line = "metric\t" + name;
      for (const auto& v : series.values) {
        line.push_back('\t');
        if (v.has_value()) {
          require(std::isfinite(*v), "write_evaluation: non-finite value in metric " + name);
          line += format_double(*v);
        } else {
          line += "?";
        }
      }
      body += line + "\n";
    }
  }
  write_text_file(path, body);
}

EvaluationArtifact read_evaluation(const std::string& path) {
  LineReader r(path);
  require(r.next() == "CARAT-EVAL 1", path + ": not a CARAT-EVAL version 1 file");
  EvaluationArtifact evaluation;
  evaluation.identity = read_identity(r);
  const int64_t n_methods = parse_count(r, keyword_value(r, "methods"));
  for (int64_t mi = 0; mi < n_methods; ++mi) {
    MethodEvaluation method;
    method.method = keyword_value(r, "method");
    method.anomalies = parse_count(r, keyword_value(r, "anomalies"));
    const int64_t n_metrics = parse_count(r, keyword_value(r, "metrics"));
    for (int64_t k = 0; k < n_metrics; ++k) {
      const auto fields = expect_fields(r, "metric", 2);
      require(fields.size() == static_cast<size_t>(method.anomalies) + 2,
              r.where() + ": metric line has " + std::to_string(fields.size() - 2) +
                  " values, expected " + std::to_string(method.anomalies));
      MetricSeries series;
      for (size_t f = 2; f < fields.size(); ++f) {
        if (fields[f] == "?") {
          series.values.emplace_back(std::nullopt);
        } else {
          const double v = parse_double(fields[f]);
          require(std::isfinite(v), r.where() + ": non-finite metric value");
          series.values.emplace_back(v);
        }
      }
      method.metrics.emplace_back(fields[1], std::move(series));
    }
    evaluation.methods.push_back(std::move(method));
  }
  r.expect_end();
  return evaluation;
}

void write_timing(const std::string& path, const TimingArtifact& timing) {
  std::string body = "CARAT-TIMING 1\n";
  body += identity_block(timing.identity);
  body += "anomalies " + std::to_string(timing.entries.size()) + "\n";
  for (const auto& e : timing.entries) {
    require(e.modified_domains >= 0 && e.neighbor_queries >= 0 && e.enumerated >= 0 &&
                e.scored >= 0 && std::isfinite(e.seconds) && e.seconds >= 0.0,
            "write_timing: negative or non-finite entry");
    body += "case\t" + std::to_string(e.modified_domains) + "\t" +
            std::to_string(e.neighbor_queries) + "\t" + std::to_string(e.enumerated) + "\t" +
            std::to_string(e.scored) + "\t" + format_double(e.seconds) + "\n";
  }
  require(std::isfinite(timing.total_seconds) && timing.total_seconds >= 0.0,
          "write_timing: negative or non-finite total");
  body += "total\t" + format_double(timing.total_seconds) + "\n";
  write_text_file(path, body);
}

TimingArtifact read_timing(const std::string& path) {
  LineReader r(path);
  require(r.next() == "CARAT-TIMING 1", path + ": not a CARAT-TIMING version 1 file");
  TimingArtifact timing;
  timing.identity = read_identity(r);
  const int64_t n = parse_count(r, keyword_value(r, "anomalies"));
  for (int64_t i = 0; i < n; ++i) {
    const auto fields = expect_fields(r, "case", 6);
    require(fields.size() == 6, r.where() + ": 'case' takes five values");
    TimingEntry e;
    e.modified_domains = parse_count(r, fields[1]);
    e.neighbor_queries = parse_count(r, fields[2]);
    e.enumerated = parse_count(r, fields[3]);
    e.scored = parse_count(r, fields[4]);
    e.seconds = parse_double(fields[5]);
    require(std::isfinite(e.seconds) && e.seconds >= 0.0, r.where() + ": bad seconds value");
    timing.entries.push_back(e);
  }
  const auto total = expect_fields(r, "total", 2);
  require(total.size() == 2, r.where() + ": 'total' takes one value");
  timing.total_seconds = parse_double(total[1]);
  require(std::isfinite(timing.total_seconds) && timing.total_seconds >= 0.0,
          r.where() + ": bad total seconds");
  r.expect_end();
  return timing;
}

}  // namespace carat
