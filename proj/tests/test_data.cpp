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
#include <cstdio>
#include <filesystem>
#include <fstream>

#include "carat/data/cooccurrence.hpp"
#include "carat/data/csv.hpp"
#include "carat/data/synthetic.hpp"
#include "carat/rng.hpp"
#include "doctest.h"

using namespace carat;

namespace {

std::string write_temp_csv(const std::string& name, const std::string& content) {
  const std::string path = (std::filesystem::temp_directory_path() / name).string();
  std::ofstream out(path);
  out << content;
  return path;
}

Dataset two_domain_dataset(std::vector<EncodedRecord> train) {
  Dataset ds;
  ds.schema.domains = {"A", "B"};
  ds.schema.vocab = {{"a", "b"}, {"x", "y"}};
  ds.train = std::move(train);
  return ds;
}

}  // namespace

TEST_CASE("load_csv keeps complete rows and counts dropped ones") {
  const std::string full = write_temp_csv(
      "carat_full.csv", "Consignee,Carrier,Port\nacme,maersk,oakland\nbeta,cosco,shanghai\ngamma,one,busan\n");
  RawRows rows = load_csv(full, {"Consignee", "Port"});
  CHECK(rows.rows.size() == 3);
  CHECK(rows.dropped == 0);
  CHECK(rows.rows[0] == std::vector<std::string>({"acme", "oakland"}));

  const std::string holes = write_temp_csv(
      "carat_holes.csv", "Consignee,Port\nacme,oakland\nbeta,\ngamma,busan\n");
  RawRows partial = load_csv(holes, {"Consignee", "Port"});
  CHECK(partial.rows.size() == 2);
  CHECK(partial.dropped == 1);

  CHECK_THROWS_AS(load_csv(full, {"Consignee", "Carrier", "Weight"}), Error);
  CHECK_THROWS_AS(load_csv("/nonexistent/x.csv", {"A"}), Error);

  std::remove(full.c_str());
  std::remove(holes.c_str());
}

TEST_CASE("build_schema sorts unique labels per domain") {
  RawRows raw;
  raw.domains = {"D0", "D1"};
  raw.rows = {{"a", "x"}, {"b", "x"}};
  DomainSchema s = build_schema(raw);
  CHECK(s.vocab[0] == std::vector<std::string>({"a", "b"}));
  CHECK(s.vocab[1] == std::vector<std::string>({"x"}));

  RawRows unsorted;
  unsorted.domains = {"D0", "D1"};
  unsorted.rows = {{"B", "q"}, {"A", "q"}};
  DomainSchema s2 = build_schema(unsorted);
  CHECK(s2.entity_index(0, "A") == 0);
  CHECK(s2.entity_index(0, "B") == 1);

  RawRows single;
  single.domains = {"D0", "D1"};
  single.rows = {{"only", "one"}};
  DomainSchema s3 = build_schema(single);
  for (int64_t j = 0; j < s3.m(); ++j) CHECK(s3.vocab_size(j) == 1);
}

TEST_CASE("encode and decode round-trip") {
  DomainSchema s;
  s.domains = {"A", "B"};
  s.vocab = {{"a", "b"}, {"x"}};
  EncodedRecord r = encode_record(s, {"a", "x"});
  CHECK(r.values == std::vector<int64_t>({0, 0}));
  CHECK(decode_record(s, r) == std::vector<std::string>({"a", "x"}));
  CHECK_THROWS_AS(encode_record(s, {"z", "x"}), Error);

  RuleCorpusSpec spec;
  spec.m = 3;
  spec.vocab_size = 8;
  spec.clusters = 4;
  spec.train_records = 50;
  spec.test_records = 10;
  Dataset ds = generate_rule_corpus(spec);
  Rng rng(5);
  for (int trial = 0; trial < 50; ++trial) {
    EncodedRecord rec;
    for (int64_t j = 0; j < ds.schema.m(); ++j)
      rec.values.push_back(rng.uniform_int(ds.schema.vocab_size(j)));
    CHECK(encode_record(ds.schema, decode_record(ds.schema, rec)) == rec);
  }
}

TEST_CASE("schema hash tracks identity") {
  DomainSchema s;
  s.domains = {"A", "B"};
  s.vocab = {{"a", "b"}, {"x"}};
  const uint64_t h = s.hash();
  CHECK(h == s.hash());

  DomainSchema other = s;
  other.vocab[1].push_back("y");
  CHECK(other.hash() != h);

  DomainSchema renamed = s;
  renamed.domains[0] = "Z";
  CHECK(renamed.hash() != h);
}

TEST_CASE("synthetic anomalies are deterministic and well-formed") {
  RuleCorpusSpec spec;
  spec.train_records = 100;
  spec.test_records = 300;
  Dataset ds = generate_rule_corpus(spec);

  GroundTruthLabels a = generate_synthetic_anomalies(ds, 100, 7);
  GroundTruthLabels b = generate_synthetic_anomalies(ds, 100, 7);
  REQUIRE(a.size() == 100);
  for (size_t i = 0; i < a.size(); ++i) {
    CHECK(a[i].original == b[i].original);
    CHECK(a[i].perturbed == b[i].perturbed);
    CHECK(a[i].corrupted == b[i].corrupted);
  }

  GroundTruthLabels c = generate_synthetic_anomalies(ds, 100, 8);
  bool any_diff = false;
  for (size_t i = 0; i < c.size(); ++i) any_diff = any_diff || !(c[i].perturbed == a[i].perturbed);
  CHECK(any_diff);

  for (const GroundTruthLabel& gt : a) {
    CHECK(gt.corrupted.size() >= 1);
    CHECK(gt.corrupted.size() <= 2);
    for (int64_t j = 0; j < ds.schema.m(); ++j) {
      const bool corrupted =
          std::find(gt.corrupted.begin(), gt.corrupted.end(), j) != gt.corrupted.end();
      if (corrupted)
        CHECK(gt.original.values[static_cast<size_t>(j)] != gt.perturbed.values[static_cast<size_t>(j)]);
      else
        CHECK(gt.original.values[static_cast<size_t>(j)] == gt.perturbed.values[static_cast<size_t>(j)]);
    }
  }

  CHECK_THROWS_AS(generate_synthetic_anomalies(ds, 301, 7), Error);
}

TEST_CASE("synthetic anomaly perturbation counts are balanced") {
  RuleCorpusSpec spec;
  spec.train_records = 100;
  spec.test_records = 1000;
  Dataset ds = generate_rule_corpus(spec);
  GroundTruthLabels labels = generate_synthetic_anomalies(ds, 1000, 7);
  int64_t two = 0;
  for (const GroundTruthLabel& gt : labels) two += gt.corrupted.size() == 2 ? 1 : 0;
  const double frac = static_cast<double>(two) / 1000.0;
  CHECK(frac >= 0.45);
  CHECK(frac <= 0.55);
}

TEST_CASE("cooccurrence matches hand counts") {
  Dataset ds = two_domain_dataset({{{0, 0}}, {{0, 1}}});
  CooccurrenceModel cm = CooccurrenceModel::build(ds.schema, ds.train);
  CHECK(cm.prob(0, 0, 1, 0) == doctest::Approx(0.5));   // P(a,x)
  CHECK(cm.prob(0, 0, 1, 1) == doctest::Approx(0.5));   // P(a,y)
  CHECK(cm.prob(0, 1, 1, 0) == 0.0);                     // P(b,x) never co-occurs
  CHECK(cm.prob(1, 0, 0, 0) == doctest::Approx(0.5));   // order-insensitive
  CHECK_THROWS_AS(cm.count(0, 0, 0, 1), Error);

  Dataset all = two_domain_dataset({{{0, 0}}, {{0, 0}}, {{0, 0}}});
  CooccurrenceModel cm2 = CooccurrenceModel::build(all.schema, all.train);
  CHECK(cm2.prob(0, 0, 1, 0) == 1.0);

  CHECK(cm.cooccurring(0, 0, 1) == std::vector<int64_t>({0, 1}));
  CHECK(cm.cooccurring(0, 1, 1).empty());
}

TEST_CASE("cooccurrence matches brute-force scan on random data") {
  RuleCorpusSpec spec;
  spec.m = 4;
  spec.vocab_size = 6;
  spec.clusters = 2;
  spec.train_records = 100;
  spec.test_records = 5;
  spec.noise = 0.3;
  Dataset ds = generate_rule_corpus(spec);
  CooccurrenceModel cm = CooccurrenceModel::build(ds.schema, ds.train);
  for (int64_t i = 0; i < ds.schema.m(); ++i) {
    for (int64_t j = 0; j < ds.schema.m(); ++j) {
      if (i == j) continue;
      for (int64_t ei = 0; ei < ds.schema.vocab_size(i); ++ei) {
        for (int64_t ej = 0; ej < ds.schema.vocab_size(j); ++ej) {
          int64_t brute = 0;
          for (const EncodedRecord& r : ds.train)
            if (r.values[static_cast<size_t>(i)] == ei && r.values[static_cast<size_t>(j)] == ej)
              ++brute;
          CHECK(cm.count(i, ei, j, ej) == brute);
          CHECK(cm.prob(i, ei, j, ej) >= 0.0);
          CHECK(cm.prob(i, ei, j, ej) <= 1.0);
        }
      }
    }
  }
}

TEST_CASE("rule corpus respects cluster structure") {
  RuleCorpusSpec spec;
  spec.m = 3;
  spec.vocab_size = 12;
  spec.clusters = 3;
  spec.train_records = 2000;
  spec.test_records = 10;
  spec.noise = 0.0;
  Dataset ds = generate_rule_corpus(spec);
  const int64_t block = spec.vocab_size / spec.clusters;

  for (const EncodedRecord& r : ds.train) {
    const int64_t c = r.values[0] / block;
    for (const int64_t v : r.values) CHECK(v / block == c);
  }

  CooccurrenceModel cm = CooccurrenceModel::build(ds.schema, ds.train);
  CHECK(cm.prob(0, 0, 1, block) == 0.0);  // cross-cluster never co-occurs at noise 0

  // Within-cluster pair frequency has expectation 1 / (clusters * block^2).
  const double expect = 1.0 / (static_cast<double>(spec.clusters) * static_cast<double>(block * block));
  double mean = 0.0;
  int64_t n_pairs = 0;
  for (int64_t e0 = 0; e0 < block; ++e0)
    for (int64_t e1 = 0; e1 < block; ++e1) {
      mean += cm.prob(0, e0, 1, e1);
      ++n_pairs;
    }
  mean /= static_cast<double>(n_pairs);
  CHECK(mean == doctest::Approx(expect).epsilon(0.15));

  RuleCorpusSpec bad = spec;
  bad.vocab_size = 13;
  CHECK_THROWS_AS(generate_rule_corpus(bad), Error);
}

TEST_CASE("rule corpus determinism") {
  RuleCorpusSpec spec;
  spec.train_records = 50;
  spec.test_records = 20;
  Dataset a = generate_rule_corpus(spec);
  Dataset b = generate_rule_corpus(spec);
  CHECK(a.train.size() == b.train.size());
  for (size_t i = 0; i < a.train.size(); ++i) CHECK(a.train[i] == b.train[i]);
  for (size_t i = 0; i < a.test.size(); ++i) CHECK(a.test[i] == b.test[i]);
  CHECK(a.schema.hash() == b.schema.hash());
}
