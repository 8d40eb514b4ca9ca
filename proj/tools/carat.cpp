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
#include <cstdint>
#include <cstdio>
#include <exception>
#include <string>

#include "CLI11.hpp"
#include "carat/pipeline/pipeline.hpp"
#include "carat/util.hpp"

namespace {

const char* describe(const std::string& command) {
  if (command == "ingest") return "encode a CSV into the dataset artifact with a seeded split";
  if (command == "gen-corpus") return "generate the bundled rule-based synthetic corpus";
  if (command == "train-ad") return "train the anomaly scorer";
  if (command == "train-kge") return "train the entity-graph embedding model";
  if (command == "pretrain-explainer") return "pretrain the explainer encoder";
  if (command == "train-explainer") return "train the explainer likelihood head";
  if (command == "gen-anomalies") return "plant ground-truth anomalies from the test split";
  if (command == "recourse") return "generate counterfactuals for every planted anomaly";
  if (command == "baseline") return "run the configured baseline generators";
  if (command == "evaluate") return "compute per-anomaly metrics for every method";
  if (command == "report") return "render human-readable report tables";
  if (command == "timing") return "measure per-anomaly recourse wall-clock";
  return "";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"counterfactual recourse toolkit for categorical tabular data"};
  app.require_subcommand(1);

  std::string config_path;
  uint64_t seed_override = 0;
  std::string out_override;
  for (const std::string& name : carat::pipeline_commands()) {
    CLI::App* sub = app.add_subcommand(name, describe(name));
    sub->add_option("--config", config_path, "pipeline config file (JSON)")->required();
    sub->add_option("--seed", seed_override, "override the config's global seed");
    sub->add_option("--out", out_override, "override the config's output directory");
  }

  CLI11_PARSE(app, argc, argv);

  CLI::App* sub = app.get_subcommands().front();
  try {
    carat::PipelineConfig cfg = carat::load_pipeline_config(config_path);
    if (sub->count("--seed") > 0) cfg.reseed(seed_override);
    if (sub->count("--out") > 0) cfg.out_dir = out_override;
    carat::run_command(sub->get_name(), cfg);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "carat: %s\n", e.what());
    return 1;
  }
  return 0;
}
