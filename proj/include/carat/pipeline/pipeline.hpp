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

#include "carat/pipeline/config.hpp"

namespace carat {

// Artifact names under the output directory. Stages communicate only
// through these files; each carries (schema hash, config digest, seed) and
// any mismatch against the config or the dataset in hand is a hard error,
// so a config change means regenerating from the top.
namespace artifact {
inline constexpr const char* kDataset = "dataset.txt";
inline constexpr const char* kAnomalies = "anomalies.txt";
inline constexpr const char* kAdModel = "ad.model";
inline constexpr const char* kKgeModel = "kge.model";
inline constexpr const char* kEncoderModel = "encoder.model";
inline constexpr const char* kDecoderRModel = "decoder_r.model";
inline constexpr const char* kDecoderPModel = "decoder_p.model";
inline constexpr const char* kRecourse = "cf_carat.txt";
inline constexpr const char* kEvaluation = "evaluation.txt";
inline constexpr const char* kReport = "report.txt";
inline constexpr const char* kTiming = "timing.txt";
inline constexpr const char* kTimingReport = "timing_report.txt";
}  // namespace artifact

// "cf_replace_m.txt" / "cf_xformer_r.txt".
std::string baseline_artifact_name(BaselineMethod method);

// The stage names run_command accepts, in pipeline order.
const std::vector<std::string>& pipeline_commands();

// Runs one pipeline stage against the config. Stages are sequential and
// deterministic given (config, seed); the two timing artifacts are the only
// outputs carrying wall-clock values. Throws Error on any failure: missing
// input artifact, identity mismatch, invalid config, unknown command.
void run_command(const std::string& command, const PipelineConfig& cfg);

}  // namespace carat
