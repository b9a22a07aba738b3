// Copyright 2026 The kgsynth Authors
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

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "kgsynth/api_gen.h"
#include "kgsynth/fol.h"
#include "kgsynth/instruction.h"
#include "kgsynth/llm_client.h"
#include "kgsynth/nl_translate.h"
#include "kgsynth/sampler.h"

namespace kgsynth {

inline constexpr std::string_view kGeneratorVersion = "kgsynth 1.0.0";

struct PipelineConfig {
  std::filesystem::path kg;
  std::optional<std::filesystem::path> labels;
  bool lenient = false;
  std::vector<PatternTag> patterns{kAllPatterns.begin(), kAllPatterns.end()};
  std::size_t per_pattern = 0;
  // Samples drawn per pattern before selecting per_pattern of them.
  std::optional<std::size_t> pool_size;
  std::optional<std::uint64_t> seed;
  TranslationMode translator = TranslationMode::kTemplate;
  // Defaults to the translator mode.
  std::optional<ApiMode> api_mode;
  std::size_t distractors = 3;
  std::size_t answer_cap = 100;
  double review_prob = 0.3;
  ExportFormat format = ExportFormat::kShareGpt;
  std::filesystem::path out;
  unsigned workers = 1;
  std::size_t max_attempts = 0;
  bool use_inverse = true;
  LlmConfig llm;
  std::optional<std::filesystem::path> system_prompt;
  std::optional<std::filesystem::path> translate_prompt;
  std::optional<std::filesystem::path> api_forward_prompt;
  std::optional<std::filesystem::path> api_inverse_prompt;
};

// Overlays the keys of a JSON config file onto `config`. Throws
// kInvalidConfig naming the offending field.
void apply_config_file(PipelineConfig& config,
                       const std::filesystem::path& path);
void apply_config_text(PipelineConfig& config, std::string_view json_text,
                       std::string_view source);

enum class Command { kSample, kGenApis, kSynth, kVerify, kStats };

// Field-level checks for a command. Throws kInvalidConfig.
void validate(const PipelineConfig& config, Command command);

KnowledgeGraph load_graph(const PipelineConfig& config);
ApiMode effective_api_mode(const PipelineConfig& config);
LlmApiPrompts api_prompts(const PipelineConfig& config);
// The per-pattern sample stream shared by `sample` and `synth`.
std::vector<InstantiatedSample> draw_samples(const KnowledgeGraph& g,
                                             const PipelineConfig& config,
                                             PatternTag pattern, std::size_t n);

std::filesystem::path manifest_path(const std::filesystem::path& dataset);
std::filesystem::path apis_path(const std::filesystem::path& dataset);

struct SynthResult {
  std::size_t pairs = 0;
  std::size_t records = 0;
  std::string dataset_sha256;
};

// sample -> translate -> execute -> build -> export. Writes the dataset,
// its manifest and the API table next to config.out.
SynthResult run_synth(const PipelineConfig& config, LlmClient& client);

struct VerifyResult {
  std::size_t records = 0;
  std::size_t samples = 0;
  std::size_t step_mismatches = 0;
  // "line N (record id): what" for every failed check.
  std::vector<std::string> problems;
  bool ok() const { return problems.empty(); }
};

// Replays every trajectory against the KG and regenerates each sample's
// records for comparison. `kg` overrides the manifest's KG path.
VerifyResult run_verify(const std::filesystem::path& dataset,
                        const std::optional<std::filesystem::path>& kg);

// Exit status: 0 success, 1 validation failure, 2 integrity failure.
// `client` replaces the one built from the configuration.
int run_cli(const std::vector<std::string>& args, std::ostream& out,
            std::ostream& err, LlmClient* client = nullptr);

}  // namespace kgsynth
