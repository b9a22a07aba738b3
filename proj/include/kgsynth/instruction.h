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

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "kgsynth/api_gen.h"
#include "kgsynth/fol.h"
#include "kgsynth/nl_translate.h"
#include "kgsynth/rng.h"
#include "kgsynth/solution_path.h"

namespace kgsynth {

enum class RecordKind : std::uint8_t {
  kTrajectory,
  kPlan,
  kReason,
  kRetrieve,
  kUnderstand,
  kReview,
};
inline constexpr std::size_t kRecordKindCount = 6;
inline constexpr std::array<RecordKind, kRecordKindCount> kAllRecordKinds = {
    RecordKind::kTrajectory, RecordKind::kPlan,       RecordKind::kReason,
    RecordKind::kRetrieve,   RecordKind::kUnderstand, RecordKind::kReview,
};

std::string_view kind_name(RecordKind kind);
std::optional<RecordKind> kind_from_name(std::string_view name);

enum class Role : std::uint8_t { kSystem, kUser, kAssistant, kTool };

struct Turn {
  Role role = Role::kUser;
  std::string text;
  bool operator==(const Turn&) const = default;
};

struct RecordMeta {
  std::string id;
  RecordKind kind = RecordKind::kTrajectory;
  PatternTag pattern = PatternTag::k1p;
  std::string sample_id;
  // 1-based step for per-step kinds.
  std::optional<std::size_t> step;
  std::string fol;
  TranslationMode translation = TranslationMode::kTemplate;
  bool translation_flagged = false;
  bool operator==(const RecordMeta&) const = default;
};

// turns[0] is the system prompt. Single-turn kinds end with the assistant
// label; the trajectory alternates assistant actions and tool responses.
struct InstructionRecord {
  std::vector<Turn> turns;
  RecordMeta meta;

  RecordKind kind() const { return meta.kind; }
  // Expected assistant output of a single-turn kind; empty for trajectories.
  std::string label() const;
  bool operator==(const InstructionRecord&) const = default;
};

struct BuildOptions {
  double review_prob = 0.3;
  std::string system_prompt;  // must contain "{tools}"
};

// A verified pair: the path, its question, and where it came from.
struct PairInput {
  const VerifiedPath* path = nullptr;
  NlQuery question;
  std::string sample_id;
};

// 1 trajectory, 1 plan, then reason/retrieve/understand per step, plus a
// review for each step drawn with probability review_prob. Half of the
// reviews show a corrupted response (label "fail").
std::vector<InstructionRecord> build_records(const KnowledgeGraph& g,
                                             const PairInput& pair,
                                             const Toolset& tools,
                                             const BuildOptions& options,
                                             Rng& rng);

std::string system_prompt_text(std::string_view prompt_template,
                               const Toolset& tools);
std::string default_system_prompt();

enum class ExportFormat : std::uint8_t { kShareGpt, kAlpaca };
std::string_view format_name(ExportFormat format);
std::optional<ExportFormat> format_from_name(std::string_view name);

// One JSON object per line, no trailing newline in the returned string.
std::string record_to_line(const InstructionRecord& record,
                           ExportFormat format);
InstructionRecord record_from_line(std::string_view line, ExportFormat format);

// Writes each line plus '\n'. Throws kIo.
void write_lines(const std::filesystem::path& path,
                 const std::vector<std::string>& lines);
std::vector<std::string> read_lines(const std::filesystem::path& path);

}  // namespace kgsynth
