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
#include <string>
#include <string_view>
#include <vector>

#include "kgsynth/api_gen.h"
#include "kgsynth/fol.h"
#include "kgsynth/kg_store.h"
#include "kgsynth/llm_client.h"

namespace kgsynth {

enum class TranslationMode : std::uint8_t { kTemplate, kLlm };

std::string_view mode_name(TranslationMode mode);

inline constexpr std::size_t kMaxQuestionLength = 400;

struct ApiBrief {
  std::string name;
  std::string description;
};

struct TranslationRequest {
  PatternTag pattern = PatternTag::k1p;
  // FOL text with API names in place of relations and labels for anchors.
  std::string fol;
  std::vector<std::string> anchors;
  // Indexed by relation slot.
  std::vector<ApiBrief> apis;
};

struct NlQuery {
  std::string question;
  TranslationMode mode = TranslationMode::kTemplate;
  // Set when an LLM translation fell back to the template.
  bool flagged = false;
};

TranslationRequest make_request(const KnowledgeGraph& g, const FolQuery& q,
                                const ApiRegistry& apis);

// Non-empty, at most kMaxQuestionLength bytes, and ending in '?' for
// template output.
bool valid_question(std::string_view question, TranslationMode mode);

NlQuery translate_template(const TranslationRequest& req);

// Up to three calls; a reply failing valid_question is retried. Client
// errors and exhausted retries fall back to the template, flagged.
NlQuery translate_llm(const TranslationRequest& req, LlmClient& client,
                      std::string_view prompt);

std::string default_translation_prompt();

}  // namespace kgsynth
