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

#include "kgsynth/nl_translate.h"

#include <array>

#include "kgsynth/assets.h"
#include "kgsynth/error.h"
#include "kgsynth/fol_text.h"

namespace kgsynth {
namespace {

// Keeps every template expansion under kMaxQuestionLength: at most six
// filled slots per pattern.
constexpr std::size_t kMaxSlotLength = 48;

std::string clip(std::string_view text) {
  if (text.size() <= kMaxSlotLength) return std::string(text);
  std::size_t cut = kMaxSlotLength - 3;
  while (cut > 0 && (static_cast<unsigned char>(text[cut]) & 0xC0) == 0x80) {
    --cut;
  }
  return std::string(text.substr(0, cut)) + "...";
}

// {p0}.. are relation phrases, {A} {B} {C} anchor labels.
constexpr std::array<std::string_view, 14> kTemplates = {
    "What is the {p0} {A}?",
    "What is the {p1} any entity that is the {p0} {A}?",
    "What is the {p2} any entity that is the {p1} any entity that is the {p0} {A}?",
    "Which entities are both the {p0} {A} and the {p1} {B}?",
    "Which entities are the {p0} {A}, the {p1} {B}, and the {p2} {C}?",
    "Which entities are both the {p1} any entity that is the {p0} {A} and the {p2} {B}?",
    "What is the {p2} any entity that is both the {p0} {A} and the {p1} {B}?",
    "Which entities are the {p0} {A} or the {p1} {B}?",
    "What is the {p2} any entity that is the {p0} {A} or the {p1} {B}?",
    "Which entities are the {p0} {A} but not the {p1} {B}?",
    "Which entities are both the {p0} {A} and the {p1} {B} but not the {p2} {C}?",
    "What is the {p2} any entity that is the {p0} {A} but not the {p1} {B}?",
    "Which entities are the {p1} any entity that is the {p0} {A} but not the {p2} {B}?",
    "Which entities are the {p2} {B} but not the {p1} any entity that is the {p0} {A}?",
};

std::string trim(std::string_view s) {
  const char* ws = " \t\r\n";
  std::size_t b = s.find_first_not_of(ws);
  if (b == std::string_view::npos) return {};
  std::size_t e = s.find_last_not_of(ws);
  return std::string(s.substr(b, e - b + 1));
}

std::string clean_reply(std::string_view reply) {
  std::string out = trim(reply);
  constexpr std::string_view kPrefix = "Question:";
  if (out.compare(0, kPrefix.size(), kPrefix) == 0) {
    out = trim(std::string_view(out).substr(kPrefix.size()));
  }
  if (out.size() >= 2 && out.front() == '"' && out.back() == '"') {
    out = trim(std::string_view(out).substr(1, out.size() - 2));
  }
  return out;
}

}  // namespace

std::string_view mode_name(TranslationMode mode) {
  return mode == TranslationMode::kLlm ? "llm" : "template";
}

TranslationRequest make_request(const KnowledgeGraph& g, const FolQuery& q,
                                const ApiRegistry& apis) {
  TranslationRequest req;
  req.pattern = q.pattern;
  SymbolicQuery sym;
  sym.pattern = q.pattern;
  for (EntityId e : q.anchors) {
    req.anchors.push_back(g.label(e));
    sym.anchors.push_back(g.label(e));
  }
  for (RelationRef r : q.relations) {
    const ApiDescriptor& api = apis.for_relation(r);
    req.apis.push_back({api.name, api.description});
    sym.relations.push_back({api.name, false});
  }
  req.fol = format_fol(sym);
  return req;
}

bool valid_question(std::string_view question, TranslationMode mode) {
  if (question.empty() || question.size() > kMaxQuestionLength) return false;
  if (mode == TranslationMode::kTemplate && question.back() != '?') {
    return false;
  }
  return true;
}

NlQuery translate_template(const TranslationRequest& req) {
  std::map<std::string, std::string> vars;
  static const char* kAnchorNames[] = {"A", "B", "C"};
  for (std::size_t i = 0; i < req.anchors.size() && i < 3; ++i) {
    vars[kAnchorNames[i]] = clip(req.anchors[i]);
  }
  for (std::size_t i = 0; i < req.apis.size(); ++i) {
    vars["p" + std::to_string(i)] = clip(api_phrase(req.apis[i].name));
  }
  std::string text = render_template(
      kTemplates[static_cast<std::size_t>(req.pattern)], vars);
  return {std::move(text), TranslationMode::kTemplate, false};
}

NlQuery translate_llm(const TranslationRequest& req, LlmClient& client,
                      std::string_view prompt) {
  std::string api_lines;
  for (const ApiBrief& api : req.apis) {
    api_lines += "- " + api.name + ": " + api.description + "\n";
  }
  ChatExchange exchange;
  exchange.messages.push_back(
      {"user", render_template(prompt, {{"pattern", std::string(pattern_name(req.pattern))},
                                        {"fol", req.fol},
                                        {"apis", api_lines}})});
  constexpr int kCalls = 3;
  for (int i = 0; i < kCalls; ++i) {
    std::string reply;
    try {
      reply = client.chat(exchange);
    } catch (const Error&) {
      break;
    }
    std::string question = clean_reply(reply);
    if (valid_question(question, TranslationMode::kLlm)) {
      return {std::move(question), TranslationMode::kLlm, false};
    }
  }
  NlQuery fallback = translate_template(req);
  fallback.flagged = true;
  return fallback;
}

std::string default_translation_prompt() {
  return std::string(assets::fol_translate_prompt);
}

}  // namespace kgsynth
