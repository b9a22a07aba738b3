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

#include "kgsynth/api_gen.h"

#include <algorithm>
#include <cctype>

#include "json.hpp"

#include "kgsynth/assets.h"
#include "kgsynth/error.h"
#include "kgsynth/parallel.h"

namespace kgsynth {
namespace {

using json = nlohmann::ordered_json;

constexpr std::string_view kEntityList = "entity_list";

std::string phrase(std::string_view token) {
  std::string out(token);
  std::replace(out.begin(), out.end(), '_', ' ');
  return out;
}

std::vector<std::string> split_path(std::string_view relation) {
  std::vector<std::string> out;
  std::size_t i = 0;
  while (i <= relation.size()) {
    std::size_t j = relation.find('/', i);
    if (j == std::string_view::npos) j = relation.size();
    std::string token = sanitize_token(relation.substr(i, j - i));
    if (!token.empty()) out.push_back(std::move(token));
    i = j + 1;
  }
  return out;
}

ApiDescriptor fallback_descriptor(std::string_view relation_name,
                                  RelationRef ref) {
  std::string base = sanitize_token(relation_name);
  if (base.empty()) base = "relation_" + std::to_string(ref.id.value);
  ApiDescriptor api;
  api.name = "get_" + base + (ref.is_inverse() ? "_inverse" : "");
  std::string rel(relation_name);
  api.description =
      ref.is_inverse()
          ? "Returns the entities that reach one of the given entities via the relation " + rel + "."
          : "Returns the entities reached from the given entities via the relation " + rel + ".";
  api.parameters = {{"entities", std::string(kEntityList),
                     "The entities to start from."}};
  api.returns_type = kEntityList;
  api.returns_description = "The entities reached.";
  api.relation = ref;
  api.flagged = true;
  return api;
}

std::optional<json> extract_object(std::string_view text) {
  std::size_t open = text.find('{');
  std::size_t close = text.rfind('}');
  if (open == std::string_view::npos || close == std::string_view::npos ||
      close < open) {
    return std::nullopt;
  }
  json j = json::parse(text.substr(open, close - open + 1), nullptr, false);
  if (j.is_discarded() || !j.is_object()) return std::nullopt;
  return j;
}

json descriptor_object(const ApiDescriptor& api) {
  json params = json::array();
  for (const ApiParam& p : api.parameters) {
    params.push_back({{"name", p.name},
                      {"type", p.type},
                      {"description", p.description}});
  }
  return {{"name", api.name},
          {"description", api.description},
          {"parameters", std::move(params)},
          {"returns",
           {{"type", api.returns_type},
            {"description", api.returns_description}}}};
}

ApiDescriptor logical(std::string_view name, std::string description,
                      std::vector<ApiParam> params, std::string returns) {
  ApiDescriptor api;
  api.name = name;
  api.description = std::move(description);
  api.parameters = std::move(params);
  api.returns_type = kEntityList;
  api.returns_description = std::move(returns);
  return api;
}

}  // namespace

std::string_view mode_name(ApiMode mode) {
  return mode == ApiMode::kLlm ? "llm" : "template";
}

bool is_valid_api_name(std::string_view name) {
  if (name.empty() || name[0] < 'a' || name[0] > 'z') return false;
  return std::all_of(name.begin(), name.end(), [](char c) {
    return (c >= 'a' && c <= 'z') || (c >= '0' && c <= '9') || c == '_';
  });
}

std::string api_phrase(std::string_view name) {
  if (name.substr(0, 4) == "get_") name.remove_prefix(4);
  return phrase(name);
}

std::string sanitize_token(std::string_view text) {
  std::string out;
  bool gap = false;
  for (char ch : text) {
    unsigned char c = static_cast<unsigned char>(ch);
    if (c < 0x80 && std::isalnum(c)) {
      if (gap && !out.empty()) out += '_';
      gap = false;
      out += static_cast<char>(std::tolower(c));
    } else {
      gap = true;
    }
  }
  return out;
}

TypeTokens relation_type_tokens(std::string_view relation) {
  std::vector<std::string> parts = split_path(relation);
  if (parts.empty()) return {"", "", false};
  if (parts.size() == 1) return {"entity", parts[0], true};
  return {parts[parts.size() - 2], parts.back(), true};
}

ApiDescriptor derive_api_template(std::string_view relation_name,
                                  RelationRef ref) {
  TypeTokens tokens = relation_type_tokens(relation_name);
  if (!tokens.parsed) return fallback_descriptor(relation_name, ref);
  const std::string rel(relation_name);
  const std::string head = phrase(tokens.head);
  const std::string tail = phrase(tokens.tail);
  ApiDescriptor api;
  api.relation = ref;
  api.returns_type = kEntityList;
  if (!ref.is_inverse()) {
    api.name = "get_" + tokens.tail + "_of_" + tokens.head;
    api.description = "Returns the " + tail + " of each given " + head +
                      " entity, following the relation " + rel + ".";
    api.parameters = {{tokens.head, std::string(kEntityList),
                       "The " + head + " entities to start from."}};
    api.returns_description = "The " + tail + " entities reached.";
  } else {
    api.name = "get_" + tokens.head + "_with_" + tokens.tail;
    api.description = "Returns the " + head +
                      " entities that have one of the given entities as " +
                      tail + ", following the relation " + rel +
                      " backwards.";
    api.parameters = {{tokens.tail, std::string(kEntityList),
                       "The " + tail + " entities to start from."}};
    api.returns_description = "The " + head + " entities reached.";
  }
  if (!is_valid_api_name(api.name)) return fallback_descriptor(relation_name, ref);
  return api;
}

LlmApiPrompts default_api_prompts() {
  return {std::string(assets::api_forward_prompt),
          std::string(assets::api_inverse_prompt)};
}

ApiDescriptor derive_api_llm(std::string_view relation_name, RelationRef ref,
                             LlmClient& client, const LlmApiPrompts& prompts) {
  ApiDescriptor base = derive_api_template(relation_name, ref);
  TypeTokens tokens = relation_type_tokens(relation_name);
  ChatExchange exchange;
  exchange.messages.push_back(
      {"user", render_template(ref.is_inverse() ? prompts.inverse
                                                : prompts.forward,
                               {{"relation", std::string(relation_name)},
                                {"head", tokens.head},
                                {"tail", tokens.tail}})});
  constexpr int kCalls = 3;
  for (int i = 0; i < kCalls; ++i) {
    std::string reply;
    try {
      reply = client.chat(exchange);
    } catch (const Error&) {
      break;
    }
    auto j = extract_object(reply);
    if (!j || !j->contains("name") || !(*j)["name"].is_string() ||
        !j->contains("description") || !(*j)["description"].is_string()) {
      continue;
    }
    std::string name = (*j)["name"].get<std::string>();
    std::string description = (*j)["description"].get<std::string>();
    if (!is_valid_api_name(name) || description.empty()) continue;
    ApiDescriptor api = base;
    api.name = std::move(name);
    api.description = std::move(description);
    api.mode = ApiMode::kLlm;
    return api;
  }
  base.flagged = true;
  return base;
}

const std::vector<ApiDescriptor>& logical_apis() {
  static const std::vector<ApiDescriptor> apis = {
      logical(kIntersectionApi,
              "Returns the entities contained in every given set.",
              {{"set_a", std::string(kEntityList), "First entity set."},
               {"set_b", std::string(kEntityList), "Second entity set."},
               {"set_c", std::string(kEntityList),
                "Optional third entity set."}},
              "The common entities."),
      logical(kUnionApi,
              "Returns the entities contained in either given set.",
              {{"set_a", std::string(kEntityList), "First entity set."},
               {"set_b", std::string(kEntityList), "Second entity set."}},
              "The combined entities."),
      logical(kNegationApi,
              "Returns the candidate entities that are not in the excluded "
              "set. When candidates_b is given, only entities in both "
              "candidate sets are kept.",
              {{"candidates", std::string(kEntityList),
                "Entities to filter."},
               {"exclude", std::string(kEntityList), "Entities to remove."},
               {"candidates_b", std::string(kEntityList),
                "Optional second candidate set."}},
              "The remaining entities."),
  };
  return apis;
}

std::string descriptor_json(const ApiDescriptor& api) {
  return descriptor_object(api).dump();
}

void ApiRegistry::add(ApiDescriptor api) {
  std::string name = api.name;
  if (by_name_.count(name)) {
    ++collisions_;
    for (int suffix = 2;; ++suffix) {
      name = api.name + "_" + std::to_string(suffix);
      if (!by_name_.count(name)) break;
    }
    api.name = name;
  }
  by_name_.emplace(name, apis_.size());
  if (api.relation) {
    std::size_t key = 2 * api.relation->id.value +
                      (api.relation->is_inverse() ? 1 : 0);
    if (by_relation_.size() <= key) by_relation_.resize(key + 1, SIZE_MAX);
    by_relation_[key] = apis_.size();
  }
  apis_.push_back(std::move(api));
}

ApiRegistry ApiRegistry::build(const KnowledgeGraph& g, ApiMode mode,
                               LlmClient* client,
                               const LlmApiPrompts& prompts,
                               unsigned workers) {
  const std::size_t n = 2 * g.num_relations();
  std::vector<ApiDescriptor> derived(n);
  parallel_for(n, mode == ApiMode::kLlm ? workers : 1, [&](std::size_t i) {
    RelationRef ref{RelationId{static_cast<std::uint32_t>(i / 2)},
                    i % 2 ? Direction::kInverse : Direction::kForward};
    const std::string& name = g.relation_name(ref.id);
    if (mode == ApiMode::kLlm && client != nullptr) {
      derived[i] = derive_api_llm(name, ref, *client, prompts);
    } else {
      derived[i] = derive_api_template(name, ref);
      if (mode == ApiMode::kLlm) derived[i].flagged = true;
    }
  });
  ApiRegistry reg;
  for (const ApiDescriptor& api : logical_apis()) reg.add(api);
  for (ApiDescriptor& api : derived) reg.add(std::move(api));
  return reg;
}

ApiRegistry ApiRegistry::from_lines(const KnowledgeGraph& g,
                                    std::span<const std::string> lines) {
  ApiRegistry reg;
  std::size_t line_no = 0;
  for (const std::string& line : lines) {
    ++line_no;
    if (line.empty()) continue;
    const std::string where = "api line " + std::to_string(line_no);
    json j = json::parse(line, nullptr, false);
    if (j.is_discarded() || !j.is_object()) {
      throw Error(ErrorCode::kSyntax, where + ": not a JSON object");
    }
    try {
      const json& d = j.at("api");
      ApiDescriptor api;
      api.name = d.at("name").get<std::string>();
      api.description = d.at("description").get<std::string>();
      for (const json& p : d.at("parameters")) {
        api.parameters.push_back({p.at("name").get<std::string>(),
                                  p.at("type").get<std::string>(),
                                  p.at("description").get<std::string>()});
      }
      api.returns_type = d.at("returns").at("type").get<std::string>();
      api.returns_description =
          d.at("returns").at("description").get<std::string>();
      api.mode = j.at("mode").get<std::string>() == "llm" ? ApiMode::kLlm
                                                          : ApiMode::kTemplate;
      api.flagged = j.at("flagged").get<bool>();
      if (!j.at("relation").is_null()) {
        std::string rel = j.at("relation").get<std::string>();
        auto id = g.find_relation(rel);
        if (!id) {
          throw Error(ErrorCode::kUnknownId,
                      where + ": unknown relation '" + rel + "'");
        }
        api.relation = RelationRef{
            *id, j.at("direction").get<std::string>() == "inverse"
                     ? Direction::kInverse
                     : Direction::kForward};
      }
      if (!is_valid_api_name(api.name) || reg.by_name_.count(api.name)) {
        throw Error(ErrorCode::kIntegrity,
                    where + ": invalid or duplicate API name '" + api.name + "'");
      }
      reg.add(std::move(api));
    } catch (const json::exception& e) {
      throw Error(ErrorCode::kSyntax, where + ": " + e.what());
    }
  }
  return reg;
}

const ApiDescriptor* ApiRegistry::find(std::string_view name) const {
  auto it = by_name_.find(std::string(name));
  return it == by_name_.end() ? nullptr : &apis_[it->second];
}

const ApiDescriptor& ApiRegistry::for_relation(RelationRef ref) const {
  std::size_t key = 2 * ref.id.value + (ref.is_inverse() ? 1 : 0);
  if (key >= by_relation_.size() || by_relation_[key] == SIZE_MAX) {
    throw Error(ErrorCode::kMissingApi,
                "no API for relation id " + std::to_string(ref.id.value) +
                    (ref.is_inverse() ? " (inverse)" : ""));
  }
  return apis_[by_relation_[key]];
}

std::vector<std::string> ApiRegistry::to_lines(const KnowledgeGraph& g) const {
  std::vector<std::string> out;
  out.reserve(apis_.size());
  for (const ApiDescriptor& api : apis_) {
    json j;
    j["api"] = descriptor_object(api);
    if (api.relation) {
      j["relation"] = g.relation_name(api.relation->id);
      j["direction"] = api.relation->is_inverse() ? "inverse" : "forward";
    } else {
      j["relation"] = nullptr;
      j["direction"] = nullptr;
    }
    j["mode"] = mode_name(api.mode);
    j["flagged"] = api.flagged;
    out.push_back(j.dump());
  }
  return out;
}

Toolset build_toolset(std::span<const std::string> used,
                      const ApiRegistry& registry, std::size_t k, Rng& rng) {
  Toolset tools;
  for (const std::string& name : used) {
    const ApiDescriptor* api = registry.find(name);
    if (!api) throw Error(ErrorCode::kUnknownApi, "unknown API '" + name + "'");
    if (std::find(tools.begin(), tools.end(), api) == tools.end()) {
      tools.push_back(api);
    }
  }
  std::vector<const ApiDescriptor*> pool;
  for (const ApiDescriptor& api : registry.all()) {
    if (std::find(tools.begin(), tools.end(), &api) == tools.end()) {
      pool.push_back(&api);
    }
  }
  if (pool.size() < k) {
    throw Error(ErrorCode::kContract,
                "requested " + std::to_string(k) + " distractors but only " +
                    std::to_string(pool.size()) + " unused APIs exist");
  }
  // Partial Fisher-Yates: the first k slots become a uniform k-subset.
  for (std::size_t i = 0; i < k; ++i) {
    std::swap(pool[i], pool[i + rng.uniform(pool.size() - i)]);
    tools.push_back(pool[i]);
  }
  rng.shuffle(tools);
  return tools;
}

}  // namespace kgsynth
