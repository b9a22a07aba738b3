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
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "kgsynth/kg_store.h"
#include "kgsynth/llm_client.h"
#include "kgsynth/rng.h"

namespace kgsynth {

enum class ApiMode : std::uint8_t { kTemplate, kLlm };

std::string_view mode_name(ApiMode mode);

struct ApiParam {
  std::string name;
  std::string type;
  std::string description;
  bool operator==(const ApiParam&) const = default;
};

struct ApiDescriptor {
  std::string name;
  std::string description;
  std::vector<ApiParam> parameters;
  std::string returns_type;
  std::string returns_description;
  // Unset for the logical APIs.
  std::optional<RelationRef> relation;
  ApiMode mode = ApiMode::kTemplate;
  // Set when derivation fell back (unparseable relation, bad LLM output).
  bool flagged = false;

  bool is_logical() const { return !relation.has_value(); }
  bool operator==(const ApiDescriptor&) const = default;
};

inline constexpr std::string_view kIntersectionApi = "get_intersection_of";
inline constexpr std::string_view kUnionApi = "get_union_of";
inline constexpr std::string_view kNegationApi = "get_negation_of";

// ^[a-z][a-z0-9_]*$
bool is_valid_api_name(std::string_view name);

// "get_university_of_person" -> "university of person".
std::string api_phrase(std::string_view name);

// Lowercase; runs of other characters become one underscore; trimmed.
std::string sanitize_token(std::string_view text);

struct TypeTokens {
  std::string head;
  std::string tail;
  bool parsed = true;
};

// For "/a/b/c" the head token is "b" and the tail token "c". A single
// segment names the tail and the head is "entity".
TypeTokens relation_type_tokens(std::string_view relation);

ApiDescriptor derive_api_template(std::string_view relation_name,
                                  RelationRef ref);

struct LlmApiPrompts {
  std::string forward;
  std::string inverse;
};
LlmApiPrompts default_api_prompts();

// Asks the model for {"name", "description"} and keeps the template's
// parameter and return shape. After two rejected retries, or on a client
// error, the template descriptor is returned with `flagged` set.
ApiDescriptor derive_api_llm(std::string_view relation_name, RelationRef ref,
                             LlmClient& client, const LlmApiPrompts& prompts);

// get_intersection_of, get_union_of, get_negation_of, in that order.
const std::vector<ApiDescriptor>& logical_apis();

// Compact JSON with the fixed key order
// {name, description, parameters:[{name,type,description}], returns:{type,description}}.
std::string descriptor_json(const ApiDescriptor& api);

// Every relation in both directions plus the logical APIs, with unique
// names. Logical names are reserved first; relation collisions get "_2",
// "_3" in relation-id order, forward before inverse.
class ApiRegistry {
 public:
  static ApiRegistry build(const KnowledgeGraph& g, ApiMode mode,
                           LlmClient* client = nullptr,
                           const LlmApiPrompts& prompts = default_api_prompts(),
                           unsigned workers = 1);
  // Rebuilds from gen-apis output lines.
  static ApiRegistry from_lines(const KnowledgeGraph& g,
                                std::span<const std::string> lines);

  std::span<const ApiDescriptor> all() const { return apis_; }
  const ApiDescriptor* find(std::string_view name) const;
  // Throws kMissingApi.
  const ApiDescriptor& for_relation(RelationRef ref) const;
  std::size_t collisions() const { return collisions_; }

  // One JSON line per API: {"api": descriptor, "relation", "direction",
  // "mode", "flagged"}.
  std::vector<std::string> to_lines(const KnowledgeGraph& g) const;

 private:
  void add(ApiDescriptor api);

  std::vector<ApiDescriptor> apis_;
  std::unordered_map<std::string, std::size_t> by_name_;
  std::vector<std::size_t> by_relation_;  // 2 * id + direction
  std::size_t collisions_ = 0;
};

using Toolset = std::vector<const ApiDescriptor*>;

// Used APIs plus k distinct unused ones drawn uniformly from the registry,
// shuffled by rng. Throws kContract when the pool is too small and
// kUnknownApi for a used name missing from the registry.
Toolset build_toolset(std::span<const std::string> used,
                      const ApiRegistry& registry, std::size_t k, Rng& rng);

}  // namespace kgsynth
