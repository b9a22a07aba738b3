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
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "kgsynth/api_gen.h"
#include "kgsynth/fol.h"
#include "kgsynth/kg_store.h"

namespace kgsynth {

// Responses longer than this are cut and end with a "<truncated: N more>"
// marker when rendered.
inline constexpr std::size_t kMaxRenderedEntities = 200;

// An argument is either an anchor constant or the output of an earlier
// step (0-based index).
struct ArgRef {
  std::string param;
  std::optional<EntityId> entity;
  std::size_t step = 0;

  bool is_step() const { return !entity.has_value(); }
  bool operator==(const ArgRef&) const = default;
};

struct PlannedStep {
  std::string goal;
  std::string api;
  std::vector<ArgRef> args;
  bool operator==(const PlannedStep&) const = default;
};

struct ExecutionChain {
  FolQuery query;
  std::vector<PlannedStep> steps;
};

// One step per projection, intersection and union node, in post-order. A
// negated branch is folded into its intersection, which becomes a single
// get_negation_of(candidates, exclude[, candidates_b]) call. Throws
// kMissingApi when a relation has no API.
ExecutionChain plan_chain(const KnowledgeGraph& g, const FolQuery& q,
                          const ApiRegistry& apis);

// Steps plan_chain emits for a catalogued pattern.
std::size_t chain_length(PatternTag pattern);

struct StepArgument {
  std::string param;
  EntitySet value;
  bool operator==(const StepArgument&) const = default;
};

struct SolutionStep {
  std::string goal;
  std::string api;
  std::vector<StepArgument> args;
  EntitySet response;
  bool operator==(const SolutionStep&) const = default;
};

struct SolutionPath {
  FolQuery query;
  std::string question;
  std::vector<std::string> subtasks;
  std::vector<SolutionStep> steps;
  EntitySet final_answer;
};

// Runs an API by name on concrete arguments. Throws kUnknownApi.
EntitySet call_api(const KnowledgeGraph& g, const ApiRegistry& apis,
                   std::string_view api,
                   const std::vector<StepArgument>& args);

// Executes the chain step by step. A step with an empty response, or a
// final answer different from evaluate(query), is a kIntegrity error.
SolutionPath execute_chain(const KnowledgeGraph& g, const ExecutionChain& chain,
                           const ApiRegistry& apis,
                           std::string question = {});

// Labels-only form of a path, as exported.
struct RenderedStep {
  std::string goal;
  std::string api;
  std::vector<std::pair<std::string, std::vector<std::string>>> args;
  std::vector<std::string> response;
  bool operator==(const RenderedStep&) const = default;
};

struct RenderedPath {
  std::string question;
  std::string fol;  // raw entity and relation names
  std::vector<std::string> subtasks;
  std::vector<RenderedStep> steps;
  std::vector<std::string> final_answer;
  bool operator==(const RenderedPath&) const = default;
};

std::vector<std::string> render_entities(const KnowledgeGraph& g,
                                         const EntitySet& set);
RenderedPath render(const KnowledgeGraph& g, const SolutionPath& path);

// {"query", "fol", "subtasks", "steps": [{"goal", "api", "args",
// "response"}], "final_answer"}.
std::string path_to_json(const RenderedPath& path);
RenderedPath path_from_json(std::string_view text);

struct StepCheck {
  bool goal = true;
  bool api = true;
  bool args = true;
  bool response = true;
  bool ok() const { return goal && api && args && response; }
};

struct VerificationReport {
  std::vector<StepCheck> steps;
  std::size_t mismatches = 0;
  std::optional<std::size_t> first_mismatch;
  bool step_count_matches = true;
  bool final_answer_matches = true;
  bool pass() const {
    return mismatches == 0 && step_count_matches && final_answer_matches;
  }
};

// Re-plans and re-executes the path's FOL over g and compares every
// recorded step. Throws kUnknownApi when the path names an API the
// registry does not know.
VerificationReport verify_replay(const KnowledgeGraph& g,
                                 const ApiRegistry& apis,
                                 const RenderedPath& path);

// A path that passed replay. Only certify() creates one.
class VerifiedPath {
 public:
  const SolutionPath& path() const { return path_; }
  const RenderedPath& rendered() const { return rendered_; }

 private:
  friend VerifiedPath certify(const KnowledgeGraph&, const ApiRegistry&,
                              SolutionPath);
  VerifiedPath(SolutionPath path, RenderedPath rendered)
      : path_(std::move(path)), rendered_(std::move(rendered)) {}

  SolutionPath path_;
  RenderedPath rendered_;
};

// Throws kUnverified when replay disagrees with the path.
VerifiedPath certify(const KnowledgeGraph& g, const ApiRegistry& apis,
                     SolutionPath path);

}  // namespace kgsynth
