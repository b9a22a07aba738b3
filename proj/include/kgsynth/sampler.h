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
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "kgsynth/fol.h"
#include "kgsynth/kg_store.h"
#include "kgsynth/rng.h"

namespace kgsynth {

struct SamplerOptions {
  // Samples whose answer set is larger than this are rejected.
  std::size_t answer_cap = 100;
  // Let an edge follow r^-1 as well, i.e. draw from the target's outgoing
  // relations too. Without it every projection runs head -> tail.
  bool use_inverse = true;
};

enum class FailureStage : std::uint8_t {
  kNoRelation,        // target has no incoming relation to follow
  kDuplicateBranch,   // two sibling branches bound identically
  kNegationPool,      // no entity besides the witness to root a negated branch
  kNegationGuard,     // negated branch would exclude the witness
  kAnswerCap,         // answer set larger than the cap
  kFinalGuard,        // root not in the evaluated answer set
};
inline constexpr std::size_t kFailureStageCount = 6;

std::string_view stage_name(FailureStage stage);

struct InstantiationFailure {
  FailureStage stage;
};

struct InstantiatedSample {
  FolQuery query;
  EntityId root;
  // KG triples matched by the pattern edges, in assignment order.
  std::vector<Triple> subgraph;
  std::uint64_t seed = 0;
  std::uint64_t attempt = 0;

  bool operator==(const InstantiatedSample&) const = default;
};

using InstantiationResult =
    std::variant<InstantiatedSample, InstantiationFailure>;

// Matches `pattern` against the graph from a uniformly drawn root (or
// `root` when given), binding relations and heads top-down. Negated
// branches are bound after their positive siblings so they can be rooted
// at another candidate (any other entity when there is none) and checked
// not to exclude the root.
InstantiationResult instantiate(const KnowledgeGraph& g, PatternTag pattern,
                                Rng& rng, const SamplerOptions& options = {},
                                std::optional<EntityId> root = std::nullopt);

// True when every intersection carrying a negated child still has a
// non-empty result under the query's bindings.
bool negations_nonempty(const KnowledgeGraph& g, const FolQuery& q);

struct BatchOptions {
  std::size_t n = 0;
  std::uint64_t seed = 0;
  // 0 selects the default of 100 * n.
  std::size_t max_attempts = 0;
  unsigned workers = 1;
  SamplerOptions sampler;
};

struct BatchStats {
  std::size_t attempts = 0;
  std::size_t successes = 0;
  std::size_t duplicates = 0;
  std::array<std::size_t, kFailureStageCount> failures{};
};

// Draws n distinct samples (keyed by pattern and bindings). Attempt i uses
// its own seed derived from (seed, pattern, i), and results are merged in
// attempt order, so the output does not depend on `workers`. Throws
// kShortfall when max_attempts run out first.
std::vector<InstantiatedSample> sample_batch(const KnowledgeGraph& g,
                                             PatternTag pattern,
                                             const BatchOptions& options,
                                             BatchStats* stats = nullptr);

// One-line structured dump of a sample, for inspection and replay.
std::string sample_to_line(const KnowledgeGraph& g,
                           const InstantiatedSample& s);
InstantiatedSample sample_from_line(const KnowledgeGraph& g,
                                    std::string_view line);

}  // namespace kgsynth
