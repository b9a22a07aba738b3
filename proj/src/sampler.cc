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

#include "kgsynth/sampler.h"

#include <algorithm>
#include <map>
#include <set>
#include <utility>

#include "json.hpp"

#include "kgsynth/error.h"
#include "kgsynth/fol_text.h"
#include "kgsynth/parallel.h"
#include "kgsynth/patterns.h"

namespace kgsynth {
namespace {

using json = nlohmann::ordered_json;

struct Abort {
  FailureStage stage;
};

class Instantiator {
 public:
  Instantiator(const KnowledgeGraph& g, Rng& rng, const SamplerOptions& opt,
               SlotCounts slots)
      : g_(g), rng_(rng), opt_(opt) {
    anchors_.resize(slots.anchors);
    relations_.resize(slots.relations);
  }

  void assign(const FolNode& node, EntityId target) {
    switch (node.kind) {
      case NodeKind::kAnchor:
        anchors_[node.slot] = target;
        return;
      case NodeKind::kProjection:
        assign_projection(node, target);
        return;
      case NodeKind::kUnion:
        for (const FolNode& c : node.children) assign(c, target);
        reject_duplicate_siblings(node.children);
        return;
      case NodeKind::kIntersection:
        assign_intersection(node, target);
        return;
      case NodeKind::kNegation:
        throw Error(ErrorCode::kContract, "negation outside an intersection");
    }
  }

  std::vector<EntityId> take_anchors() { return std::move(anchors_); }
  std::vector<RelationRef> take_relations() { return std::move(relations_); }
  std::vector<Triple> take_subgraph() { return std::move(subgraph_); }

 private:
  void assign_projection(const FolNode& node, EntityId target) {
    std::vector<RelationRef> candidates;
    for (RelationId r : g_.incoming_relations(target)) {
      candidates.push_back({r, Direction::kForward});
    }
    if (opt_.use_inverse) {
      for (RelationId r : g_.outgoing_relations(target)) {
        candidates.push_back({r, Direction::kInverse});
      }
    }
    if (candidates.empty()) throw Abort{FailureStage::kNoRelation};
    RelationRef r = rng_.pick(candidates);
    std::span<const EntityId> heads = g_.in_neighbors(target, r);
    EntityId head = heads[rng_.uniform(heads.size())];
    relations_[node.slot] = r;
    if (r.is_inverse()) {
      subgraph_.push_back({target, r.id, head});
    } else {
      subgraph_.push_back({head, r.id, target});
    }
    assign(node.children[0], head);
  }

  void assign_intersection(const FolNode& node, EntityId target) {
    std::vector<FolNode> positive;
    std::vector<const FolNode*> negated;
    for (const FolNode& c : node.children) {
      if (c.kind == NodeKind::kNegation) {
        negated.push_back(&c.children[0]);
      } else {
        assign(c, target);
        positive.push_back(c);
      }
    }
    reject_duplicate_siblings(positive);
    if (negated.empty()) return;

    EntitySet pool;
    for (std::size_t i = 0; i < positive.size(); ++i) {
      EntitySet part = evaluate(g_, positive[i], bindings());
      pool = i == 0 ? std::move(part) : intersect(pool, part);
    }
    for (const FolNode* inner : negated) {
      std::vector<EntityId> others;
      for (EntityId e : pool) {
        if (e != target) others.push_back(e);
      }
      EntityId root{};
      if (!others.empty()) {
        root = rng_.pick(others);
      } else {
        if (g_.num_entities() < 2) throw Abort{FailureStage::kNegationPool};
        auto v = static_cast<std::uint32_t>(rng_.uniform(g_.num_entities() - 1));
        root = EntityId{v >= target.value ? v + 1 : v};
      }
      assign(*inner, root);
      EntitySet excluded = evaluate(g_, *inner, bindings());
      if (excluded.contains(target)) throw Abort{FailureStage::kNegationGuard};
      pool = relative_complement(pool, excluded);
    }
  }

  bool same_binding(const FolNode& a, const FolNode& b) const {
    if (a.kind != b.kind || a.children.size() != b.children.size()) {
      return false;
    }
    if (a.kind == NodeKind::kAnchor && anchors_[a.slot] != anchors_[b.slot]) {
      return false;
    }
    if (a.kind == NodeKind::kProjection &&
        relations_[a.slot] != relations_[b.slot]) {
      return false;
    }
    for (std::size_t i = 0; i < a.children.size(); ++i) {
      if (!same_binding(a.children[i], b.children[i])) return false;
    }
    return true;
  }

  void reject_duplicate_siblings(const std::vector<FolNode>& siblings) const {
    for (std::size_t i = 0; i < siblings.size(); ++i) {
      for (std::size_t j = i + 1; j < siblings.size(); ++j) {
        if (same_binding(siblings[i], siblings[j])) {
          throw Abort{FailureStage::kDuplicateBranch};
        }
      }
    }
  }

  Bindings bindings() const { return {anchors_, relations_}; }

  const KnowledgeGraph& g_;
  Rng& rng_;
  const SamplerOptions& opt_;
  std::vector<EntityId> anchors_;
  std::vector<RelationRef> relations_;
  std::vector<Triple> subgraph_;
};

bool negations_nonempty(const KnowledgeGraph& g, const FolNode& node,
                        const Bindings& b) {
  if (node.kind == NodeKind::kIntersection) {
    bool negated = std::any_of(
        node.children.begin(), node.children.end(),
        [](const FolNode& c) { return c.kind == NodeKind::kNegation; });
    if (negated && evaluate(g, node, b).empty()) return false;
  }
  for (const FolNode& c : node.children) {
    if (c.kind == NodeKind::kNegation) {
      if (!negations_nonempty(g, c.children[0], b)) return false;
    } else if (!negations_nonempty(g, c, b)) {
      return false;
    }
  }
  return true;
}

using SampleKey = std::pair<std::vector<EntityId>, std::vector<RelationRef>>;

const json& field(const json& j, const char* key) {
  auto it = j.find(key);
  if (it == j.end()) {
    throw Error(ErrorCode::kSyntax, std::string("sample missing field '") +
                                        key + "'");
  }
  return *it;
}

EntityId entity_named(const KnowledgeGraph& g, const std::string& name) {
  auto e = g.find_entity(name);
  if (!e) throw Error(ErrorCode::kUnknownId, "unknown entity '" + name + "'");
  return *e;
}

RelationId relation_named(const KnowledgeGraph& g, const std::string& name) {
  auto r = g.find_relation(name);
  if (!r) throw Error(ErrorCode::kUnknownId, "unknown relation '" + name + "'");
  return *r;
}

}  // namespace

std::string_view stage_name(FailureStage stage) {
  switch (stage) {
    case FailureStage::kNoRelation: return "no_relation";
    case FailureStage::kDuplicateBranch: return "duplicate_branch";
    case FailureStage::kNegationPool: return "negation_pool";
    case FailureStage::kNegationGuard: return "negation_guard";
    case FailureStage::kAnswerCap: return "answer_cap";
    case FailureStage::kFinalGuard: return "final_guard";
  }
  return "unknown";
}

bool negations_nonempty(const KnowledgeGraph& g, const FolQuery& q) {
  return negations_nonempty(g, q.root, q.bindings());
}

InstantiationResult instantiate(const KnowledgeGraph& g, PatternTag pattern,
                                Rng& rng, const SamplerOptions& options,
                                std::optional<EntityId> root) {
  if (g.num_entities() == 0) {
    throw Error(ErrorCode::kEmptyGraph, "graph has no entities");
  }
  const PatternInfo& info = pattern_info(pattern);
  EntityId target =
      root ? *root
           : EntityId{static_cast<std::uint32_t>(rng.uniform(g.num_entities()))};
  if (target.value >= g.num_entities()) {
    throw Error(ErrorCode::kUnknownId,
                "unknown entity id " + std::to_string(target.value));
  }
  Instantiator inst(g, rng, options, info.slots);
  try {
    inst.assign(info.shape, target);
  } catch (const Abort& abort) {
    return InstantiationFailure{abort.stage};
  }
  InstantiatedSample s;
  s.query = make_query(pattern, inst.take_anchors(), inst.take_relations());
  s.root = target;
  s.subgraph = inst.take_subgraph();
  AnswerSet answers = evaluate(g, s.query);
  if (!answers.contains(target) || !negations_nonempty(g, s.query)) {
    return InstantiationFailure{FailureStage::kFinalGuard};
  }
  if (answers.size() > options.answer_cap) {
    return InstantiationFailure{FailureStage::kAnswerCap};
  }
  return s;
}

std::vector<InstantiatedSample> sample_batch(const KnowledgeGraph& g,
                                             PatternTag pattern,
                                             const BatchOptions& options,
                                             BatchStats* stats) {
  if (options.n == 0) {
    throw Error(ErrorCode::kContract, "sample count must be positive");
  }
  const std::size_t max_attempts =
      options.max_attempts ? options.max_attempts : 100 * options.n;
  const unsigned workers = std::max(1u, options.workers);
  const std::uint64_t tag = static_cast<std::uint64_t>(pattern);

  BatchStats local;
  std::vector<InstantiatedSample> out;
  out.reserve(options.n);
  std::set<SampleKey> seen;

  std::size_t next = 0;
  while (out.size() < options.n && next < max_attempts) {
    const std::size_t round =
        std::min<std::size_t>(max_attempts - next,
                              std::max<std::size_t>(64, 16 * workers));
    std::vector<std::optional<InstantiationResult>> results(round);
    parallel_for(round, workers, [&](std::size_t i) {
      const std::uint64_t attempt = next + i;
      const std::uint64_t seed = derive_seed(options.seed, {tag, attempt});
      Rng rng(seed);
      InstantiationResult r = instantiate(g, pattern, rng, options.sampler);
      if (auto* s = std::get_if<InstantiatedSample>(&r)) {
        s->seed = seed;
        s->attempt = attempt;
      }
      results[i] = std::move(r);
    });
    for (std::size_t i = 0; i < round && out.size() < options.n; ++i) {
      ++local.attempts;
      InstantiationResult& r = *results[i];
      if (auto* f = std::get_if<InstantiationFailure>(&r)) {
        ++local.failures[static_cast<std::size_t>(f->stage)];
        continue;
      }
      auto& s = std::get<InstantiatedSample>(r);
      if (!seen.insert({s.query.anchors, s.query.relations}).second) {
        ++local.duplicates;
        continue;
      }
      out.push_back(std::move(s));
    }
    next += round;
  }
  local.successes = out.size();
  if (stats) *stats = local;
  if (out.size() < options.n) {
    throw Error(ErrorCode::kShortfall,
                "pattern " + std::string(pattern_name(pattern)) + ": " +
                    std::to_string(local.successes) + " of " +
                    std::to_string(options.n) + " samples after " +
                    std::to_string(local.attempts) + " attempts (" +
                    std::to_string(local.duplicates) + " duplicates)");
  }
  return out;
}

std::string sample_to_line(const KnowledgeGraph& g,
                           const InstantiatedSample& s) {
  json j;
  j["pattern"] = pattern_name(s.query.pattern);
  j["root"] = g.entity_name(s.root);
  json anchors = json::array();
  for (EntityId e : s.query.anchors) anchors.push_back(g.entity_name(e));
  j["anchors"] = std::move(anchors);
  json relations = json::array();
  for (RelationRef r : s.query.relations) {
    relations.push_back(
        {{"name", g.relation_name(r.id)}, {"inverse", r.is_inverse()}});
  }
  j["relations"] = std::move(relations);
  j["fol"] = format_fol(g, s.query);
  json sub = json::array();
  for (const Triple& t : s.subgraph) {
    sub.push_back({g.entity_name(t.head), g.relation_name(t.relation),
                   g.entity_name(t.tail)});
  }
  j["subgraph"] = std::move(sub);
  j["seed"] = s.seed;
  j["attempt"] = s.attempt;
  return j.dump();
}

InstantiatedSample sample_from_line(const KnowledgeGraph& g,
                                    std::string_view line) {
  json j = json::parse(line, nullptr, false);
  if (j.is_discarded() || !j.is_object()) {
    throw Error(ErrorCode::kSyntax, "sample line is not a JSON object");
  }
  try {
    auto tag = pattern_from_name(field(j, "pattern").get<std::string>());
    if (!tag) throw Error(ErrorCode::kUnknownPattern, "unknown pattern");
    std::vector<EntityId> anchors;
    for (const json& a : field(j, "anchors")) {
      anchors.push_back(entity_named(g, a.get<std::string>()));
    }
    std::vector<RelationRef> relations;
    for (const json& r : field(j, "relations")) {
      relations.push_back(
          {relation_named(g, field(r, "name").get<std::string>()),
           field(r, "inverse").get<bool>() ? Direction::kInverse
                                           : Direction::kForward});
    }
    InstantiatedSample s;
    s.query = make_query(*tag, std::move(anchors), std::move(relations));
    s.root = entity_named(g, field(j, "root").get<std::string>());
    for (const json& t : field(j, "subgraph")) {
      s.subgraph.push_back({entity_named(g, t.at(0).get<std::string>()),
                            relation_named(g, t.at(1).get<std::string>()),
                            entity_named(g, t.at(2).get<std::string>())});
    }
    s.seed = field(j, "seed").get<std::uint64_t>();
    s.attempt = field(j, "attempt").get<std::uint64_t>();
    return s;
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kSyntax, std::string("bad sample line: ") + e.what());
  }
}

}  // namespace kgsynth
