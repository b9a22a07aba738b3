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

#include <compare>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <istream>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace kgsynth {

// Dense handle into the entity table, assigned in first-appearance order.
struct EntityId {
  std::uint32_t value = 0;
  auto operator<=>(const EntityId&) const = default;
};

// Dense handle into the relation table. Direction lives in RelationRef.
struct RelationId {
  std::uint32_t value = 0;
  auto operator<=>(const RelationId&) const = default;
};

enum class Direction : std::uint8_t { kForward, kInverse };

// A relation together with the direction it is traversed in. The inverse
// twin of r maps tails back to heads; inverse().inverse() == *this.
struct RelationRef {
  RelationId id;
  Direction direction = Direction::kForward;

  RelationRef inverse() const {
    return {id, direction == Direction::kForward ? Direction::kInverse
                                                 : Direction::kForward};
  }
  bool is_inverse() const { return direction == Direction::kInverse; }

  auto operator<=>(const RelationRef&) const = default;
};

struct Triple {
  EntityId head;
  RelationId relation;
  EntityId tail;
  auto operator<=>(const Triple&) const = default;
};

struct LoadOptions {
  // Skip and count malformed lines instead of aborting.
  bool lenient = false;
  // Optional "key<TAB>label" file giving human-readable entity names.
  std::optional<std::filesystem::path> labels_path;
};

struct LoadReport {
  std::size_t lines = 0;
  std::size_t triples = 0;
  std::size_t duplicates = 0;
  std::size_t skipped = 0;
  std::size_t entities = 0;
  std::size_t relations = 0;
};

struct GraphStats {
  std::size_t entities = 0;
  std::size_t relations = 0;
  std::size_t triples = 0;
  std::size_t max_out_degree = 0;
};

// Immutable triple store with forward (h, r) -> tails and inverse
// (t, r) -> heads indexes. Both indexes are CSR arrays sorted by id, so
// every neighbor list is sorted and iteration order is deterministic.
class KnowledgeGraph {
 public:
  class Builder {
   public:
    void add(std::string_view head, std::string_view relation,
             std::string_view tail);
    void set_label(std::string_view entity, std::string label);
    KnowledgeGraph build() &&;
    std::size_t duplicates() const { return duplicates_; }

   private:
    EntityId intern_entity(std::string_view name);
    RelationId intern_relation(std::string_view name);

    std::vector<std::string> entity_names_;
    std::unordered_map<std::string, EntityId> entity_index_;
    std::vector<std::string> relation_names_;
    std::unordered_map<std::string, RelationId> relation_index_;
    std::vector<Triple> triples_;
    std::unordered_map<std::string, std::string> pending_labels_;
    std::size_t duplicates_ = 0;
  };

  std::size_t num_entities() const { return entity_names_.size(); }
  std::size_t num_relations() const { return relation_names_.size(); }
  std::size_t num_triples() const { return triples_.size(); }

  // Sorted by (head, relation, tail).
  std::span<const Triple> triples() const { return triples_; }

  const std::string& entity_name(EntityId e) const;
  const std::string& relation_name(RelationId r) const;
  // Human-readable label, falling back to the raw entity string.
  const std::string& label(EntityId e) const;
  bool has_labels() const { return has_labels_; }

  std::optional<EntityId> find_entity(std::string_view name) const;
  std::optional<RelationId> find_relation(std::string_view name) const;

  // { t : (e, r, t) } for a forward ref, { h : (h, r, e) } for an inverse
  // ref. Sorted, possibly empty. Throws kUnknownId on invalid handles.
  std::span<const EntityId> out_neighbors(EntityId e, RelationRef r) const;
  std::span<const EntityId> in_neighbors(EntityId e, RelationRef r) const {
    return out_neighbors(e, r.inverse());
  }

  // { r : exists h, (h, r, e) }, sorted.
  std::span<const RelationId> incoming_relations(EntityId e) const;
  // { r : exists t, (e, r, t) }, sorted.
  std::span<const RelationId> outgoing_relations(EntityId e) const;

  bool contains(const Triple& t) const;

  GraphStats stats() const;

 private:
  struct Csr {
    std::vector<std::uint32_t> offsets;  // num_entities + 1
    std::vector<RelationId> relations;
    std::vector<EntityId> targets;
    std::vector<std::uint32_t> summary_offsets;
    std::vector<RelationId> summary;  // distinct relations per entity

    std::span<const EntityId> lookup(EntityId e, RelationId r) const;
    std::span<const RelationId> relations_of(EntityId e) const;
  };

  static Csr build_csr(std::span<const Triple> triples, std::size_t n,
                       bool by_tail);
  void check(EntityId e) const;
  void check(RelationId r) const;

  std::vector<std::string> entity_names_;
  std::unordered_map<std::string, EntityId> entity_index_;
  std::vector<std::string> labels_;
  bool has_labels_ = false;
  std::vector<std::string> relation_names_;
  std::unordered_map<std::string, RelationId> relation_index_;
  std::vector<Triple> triples_;
  Csr forward_;
  Csr inverse_;
};

// Parses head<TAB>relation<TAB>tail lines. Blank lines are ignored; a
// malformed line aborts with its line number unless options.lenient.
KnowledgeGraph parse_triples(std::istream& in, const LoadOptions& options,
                             LoadReport* report = nullptr);

KnowledgeGraph load_triples(const std::filesystem::path& path,
                            const LoadOptions& options = {},
                            LoadReport* report = nullptr);

bool is_valid_utf8(std::string_view text);

}  // namespace kgsynth
