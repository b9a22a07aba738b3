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

#include "kgsynth/kg_store.h"

#include <algorithm>
#include <fstream>

#include "kgsynth/error.h"

namespace kgsynth {

EntityId KnowledgeGraph::Builder::intern_entity(std::string_view name) {
  auto [it, inserted] = entity_index_.try_emplace(
      std::string(name),
      EntityId{static_cast<std::uint32_t>(entity_names_.size())});
  if (inserted) entity_names_.emplace_back(name);
  return it->second;
}

RelationId KnowledgeGraph::Builder::intern_relation(std::string_view name) {
  auto [it, inserted] = relation_index_.try_emplace(
      std::string(name),
      RelationId{static_cast<std::uint32_t>(relation_names_.size())});
  if (inserted) relation_names_.emplace_back(name);
  return it->second;
}

void KnowledgeGraph::Builder::add(std::string_view head,
                                  std::string_view relation,
                                  std::string_view tail) {
  EntityId h = intern_entity(head);
  RelationId r = intern_relation(relation);
  EntityId t = intern_entity(tail);
  triples_.push_back({h, r, t});
}

void KnowledgeGraph::Builder::set_label(std::string_view entity,
                                        std::string label) {
  pending_labels_[std::string(entity)] = std::move(label);
}

KnowledgeGraph KnowledgeGraph::Builder::build() && {
  KnowledgeGraph g;
  std::sort(triples_.begin(), triples_.end());
  auto last = std::unique(triples_.begin(), triples_.end());
  duplicates_ += static_cast<std::size_t>(triples_.end() - last);
  triples_.erase(last, triples_.end());

  g.entity_names_ = std::move(entity_names_);
  g.entity_index_ = std::move(entity_index_);
  g.relation_names_ = std::move(relation_names_);
  g.relation_index_ = std::move(relation_index_);
  g.triples_ = std::move(triples_);

  g.labels_.assign(g.entity_names_.size(), std::string());
  for (auto& [name, label] : pending_labels_) {
    auto it = g.entity_index_.find(name);
    if (it == g.entity_index_.end() || label.empty()) continue;
    g.labels_[it->second.value] = std::move(label);
    g.has_labels_ = true;
  }

  const std::size_t n = g.entity_names_.size();
  g.forward_ = build_csr(g.triples_, n, /*by_tail=*/false);
  g.inverse_ = build_csr(g.triples_, n, /*by_tail=*/true);
  return g;
}

KnowledgeGraph::Csr KnowledgeGraph::build_csr(std::span<const Triple> triples,
                                              std::size_t n, bool by_tail) {
  struct Entry {
    std::uint32_t key;
    std::uint32_t relation;
    std::uint32_t target;
    auto operator<=>(const Entry&) const = default;
  };
  std::vector<Entry> entries;
  entries.reserve(triples.size());
  for (const Triple& t : triples) {
    if (by_tail) {
      entries.push_back({t.tail.value, t.relation.value, t.head.value});
    } else {
      entries.push_back({t.head.value, t.relation.value, t.tail.value});
    }
  }
  std::sort(entries.begin(), entries.end());

  Csr csr;
  csr.offsets.assign(n + 1, 0);
  csr.summary_offsets.assign(n + 1, 0);
  csr.relations.reserve(entries.size());
  csr.targets.reserve(entries.size());
  for (const Entry& e : entries) {
    ++csr.offsets[e.key + 1];
    csr.relations.push_back(RelationId{e.relation});
    csr.targets.push_back(EntityId{e.target});
  }
  for (std::size_t i = 0; i < n; ++i) csr.offsets[i + 1] += csr.offsets[i];

  for (std::size_t e = 0; e < n; ++e) {
    for (std::uint32_t i = csr.offsets[e]; i < csr.offsets[e + 1]; ++i) {
      if (i == csr.offsets[e] || csr.relations[i] != csr.relations[i - 1]) {
        csr.summary.push_back(csr.relations[i]);
      }
    }
    csr.summary_offsets[e + 1] = static_cast<std::uint32_t>(csr.summary.size());
  }
  return csr;
}

std::span<const EntityId> KnowledgeGraph::Csr::lookup(EntityId e,
                                                      RelationId r) const {
  auto begin = relations.begin() + offsets[e.value];
  auto end = relations.begin() + offsets[e.value + 1];
  auto [lo, hi] = std::equal_range(begin, end, r);
  std::span<const EntityId> all(targets);
  return all.subspan(static_cast<std::size_t>(lo - relations.begin()),
                     static_cast<std::size_t>(hi - lo));
}

std::span<const RelationId> KnowledgeGraph::Csr::relations_of(
    EntityId e) const {
  std::span<const RelationId> all(summary);
  return all.subspan(summary_offsets[e.value],
                     summary_offsets[e.value + 1] - summary_offsets[e.value]);
}

void KnowledgeGraph::check(EntityId e) const {
  if (e.value >= entity_names_.size()) {
    throw Error(ErrorCode::kUnknownId,
                "unknown entity id " + std::to_string(e.value));
  }
}

void KnowledgeGraph::check(RelationId r) const {
  if (r.value >= relation_names_.size()) {
    throw Error(ErrorCode::kUnknownId,
                "unknown relation id " + std::to_string(r.value));
  }
}

const std::string& KnowledgeGraph::entity_name(EntityId e) const {
  check(e);
  return entity_names_[e.value];
}

const std::string& KnowledgeGraph::relation_name(RelationId r) const {
  check(r);
  return relation_names_[r.value];
}

const std::string& KnowledgeGraph::label(EntityId e) const {
  check(e);
  const std::string& l = labels_[e.value];
  return l.empty() ? entity_names_[e.value] : l;
}

std::optional<EntityId> KnowledgeGraph::find_entity(
    std::string_view name) const {
  auto it = entity_index_.find(std::string(name));
  if (it == entity_index_.end()) return std::nullopt;
  return it->second;
}

std::optional<RelationId> KnowledgeGraph::find_relation(
    std::string_view name) const {
  auto it = relation_index_.find(std::string(name));
  if (it == relation_index_.end()) return std::nullopt;
  return it->second;
}

std::span<const EntityId> KnowledgeGraph::out_neighbors(EntityId e,
                                                        RelationRef r) const {
  check(e);
  check(r.id);
  return r.is_inverse() ? inverse_.lookup(e, r.id) : forward_.lookup(e, r.id);
}

std::span<const RelationId> KnowledgeGraph::incoming_relations(
    EntityId e) const {
  check(e);
  return inverse_.relations_of(e);
}

std::span<const RelationId> KnowledgeGraph::outgoing_relations(
    EntityId e) const {
  check(e);
  return forward_.relations_of(e);
}

bool KnowledgeGraph::contains(const Triple& t) const {
  return std::binary_search(triples_.begin(), triples_.end(), t);
}

GraphStats KnowledgeGraph::stats() const {
  GraphStats s;
  s.entities = num_entities();
  s.relations = num_relations();
  s.triples = num_triples();
  for (std::size_t e = 0; e < s.entities; ++e) {
    s.max_out_degree = std::max<std::size_t>(
        s.max_out_degree, forward_.offsets[e + 1] - forward_.offsets[e]);
  }
  return s;
}

bool is_valid_utf8(std::string_view text) {
  std::size_t i = 0;
  while (i < text.size()) {
    auto c = static_cast<unsigned char>(text[i]);
    std::size_t extra = 0;
    std::uint32_t cp = 0;
    if (c < 0x80) {
      ++i;
      continue;
    } else if ((c & 0xE0) == 0xC0) {
      extra = 1;
      cp = c & 0x1F;
    } else if ((c & 0xF0) == 0xE0) {
      extra = 2;
      cp = c & 0x0F;
    } else if ((c & 0xF8) == 0xF0) {
      extra = 3;
      cp = c & 0x07;
    } else {
      return false;
    }
    if (i + extra >= text.size()) return false;
    for (std::size_t k = 1; k <= extra; ++k) {
      auto cc = static_cast<unsigned char>(text[i + k]);
      if ((cc & 0xC0) != 0x80) return false;
      cp = (cp << 6) | (cc & 0x3F);
    }
    // Overlong forms, surrogates and out-of-range code points.
    if ((extra == 1 && cp < 0x80) || (extra == 2 && cp < 0x800) ||
        (extra == 3 && cp < 0x10000) || cp > 0x10FFFF ||
        (cp >= 0xD800 && cp <= 0xDFFF)) {
      return false;
    }
    i += extra + 1;
  }
  return true;
}

namespace {

std::vector<std::string_view> split_tabs(std::string_view line) {
  std::vector<std::string_view> fields;
  std::size_t start = 0;
  while (true) {
    std::size_t pos = line.find('\t', start);
    fields.push_back(line.substr(start, pos == std::string_view::npos
                                            ? std::string_view::npos
                                            : pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return fields;
}

std::string_view strip_cr(std::string_view line) {
  if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
  return line;
}

void read_labels(const std::filesystem::path& path,
                 KnowledgeGraph::Builder& builder) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw Error(ErrorCode::kIo, "cannot open label file " + path.string());
  }
  std::string line;
  while (std::getline(in, line)) {
    std::string_view view = strip_cr(line);
    auto tab = view.find('\t');
    if (tab == std::string_view::npos) continue;
    std::string_view key = view.substr(0, tab);
    std::string_view value = view.substr(tab + 1);
    if (key.empty() || value.empty() || !is_valid_utf8(value)) continue;
    builder.set_label(key, std::string(value));
  }
}

}  // namespace

KnowledgeGraph parse_triples(std::istream& in, const LoadOptions& options,
                             LoadReport* report) {
  KnowledgeGraph::Builder builder;
  LoadReport local;
  std::string line;
  std::size_t raw_triples = 0;
  while (std::getline(in, line)) {
    ++local.lines;
    std::string_view view = strip_cr(line);
    if (view.empty()) continue;
    auto fields = split_tabs(view);
    std::string problem;
    if (fields.size() != 3) {
      problem = "expected 3 tab-separated fields, got " +
                std::to_string(fields.size());
    } else if (fields[0].empty() || fields[1].empty() || fields[2].empty()) {
      problem = "empty field";
    } else if (!is_valid_utf8(view)) {
      problem = "invalid UTF-8";
    }
    if (!problem.empty()) {
      if (options.lenient) {
        ++local.skipped;
        continue;
      }
      throw Error(ErrorCode::kMalformedLine,
                  "line " + std::to_string(local.lines) + ": " + problem);
    }
    builder.add(fields[0], fields[1], fields[2]);
    ++raw_triples;
  }
  if (raw_triples == 0) {
    throw Error(ErrorCode::kEmptyGraph, "no triples in input");
  }
  if (options.labels_path) read_labels(*options.labels_path, builder);

  KnowledgeGraph g = std::move(builder).build();
  local.triples = g.num_triples();
  local.duplicates = raw_triples - g.num_triples();
  local.entities = g.num_entities();
  local.relations = g.num_relations();
  if (report) *report = local;
  return g;
}

KnowledgeGraph load_triples(const std::filesystem::path& path,
                            const LoadOptions& options, LoadReport* report) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw Error(ErrorCode::kIo, "cannot open triple file " + path.string());
  }
  return parse_triples(in, options, report);
}

}  // namespace kgsynth
