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

#include <string>
#include <string_view>
#include <vector>

#include "kgsynth/fol.h"
#include "kgsynth/kg_store.h"

namespace kgsynth {

// Relation as written in an atom. `inverse` is set when the atom names the
// output variable first, i.e. R(out, in).
struct SymbolicRelation {
  std::string name;
  bool inverse = false;
  bool operator==(const SymbolicRelation&) const = default;
};

// A query whose bindings are names rather than graph handles. The shape is
// implied by the pattern; slots follow the catalogued numbering.
struct SymbolicQuery {
  PatternTag pattern = PatternTag::k1p;
  std::vector<std::string> anchors;
  std::vector<SymbolicRelation> relations;
  bool operator==(const SymbolicQuery&) const = default;
};

// Grammar, with ASCII fallbacks in brackets:
//   query   := "q" "=" "?" var ":" [ ("∃" | "exists") var {"," var} ":" ] formula
//   formula := unary { ("∧" ["&"] | "∨" ["|"]) unary }   (one connective per level)
//   unary   := ("¬" ["!"]) unary | "(" formula ")" | name "(" term "," term ")"
// Terms are variables (declared, or a single lowercase letter) or
// constants; names may be double-quoted with \" and \\ escapes.
// Throws kSyntax with a byte offset, or kUnknownPattern when the formula
// is well formed but matches none of the catalogued shapes.
SymbolicQuery parse_fol(std::string_view text);

// Canonical text form: the pattern's variable names, atoms in post-order,
// constants quoted only when needed to parse back unambiguously.
std::string format_fol(const SymbolicQuery& q);

// Placeholder form of a pattern: relations Rel_1.., anchors A, B, C.
SymbolicQuery placeholder_query(PatternTag pattern);

// Binds raw entity and relation strings of the graph.
SymbolicQuery to_symbolic(const KnowledgeGraph& g, const FolQuery& q);
// Throws kUnknownId for names absent from the graph.
FolQuery resolve(const KnowledgeGraph& g, const SymbolicQuery& q);

inline std::string format_fol(const KnowledgeGraph& g, const FolQuery& q) {
  return format_fol(to_symbolic(g, q));
}

}  // namespace kgsynth
