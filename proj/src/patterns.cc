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

#include "kgsynth/patterns.h"

#include <vector>

namespace kgsynth {
namespace {

using N = FolNode;

N p(N child, int slot) { return N::projection(std::move(child), slot); }
N a(int slot) { return N::anchor(slot); }

std::vector<PatternInfo> build_catalog() {
  std::vector<PatternInfo> out;
  auto add = [&out](PatternTag tag, N shape, char answer,
                    std::string_view bound) {
    SlotCounts slots = validate_structure(shape);
    out.push_back(
        {tag, pattern_name(tag), std::move(shape), slots, answer, bound});
  };
  add(PatternTag::k1p, p(a(0), 0), 'a', "");
  add(PatternTag::k2p, p(p(a(0), 0), 1), 'b', "a");
  add(PatternTag::k3p, p(p(p(a(0), 0), 1), 2), 'c', "ab");
  add(PatternTag::k2i, N::intersection({p(a(0), 0), p(a(1), 1)}), 'c', "");
  add(PatternTag::k3i,
      N::intersection({p(a(0), 0), p(a(1), 1), p(a(2), 2)}), 'e', "");
  add(PatternTag::kPi, N::intersection({p(p(a(0), 0), 1), p(a(1), 2)}), 'd',
      "a");
  add(PatternTag::kIp, p(N::intersection({p(a(0), 0), p(a(1), 1)}), 2), 'd',
      "c");
  add(PatternTag::k2u, N::union_of({p(a(0), 0), p(a(1), 1)}), 'c', "");
  add(PatternTag::kUp, p(N::union_of({p(a(0), 0), p(a(1), 1)}), 2), 'd', "c");
  add(PatternTag::k2in,
      N::intersection({p(a(0), 0), N::negation(p(a(1), 1))}), 'd', "");
  add(PatternTag::k3in,
      N::intersection({p(a(0), 0), p(a(1), 1), N::negation(p(a(2), 2))}), 'f',
      "");
  add(PatternTag::kInp,
      p(N::intersection({p(a(0), 0), N::negation(p(a(1), 1))}), 2), 'e', "d");
  add(PatternTag::kPin,
      N::intersection({p(p(a(0), 0), 1), N::negation(p(a(1), 2))}), 'e', "a");
  add(PatternTag::kPni,
      N::intersection({N::negation(p(p(a(0), 0), 1)), p(a(1), 2)}), 'e', "a");
  return out;
}

}  // namespace

std::span<const PatternInfo> pattern_catalog() {
  static const std::vector<PatternInfo> catalog = build_catalog();
  return catalog;
}

const PatternInfo& pattern_info(PatternTag tag) {
  return pattern_catalog()[static_cast<std::size_t>(tag)];
}

bool has_negation(const FolNode& node) {
  if (node.kind == NodeKind::kNegation) return true;
  for (const FolNode& c : node.children) {
    if (has_negation(c)) return true;
  }
  return false;
}

}  // namespace kgsynth
