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

#include <span>
#include <string_view>

#include "kgsynth/fol.h"

namespace kgsynth {

// A catalogued query shape. Anchor and relation slots are numbered in
// post-order, which is also the order they appear in the text form.
struct PatternInfo {
  PatternTag tag;
  std::string_view name;
  FolNode shape;
  SlotCounts slots;
  // Variable names used by the text form: the free variable, then the
  // existentially bound ones in post-order.
  char answer_var;
  std::string_view bound_vars;
};

std::span<const PatternInfo> pattern_catalog();
const PatternInfo& pattern_info(PatternTag tag);

bool has_negation(const FolNode& node);

}  // namespace kgsynth
