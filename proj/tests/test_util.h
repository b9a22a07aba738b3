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

#include <unistd.h>

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <string>
#include <unordered_set>
#include <vector>

#include "kgsynth/kg_store.h"
#include "kgsynth/rng.h"

namespace kgsynth::testing {

struct GraphSpec {
  std::size_t entities = 200;
  std::size_t relations = 12;
  std::size_t triples = 900;
  std::size_t types = 6;
  // Zipf exponent over entities within a type; 0 is uniform.
  double skew = 0.8;
  std::uint64_t seed = 1;
  // Give every entity at least one triple before the skewed draws.
  bool cover_all = false;
};

// Relations are typed "/domain/<head type>/<tail type>" and endpoints are
// drawn with a power-law preference, so degrees are uneven like real KGs.
class GraphGenerator {
 public:
  explicit GraphGenerator(const GraphSpec& spec) : spec_(spec), rng_(spec.seed) {
    members_.resize(spec.types);
    for (std::size_t e = 0; e < spec.entities; ++e) {
      members_[e % spec.types].push_back(e);
    }
    for (auto& m : members_) {
      std::vector<double> cdf(m.size());
      double total = 0;
      for (std::size_t i = 0; i < m.size(); ++i) {
        total += 1.0 / std::pow(static_cast<double>(i + 1), spec.skew);
        cdf[i] = total;
      }
      for (double& c : cdf) c /= total;
      cdfs_.push_back(std::move(cdf));
    }
    for (std::size_t r = 0; r < spec.relations; ++r) {
      std::size_t h = rng_.uniform(spec.types);
      std::size_t t = rng_.uniform(spec.types);
      rel_types_.push_back({h, t});
      rel_names_.push_back("/domain" + std::to_string(r % 7) + "/type" +
                           std::to_string(h) + "/rel" + std::to_string(r) +
                           "_type" + std::to_string(t));
    }
  }

  std::vector<std::array<std::string, 3>> rows() {
    std::vector<std::array<std::string, 3>> out;
    std::unordered_set<std::uint64_t> seen;
    const std::size_t cap = spec_.entities * spec_.entities * spec_.relations;
    const std::size_t want = std::min(spec_.triples, cap);
    auto add = [&](std::size_t h, std::size_t r, std::size_t t) {
      std::uint64_t key = (static_cast<std::uint64_t>(h) * spec_.entities + t) *
                              spec_.relations + r;
      if (!seen.insert(key).second) return;
      out.push_back({entity(h), rel_names_[r], entity(t)});
    };
    if (spec_.cover_all) {
      for (std::size_t e = 0; e < spec_.entities && out.size() < want; ++e) {
        const std::size_t type = e % spec_.types;
        std::vector<std::size_t> as_head, as_tail;
        for (std::size_t r = 0; r < spec_.relations; ++r) {
          if (rel_types_[r].first == type) as_head.push_back(r);
          if (rel_types_[r].second == type) as_tail.push_back(r);
        }
        if (!as_head.empty() && (as_tail.empty() || rng_.bernoulli(0.5))) {
          std::size_t r = rng_.pick(as_head);
          add(e, r, draw(rel_types_[r].second));
        } else if (!as_tail.empty()) {
          std::size_t r = rng_.pick(as_tail);
          add(draw(rel_types_[r].first), r, e);
        }
      }
    }
    while (out.size() < want) {
      std::size_t r = rng_.uniform(spec_.relations);
      std::size_t h = draw(rel_types_[r].first);
      std::size_t t = draw(rel_types_[r].second);
      add(h, r, t);
    }
    return out;
  }

  static std::string entity(std::size_t e) { return "/m/e" + std::to_string(e); }

 private:
  std::size_t draw(std::size_t type) {
    const auto& cdf = cdfs_[type];
    double u = rng_.uniform01();
    std::size_t i = std::lower_bound(cdf.begin(), cdf.end(), u) - cdf.begin();
    return members_[type][std::min(i, cdf.size() - 1)];
  }

  GraphSpec spec_;
  Rng rng_;
  std::vector<std::vector<std::size_t>> members_;
  std::vector<std::vector<double>> cdfs_;
  std::vector<std::pair<std::size_t, std::size_t>> rel_types_;
  std::vector<std::string> rel_names_;
};

inline KnowledgeGraph make_graph(const GraphSpec& spec) {
  KnowledgeGraph::Builder b;
  for (const auto& row : GraphGenerator(spec).rows()) b.add(row[0], row[1], row[2]);
  return std::move(b).build();
}

inline void write_graph(const GraphSpec& spec, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  for (const auto& row : GraphGenerator(spec).rows()) {
    out << row[0] << '\t' << row[1] << '\t' << row[2] << '\n';
  }
}

inline KnowledgeGraph graph_from(
    const std::vector<std::array<std::string, 3>>& rows) {
  KnowledgeGraph::Builder b;
  for (const auto& row : rows) b.add(row[0], row[1], row[2]);
  return std::move(b).build();
}

inline EntityId id(const KnowledgeGraph& g, const std::string& name) {
  return *g.find_entity(name);
}

inline RelationRef fwd(const KnowledgeGraph& g, const std::string& name) {
  return {*g.find_relation(name), Direction::kForward};
}

class TempDir {
 public:
  TempDir() {
    static int counter = 0;
    Rng rng(static_cast<std::uint64_t>(::getpid()) << 20 ^
            static_cast<std::uint64_t>(++counter));
    path_ = std::filesystem::temp_directory_path() /
            ("kgsynth-test-" + std::to_string(rng.next()));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const {
    return path_ / name;
  }

 private:
  std::filesystem::path path_;
};

inline std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

}  // namespace kgsynth::testing
