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

#include "kgsynth/solution_path.h"

#include "json.hpp"

#include "kgsynth/error.h"
#include "kgsynth/fol_text.h"
#include "kgsynth/patterns.h"

namespace kgsynth {
namespace {

using json = nlohmann::ordered_json;

struct Source {
  std::optional<EntityId> entity;
  std::size_t step = 0;
};

std::string describe(const Source& s, const KnowledgeGraph& g) {
  if (s.entity) return g.label(*s.entity);
  return "the result of step " + std::to_string(s.step + 1);
}

// "the results of steps 1, 2 and 3" when every source is a step.
std::string step_list(const std::vector<Source>& sources,
                      const KnowledgeGraph& g) {
  bool all_steps = true;
  for (const Source& s : sources) all_steps = all_steps && !s.entity;
  std::string out = all_steps ? "the results of steps " : "";
  for (std::size_t i = 0; i < sources.size(); ++i) {
    if (i > 0) out += i + 1 == sources.size() ? " and " : ", ";
    out += all_steps ? std::to_string(sources[i].step + 1)
                     : describe(sources[i], g);
  }
  return out;
}

ArgRef arg(std::string param, const Source& s) {
  return {std::move(param), s.entity, s.step};
}

class Planner {
 public:
  Planner(const KnowledgeGraph& g, const FolQuery& q, const ApiRegistry& apis)
      : g_(g), q_(q), apis_(apis) {}

  Source visit(const FolNode& node) {
    switch (node.kind) {
      case NodeKind::kAnchor:
        return {q_.anchors.at(node.slot), 0};
      case NodeKind::kProjection: {
        Source in = visit(node.children[0]);
        const ApiDescriptor& api = apis_.for_relation(q_.relations.at(node.slot));
        return emit("Find the " + api_phrase(api.name) + " for " +
                        describe(in, g_) + ".",
                    api.name, {arg(api.parameters.at(0).name, in)});
      }
      case NodeKind::kUnion: {
        Source a = visit(node.children[0]);
        Source b = visit(node.children[1]);
        return emit("Combine " + step_list({a, b}, g_) + ".",
                    std::string(kUnionApi),
                    {arg("set_a", a), arg("set_b", b)});
      }
      case NodeKind::kIntersection:
        return visit_intersection(node);
      case NodeKind::kNegation:
        break;
    }
    throw Error(ErrorCode::kContract, "negation outside an intersection");
  }

  std::vector<PlannedStep> take() { return std::move(steps_); }

 private:
  Source visit_intersection(const FolNode& node) {
    std::vector<Source> positive;
    std::vector<Source> negated;
    for (const FolNode& c : node.children) {
      if (c.kind == NodeKind::kNegation) {
        negated.push_back(visit(c.children[0]));
      } else {
        positive.push_back(visit(c));
      }
    }
    if (negated.empty()) {
      static const char* kParams[] = {"set_a", "set_b", "set_c"};
      std::vector<ArgRef> args;
      for (std::size_t i = 0; i < positive.size(); ++i) {
        args.push_back(arg(kParams[i], positive[i]));
      }
      return emit("Find the entities common to " + step_list(positive, g_) +
                      ".",
                  std::string(kIntersectionApi), std::move(args));
    }
    if (negated.size() != 1 || positive.size() > 2) {
      throw Error(ErrorCode::kContract,
                  "unsupported intersection with negation");
    }
    std::vector<ArgRef> args = {arg("candidates", positive[0]),
                                arg("exclude", negated[0])};
    std::string from = describe(positive[0], g_);
    if (positive.size() == 2) {
      args.push_back(arg("candidates_b", positive[1]));
      from = "the entities common to " + step_list(positive, g_);
    }
    return emit("Remove the entities in " + describe(negated[0], g_) +
                    " from " + from + ".",
                std::string(kNegationApi), std::move(args));
  }

  Source emit(std::string goal, std::string api, std::vector<ArgRef> args) {
    steps_.push_back({std::move(goal), std::move(api), std::move(args)});
    return {std::nullopt, steps_.size() - 1};
  }

  const KnowledgeGraph& g_;
  const FolQuery& q_;
  const ApiRegistry& apis_;
  std::vector<PlannedStep> steps_;
};

const EntitySet& param(const std::vector<StepArgument>& args,
                       std::string_view name, std::string_view api) {
  for (const StepArgument& a : args) {
    if (a.param == name) return a.value;
  }
  throw Error(ErrorCode::kContract, std::string(api) +
                                        ": missing argument '" +
                                        std::string(name) + "'");
}

json string_array(const std::vector<std::string>& items) {
  json out = json::array();
  for (const std::string& s : items) out.push_back(s);
  return out;
}

std::vector<std::string> strings_of(const json& j) {
  std::vector<std::string> out;
  for (const json& s : j) out.push_back(s.get<std::string>());
  return out;
}

}  // namespace

ExecutionChain plan_chain(const KnowledgeGraph& g, const FolQuery& q,
                          const ApiRegistry& apis) {
  validate_structure(q.root);
  Planner planner(g, q, apis);
  planner.visit(q.root);
  return {q, planner.take()};
}

std::size_t chain_length(PatternTag pattern) {
  std::size_t n = 0;
  auto count = [&n](const FolNode& node, auto&& self) -> void {
    if (node.kind == NodeKind::kProjection ||
        node.kind == NodeKind::kIntersection ||
        node.kind == NodeKind::kUnion) {
      ++n;
    }
    for (const FolNode& c : node.children) self(c, self);
  };
  count(pattern_info(pattern).shape, count);
  return n;
}

EntitySet call_api(const KnowledgeGraph& g, const ApiRegistry& apis,
                   std::string_view api,
                   const std::vector<StepArgument>& args) {
  const ApiDescriptor* d = apis.find(api);
  if (!d) throw Error(ErrorCode::kUnknownApi, "unknown API '" + std::string(api) + "'");
  if (d->relation) {
    if (args.size() != 1) {
      throw Error(ErrorCode::kContract, std::string(api) + " takes one argument");
    }
    return project(g, args[0].value, *d->relation);
  }
  if (api == kIntersectionApi) {
    if (args.size() < 2 || args.size() > 3) {
      throw Error(ErrorCode::kContract, std::string(api) + " takes two or three sets");
    }
    EntitySet acc = intersect(param(args, "set_a", api), param(args, "set_b", api));
    if (args.size() == 3) acc = intersect(acc, param(args, "set_c", api));
    return acc;
  }
  if (api == kUnionApi) {
    if (args.size() != 2) {
      throw Error(ErrorCode::kContract, std::string(api) + " takes two sets");
    }
    return unite(param(args, "set_a", api), param(args, "set_b", api));
  }
  if (api == kNegationApi) {
    if (args.size() < 2 || args.size() > 3) {
      throw Error(ErrorCode::kContract, std::string(api) + " takes two or three sets");
    }
    EntitySet candidates = param(args, "candidates", api);
    if (args.size() == 3) {
      candidates = intersect(candidates, param(args, "candidates_b", api));
    }
    return relative_complement(candidates, param(args, "exclude", api));
  }
  throw Error(ErrorCode::kUnknownApi, "API '" + std::string(api) + "' has no implementation");
}

SolutionPath execute_chain(const KnowledgeGraph& g, const ExecutionChain& chain,
                           const ApiRegistry& apis, std::string question) {
  if (chain.steps.empty()) {
    throw Error(ErrorCode::kContract, "empty execution chain");
  }
  SolutionPath path;
  path.query = chain.query;
  path.question = std::move(question);
  for (std::size_t i = 0; i < chain.steps.size(); ++i) {
    const PlannedStep& plan = chain.steps[i];
    SolutionStep step;
    step.goal = plan.goal;
    step.api = plan.api;
    for (const ArgRef& a : plan.args) {
      if (a.entity) {
        step.args.push_back({a.param, EntitySet{*a.entity}});
      } else if (a.step < i) {
        step.args.push_back({a.param, path.steps[a.step].response});
      } else {
        throw Error(ErrorCode::kContract,
                    "step " + std::to_string(i + 1) +
                        " refers to a later step");
      }
    }
    step.response = call_api(g, apis, step.api, step.args);
    if (step.response.empty()) {
      throw Error(ErrorCode::kIntegrity,
                  "step " + std::to_string(i + 1) + " (" + step.api +
                      ") returned no entities");
    }
    path.subtasks.push_back(step.goal);
    path.steps.push_back(std::move(step));
  }
  path.final_answer = path.steps.back().response;
  if (path.final_answer != evaluate(g, chain.query)) {
    throw Error(ErrorCode::kIntegrity,
                "chain result differs from query evaluation");
  }
  return path;
}

std::vector<std::string> render_entities(const KnowledgeGraph& g,
                                         const EntitySet& set) {
  std::vector<std::string> out;
  const std::size_t shown = std::min(set.size(), kMaxRenderedEntities);
  out.reserve(shown + 1);
  for (std::size_t i = 0; i < shown; ++i) out.push_back(g.label(set.ids()[i]));
  if (set.size() > shown) {
    out.push_back("<truncated: " + std::to_string(set.size() - shown) +
                  " more>");
  }
  return out;
}

RenderedPath render(const KnowledgeGraph& g, const SolutionPath& path) {
  RenderedPath out;
  out.question = path.question;
  out.fol = format_fol(g, path.query);
  out.subtasks = path.subtasks;
  for (const SolutionStep& s : path.steps) {
    RenderedStep r;
    r.goal = s.goal;
    r.api = s.api;
    for (const StepArgument& a : s.args) {
      r.args.emplace_back(a.param, render_entities(g, a.value));
    }
    r.response = render_entities(g, s.response);
    out.steps.push_back(std::move(r));
  }
  out.final_answer = render_entities(g, path.final_answer);
  return out;
}

std::string path_to_json(const RenderedPath& path) {
  json steps = json::array();
  for (const RenderedStep& s : path.steps) {
    json args = json::object();
    for (const auto& [name, value] : s.args) args[name] = string_array(value);
    steps.push_back({{"goal", s.goal},
                     {"api", s.api},
                     {"args", std::move(args)},
                     {"response", string_array(s.response)}});
  }
  json j = {{"query", path.question},
            {"fol", path.fol},
            {"subtasks", string_array(path.subtasks)},
            {"steps", std::move(steps)},
            {"final_answer", string_array(path.final_answer)}};
  return j.dump();
}

RenderedPath path_from_json(std::string_view text) {
  json j = json::parse(text, nullptr, false);
  if (j.is_discarded() || !j.is_object()) {
    throw Error(ErrorCode::kSyntax, "solution path is not a JSON object");
  }
  try {
    RenderedPath p;
    p.question = j.at("query").get<std::string>();
    p.fol = j.at("fol").get<std::string>();
    p.subtasks = strings_of(j.at("subtasks"));
    for (const json& s : j.at("steps")) {
      RenderedStep r;
      r.goal = s.at("goal").get<std::string>();
      r.api = s.at("api").get<std::string>();
      for (const auto& [name, value] : s.at("args").items()) {
        r.args.emplace_back(name, strings_of(value));
      }
      r.response = strings_of(s.at("response"));
      p.steps.push_back(std::move(r));
    }
    p.final_answer = strings_of(j.at("final_answer"));
    return p;
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kSyntax, std::string("bad solution path: ") + e.what());
  }
}

VerificationReport verify_replay(const KnowledgeGraph& g,
                                 const ApiRegistry& apis,
                                 const RenderedPath& path) {
  for (const RenderedStep& s : path.steps) {
    if (!apis.find(s.api)) {
      throw Error(ErrorCode::kUnknownApi, "unknown API '" + s.api + "'");
    }
  }
  VerificationReport report;
  report.steps.resize(path.steps.size());
  std::optional<RenderedPath> expected;
  try {
    FolQuery q = resolve(g, parse_fol(path.fol));
    expected = render(g, execute_chain(g, plan_chain(g, q, apis), apis,
                                       path.question));
  } catch (const Error& e) {
    if (e.code() != ErrorCode::kIntegrity) throw;
  }
  if (!expected) {
    for (StepCheck& c : report.steps) c = {false, false, false, false};
    report.mismatches = report.steps.size();
    if (!report.steps.empty()) report.first_mismatch = 0;
    report.final_answer_matches = false;
    return report;
  }
  report.step_count_matches = expected->steps.size() == path.steps.size();
  for (std::size_t i = 0; i < path.steps.size(); ++i) {
    StepCheck& c = report.steps[i];
    if (i >= expected->steps.size()) {
      c = {false, false, false, false};
    } else {
      const RenderedStep& want = expected->steps[i];
      const RenderedStep& got = path.steps[i];
      c = {want.goal == got.goal, want.api == got.api, want.args == got.args,
           want.response == got.response};
    }
    if (!c.ok()) {
      ++report.mismatches;
      if (!report.first_mismatch) report.first_mismatch = i;
    }
  }
  report.final_answer_matches = expected->final_answer == path.final_answer &&
                                expected->subtasks == path.subtasks;
  return report;
}

VerifiedPath certify(const KnowledgeGraph& g, const ApiRegistry& apis,
                     SolutionPath path) {
  RenderedPath rendered = render(g, path);
  VerificationReport report = verify_replay(g, apis, rendered);
  if (!report.pass() || path.final_answer != evaluate(g, path.query)) {
    throw Error(ErrorCode::kUnverified,
                "solution path failed replay" +
                    (report.first_mismatch
                         ? " at step " + std::to_string(*report.first_mismatch + 1)
                         : std::string()));
  }
  return VerifiedPath(std::move(path), std::move(rendered));
}

}  // namespace kgsynth
