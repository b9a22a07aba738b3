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

#include "kgsynth/instruction.h"

#include <fstream>
#include <set>

#include "json.hpp"

#include "kgsynth/assets.h"
#include "kgsynth/error.h"

namespace kgsynth {
namespace {

using json = nlohmann::ordered_json;

constexpr std::array<std::string_view, kRecordKindCount> kKindNames = {
    "trajectory", "plan", "reason", "retrieve", "understand", "review",
};

constexpr std::string_view kObservation = "Observation: ";
constexpr int kMaxCorruptionDraws = 100;

json string_array(const std::vector<std::string>& items) {
  json out = json::array();
  for (const std::string& s : items) out.push_back(s);
  return out;
}

std::string list_json(const std::vector<std::string>& items) {
  return string_array(items).dump();
}

json args_object(const RenderedStep& step) {
  json args = json::object();
  for (const auto& [name, value] : step.args) args[name] = string_array(value);
  return args;
}

std::string call_json(const RenderedStep& step) {
  json call = {{"name", step.api}, {"arguments", args_object(step)}};
  return call.dump();
}

std::string history(const RenderedPath& path, std::size_t upto) {
  if (upto == 0) return "Completed steps: none\n";
  std::string out = "Completed steps:\n";
  for (std::size_t k = 0; k < upto; ++k) {
    const RenderedStep& s = path.steps[k];
    out += "Step " + std::to_string(k + 1) + ": " + s.goal + "\n";
    out += "Tool call: " + call_json(s) + "\n";
    out += "Tool response: " + list_json(s.response) + "\n";
  }
  return out;
}

std::vector<std::string> corrupt_response(const KnowledgeGraph& g,
                                          const RenderedPath& path,
                                          std::size_t step, Rng& rng) {
  const std::vector<std::string>& truth = path.steps[step].response;
  std::vector<std::vector<std::string>> siblings;
  for (std::size_t k = 0; k < path.steps.size(); ++k) {
    const auto& r = path.steps[k].response;
    if (k != step && r != truth &&
        std::find(siblings.begin(), siblings.end(), r) == siblings.end()) {
      siblings.push_back(r);
    }
  }
  if (!siblings.empty()) return rng.pick(siblings);
  const std::size_t n = g.num_entities();
  const std::size_t size = std::min<std::size_t>(
      {std::max<std::size_t>(1, truth.size()), n, kMaxRenderedEntities});
  for (int draw = 0; draw < kMaxCorruptionDraws; ++draw) {
    std::set<EntityId> picked;
    while (picked.size() < size) {
      picked.insert(EntityId{static_cast<std::uint32_t>(rng.uniform(n))});
    }
    std::vector<EntityId> ids(picked.begin(), picked.end());
    std::vector<std::string> shown =
        render_entities(g, EntitySet::from_sorted(ids));
    if (shown != truth) return shown;
  }
  // Every step response is non-empty, so the empty list always differs.
  return {};
}

InstructionRecord single_turn(const std::string& system, RecordMeta meta,
                              std::string user, std::string label) {
  InstructionRecord r;
  r.turns = {{Role::kSystem, system},
             {Role::kUser, std::move(user)},
             {Role::kAssistant, std::move(label)}};
  r.meta = std::move(meta);
  return r;
}

std::string_view sharegpt_role(Role role) {
  switch (role) {
    case Role::kSystem: return "system";
    case Role::kUser: return "human";
    case Role::kAssistant: return "gpt";
    case Role::kTool: return "observation";
  }
  return "";
}

Role role_from_sharegpt(std::string_view name) {
  if (name == "system") return Role::kSystem;
  if (name == "human") return Role::kUser;
  if (name == "gpt") return Role::kAssistant;
  if (name == "observation") return Role::kTool;
  throw Error(ErrorCode::kSyntax, "unknown role '" + std::string(name) + "'");
}

json meta_json(const RecordMeta& m) {
  return {{"id", m.id},
          {"kind", kind_name(m.kind)},
          {"pattern", pattern_name(m.pattern)},
          {"sample_id", m.sample_id},
          {"step", m.step ? json(*m.step) : json(nullptr)},
          {"fol", m.fol},
          {"translation_mode", mode_name(m.translation)},
          {"translation_flagged", m.translation_flagged}};
}

RecordMeta meta_from_json(const json& j) {
  RecordMeta m;
  m.id = j.at("id").get<std::string>();
  auto kind = kind_from_name(j.at("kind").get<std::string>());
  if (!kind) throw Error(ErrorCode::kSyntax, "unknown record kind");
  m.kind = *kind;
  auto pattern = pattern_from_name(j.at("pattern").get<std::string>());
  if (!pattern) throw Error(ErrorCode::kUnknownPattern, "unknown pattern");
  m.pattern = *pattern;
  m.sample_id = j.at("sample_id").get<std::string>();
  if (!j.at("step").is_null()) m.step = j.at("step").get<std::size_t>();
  m.fol = j.at("fol").get<std::string>();
  m.translation = j.at("translation_mode").get<std::string>() == "llm"
                      ? TranslationMode::kLlm
                      : TranslationMode::kTemplate;
  m.translation_flagged = j.at("translation_flagged").get<bool>();
  return m;
}

std::string transcript(const InstructionRecord& r) {
  std::string out;
  for (std::size_t i = 2; i < r.turns.size(); ++i) {
    if (i > 2) out += '\n';
    if (r.turns[i].role == Role::kTool) out += kObservation;
    out += r.turns[i].text;
  }
  return out;
}

std::vector<Turn> parse_transcript(std::string_view text) {
  std::vector<Turn> turns;
  std::size_t pos = 0;
  std::string pending;
  bool have_pending = false;
  while (pos <= text.size()) {
    std::size_t nl = text.find('\n', pos);
    if (nl == std::string_view::npos) nl = text.size();
    std::string_view line = text.substr(pos, nl - pos);
    if (line.substr(0, kObservation.size()) == kObservation) {
      if (have_pending) turns.push_back({Role::kAssistant, pending});
      pending.clear();
      have_pending = false;
      turns.push_back({Role::kTool, std::string(line.substr(kObservation.size()))});
    } else {
      if (have_pending) pending += '\n';
      pending += line;
      have_pending = true;
    }
    pos = nl + 1;
  }
  if (have_pending) turns.push_back({Role::kAssistant, pending});
  return turns;
}

}  // namespace

std::string_view kind_name(RecordKind kind) {
  return kKindNames[static_cast<std::size_t>(kind)];
}

std::optional<RecordKind> kind_from_name(std::string_view name) {
  for (std::size_t i = 0; i < kKindNames.size(); ++i) {
    if (kKindNames[i] == name) return kAllRecordKinds[i];
  }
  return std::nullopt;
}

std::string InstructionRecord::label() const {
  if (meta.kind == RecordKind::kTrajectory || turns.empty()) return {};
  return turns.back().text;
}

std::string system_prompt_text(std::string_view prompt_template,
                               const Toolset& tools) {
  std::string lines;
  for (std::size_t i = 0; i < tools.size(); ++i) {
    if (i > 0) lines += '\n';
    lines += descriptor_json(*tools[i]);
  }
  return render_template(prompt_template, {{"tools", lines}});
}

std::string default_system_prompt() {
  std::string text(assets::system_prompt);
  while (!text.empty() && text.back() == '\n') text.pop_back();
  return text;
}

std::vector<InstructionRecord> build_records(const KnowledgeGraph& g,
                                             const PairInput& pair,
                                             const Toolset& tools,
                                             const BuildOptions& options,
                                             Rng& rng) {
  if (pair.path == nullptr) {
    throw Error(ErrorCode::kUnverified, "pair has no verified solution path");
  }
  const RenderedPath& path = pair.path->rendered();
  for (const RenderedStep& s : path.steps) {
    bool listed = std::any_of(tools.begin(), tools.end(),
                              [&](const ApiDescriptor* t) { return t->name == s.api; });
    if (!listed) {
      throw Error(ErrorCode::kContract, "toolset lacks API '" + s.api + "'");
    }
  }
  const std::string system = system_prompt_text(options.system_prompt, tools);
  const std::string& q = pair.question.question;

  RecordMeta base;
  base.pattern = pair.path->path().query.pattern;
  base.sample_id = pair.sample_id;
  base.fol = path.fol;
  base.translation = pair.question.mode;
  base.translation_flagged = pair.question.flagged;
  auto meta = [&](RecordKind kind, std::optional<std::size_t> step) {
    RecordMeta m = base;
    m.kind = kind;
    m.step = step;
    m.id = pair.sample_id + "/" + std::string(kind_name(kind));
    if (step) m.id += "/" + std::to_string(*step);
    return m;
  };

  std::vector<InstructionRecord> out;
  InstructionRecord traj;
  traj.meta = meta(RecordKind::kTrajectory, std::nullopt);
  traj.turns.push_back({Role::kSystem, system});
  traj.turns.push_back({Role::kUser, q});
  for (const RenderedStep& s : path.steps) {
    traj.turns.push_back({Role::kAssistant,
                          "Thought: " + s.goal + "\nAction: " + s.api +
                              "\nAction Input: " + args_object(s).dump()});
    traj.turns.push_back({Role::kTool, list_json(s.response)});
  }
  traj.turns.push_back(
      {Role::kAssistant, "Final Answer: " + list_json(path.final_answer)});
  out.push_back(std::move(traj));

  std::string plan;
  for (std::size_t i = 0; i < path.subtasks.size(); ++i) {
    if (i > 0) plan += '\n';
    plan += std::to_string(i + 1) + ". " + path.subtasks[i];
  }
  out.push_back(single_turn(
      system, meta(RecordKind::kPlan, std::nullopt),
      "Question: " + q +
          "\nBreak the question into subtasks that can each be solved with "
          "one tool call. List them in order, one per line.",
      plan));

  std::vector<InstructionRecord> reviews;
  for (std::size_t i = 0; i < path.steps.size(); ++i) {
    const RenderedStep& s = path.steps[i];
    const std::string context = "Question: " + q + "\n" + history(path, i);
    out.push_back(single_turn(system, meta(RecordKind::kReason, i + 1),
                              context + "What is the goal of the next step?",
                              s.goal));
    out.push_back(single_turn(
        system, meta(RecordKind::kRetrieve, i + 1),
        context + "Current step: " + s.goal +
            "\nWhich tool should be called for this step? Answer with the "
            "tool name.",
        s.api));
    out.push_back(single_turn(
        system, meta(RecordKind::kUnderstand, i + 1),
        context + "Current step: " + s.goal + "\nTool: " + s.api +
            "\nWhich arguments should be passed to the tool? Answer with a "
            "JSON object mapping parameter names to entity lists.",
        args_object(s).dump()));
    if (rng.bernoulli(options.review_prob)) {
      bool corrupt = rng.bernoulli(0.5);
      std::vector<std::string> shown =
          corrupt ? corrupt_response(g, path, i, rng) : s.response;
      reviews.push_back(single_turn(
          system, meta(RecordKind::kReview, i + 1),
          "Question: " + q + "\nStep goal: " + s.goal +
              "\nTool call: " + call_json(s) +
              "\nTool response: " + list_json(shown) +
              "\nDoes the tool response solve the step? Answer pass or fail.",
          shown == s.response ? "pass" : "fail"));
    }
  }
  for (InstructionRecord& r : reviews) out.push_back(std::move(r));
  return out;
}

std::string_view format_name(ExportFormat format) {
  return format == ExportFormat::kAlpaca ? "alpaca-jsonl" : "sharegpt-jsonl";
}

std::optional<ExportFormat> format_from_name(std::string_view name) {
  if (name == "sharegpt-jsonl") return ExportFormat::kShareGpt;
  if (name == "alpaca-jsonl") return ExportFormat::kAlpaca;
  return std::nullopt;
}

std::string record_to_line(const InstructionRecord& record,
                           ExportFormat format) {
  if (record.turns.size() < 3 || record.turns[0].role != Role::kSystem ||
      record.turns[1].role != Role::kUser) {
    throw Error(ErrorCode::kUnserializable,
                "record " + record.meta.id +
                    " does not start with system and user turns");
  }
  json j;
  if (format == ExportFormat::kShareGpt) {
    json conv = json::array();
    for (const Turn& t : record.turns) {
      conv.push_back({{"from", sharegpt_role(t.role)}, {"value", t.text}});
    }
    j["conversations"] = std::move(conv);
  } else {
    j["system"] = record.turns[0].text;
    j["instruction"] = record.turns[1].text;
    j["output"] = transcript(record);
  }
  j["meta"] = meta_json(record.meta);
  try {
    return j.dump();
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kUnserializable,
                "record " + record.meta.id + ": " + e.what());
  }
}

InstructionRecord record_from_line(std::string_view line, ExportFormat format) {
  json j = json::parse(line, nullptr, false);
  if (j.is_discarded() || !j.is_object()) {
    throw Error(ErrorCode::kSyntax, "record line is not a JSON object");
  }
  try {
    InstructionRecord r;
    r.meta = meta_from_json(j.at("meta"));
    if (format == ExportFormat::kShareGpt) {
      for (const json& t : j.at("conversations")) {
        r.turns.push_back({role_from_sharegpt(t.at("from").get<std::string>()),
                           t.at("value").get<std::string>()});
      }
    } else {
      r.turns.push_back({Role::kSystem, j.at("system").get<std::string>()});
      r.turns.push_back({Role::kUser, j.at("instruction").get<std::string>()});
      std::string output = j.at("output").get<std::string>();
      if (r.meta.kind == RecordKind::kTrajectory) {
        for (Turn& t : parse_transcript(output)) r.turns.push_back(std::move(t));
      } else {
        r.turns.push_back({Role::kAssistant, std::move(output)});
      }
    }
    return r;
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kSyntax, std::string("bad record: ") + e.what());
  }
}

void write_lines(const std::filesystem::path& path,
                 const std::vector<std::string>& lines) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::kIo, "cannot write " + path.string());
  for (const std::string& line : lines) {
    out.write(line.data(), static_cast<std::streamsize>(line.size()));
    out.put('\n');
  }
  out.flush();
  if (!out) throw Error(ErrorCode::kIo, "write failed for " + path.string());
}

std::vector<std::string> read_lines(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIo, "cannot read " + path.string());
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) lines.push_back(std::move(line));
  return lines;
}

}  // namespace kgsynth
