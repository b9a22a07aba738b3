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

#include "kgsynth/pipeline.h"

#include <algorithm>
#include <fstream>
#include <map>
#include <ostream>
#include <sstream>
#include <unordered_map>

#include "json.hpp"
#include <spdlog/spdlog.h>

#include "kgsynth/digest.h"
#include "kgsynth/error.h"
#include "kgsynth/fol_text.h"
#include "kgsynth/parallel.h"
#include "kgsynth/sampler.h"
#include "kgsynth/solution_path.h"

namespace kgsynth {
namespace {

using json = nlohmann::ordered_json;
namespace fs = std::filesystem;

// Sub-stream identifiers under the run seed.
constexpr std::uint64_t kSampleStream = 1;
constexpr std::uint64_t kSelectStream = 2;
constexpr std::uint64_t kBuildStream = 3;
constexpr std::uint64_t kShuffleStream = 4;

[[noreturn]] void invalid(const std::string& field, const std::string& what) {
  throw Error(ErrorCode::kInvalidConfig, field + ": " + what);
}

std::string read_text(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIo, "cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::vector<PatternTag> parse_patterns(const std::vector<std::string>& names,
                                       const std::string& field) {
  std::vector<PatternTag> out;
  for (const std::string& name : names) {
    if (name == "all") {
      for (PatternTag p : kAllPatterns) {
        if (std::find(out.begin(), out.end(), p) == out.end()) out.push_back(p);
      }
      continue;
    }
    auto tag = pattern_from_name(name);
    if (!tag) invalid(field, "unknown pattern '" + name + "'");
    if (std::find(out.begin(), out.end(), *tag) == out.end()) out.push_back(*tag);
  }
  return out;
}

std::vector<std::string> split_commas(const std::string& text) {
  std::vector<std::string> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item.erase(0, item.find_first_not_of(' '));
    item.erase(item.find_last_not_of(' ') + 1);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

TranslationMode parse_translator(const std::string& text,
                                 const std::string& field) {
  if (text == "template") return TranslationMode::kTemplate;
  if (text == "llm") return TranslationMode::kLlm;
  invalid(field, "expected 'template' or 'llm'");
}

ExportFormat parse_format(const std::string& text, const std::string& field) {
  auto f = format_from_name(text);
  if (!f) invalid(field, "expected 'sharegpt-jsonl' or 'alpaca-jsonl'");
  return *f;
}

std::string sample_id(PatternTag p, std::size_t index) {
  return std::string(pattern_name(p)) + "-" + std::to_string(index);
}

std::optional<std::pair<PatternTag, std::size_t>> parse_sample_id(
    std::string_view id) {
  std::size_t dash = id.rfind('-');
  if (dash == std::string_view::npos) return std::nullopt;
  auto tag = pattern_from_name(id.substr(0, dash));
  std::string digits(id.substr(dash + 1));
  if (!tag || digits.empty() ||
      digits.find_first_not_of("0123456789") != std::string::npos) {
    return std::nullopt;
  }
  return std::make_pair(*tag, static_cast<std::size_t>(std::stoull(digits)));
}

struct PairContext {
  const KnowledgeGraph& g;
  const ApiRegistry& apis;
  BuildOptions build;
  std::size_t distractors = 0;
  std::uint64_t seed = 0;
};

std::vector<InstructionRecord> records_for_pair(const PairContext& ctx,
                                                const FolQuery& q,
                                                const NlQuery& question,
                                                std::size_t index) {
  ExecutionChain chain = plan_chain(ctx.g, q, ctx.apis);
  VerifiedPath verified = certify(
      ctx.g, ctx.apis, execute_chain(ctx.g, chain, ctx.apis, question.question));
  Rng rng(derive_seed(ctx.seed, {kBuildStream,
                                 static_cast<std::uint64_t>(q.pattern), index}));
  std::vector<std::string> used;
  for (const SolutionStep& s : verified.path().steps) used.push_back(s.api);
  Toolset tools = build_toolset(used, ctx.apis, ctx.distractors, rng);
  PairInput pair{&verified, question, sample_id(q.pattern, index)};
  return build_records(ctx.g, pair, tools, ctx.build, rng);
}

json effective_config(const PipelineConfig& c) {
  json patterns = json::array();
  for (PatternTag p : c.patterns) patterns.push_back(pattern_name(p));
  return {{"kg", fs::absolute(c.kg).lexically_normal().string()},
          {"labels", c.labels ? json(fs::absolute(*c.labels).lexically_normal().string())
                              : json(nullptr)},
          {"lenient", c.lenient},
          {"patterns", std::move(patterns)},
          {"per_pattern", c.per_pattern},
          {"pool_size", c.pool_size.value_or(c.per_pattern)},
          {"seed", *c.seed},
          {"translator", mode_name(c.translator)},
          {"api_mode", mode_name(effective_api_mode(c))},
          {"distractors", c.distractors},
          {"answer_cap", c.answer_cap},
          {"review_prob", c.review_prob},
          {"format", format_name(c.format)},
          {"max_attempts", c.max_attempts},
          {"use_inverse", c.use_inverse},
          {"llm", {{"base_url", c.llm.base_url}, {"model", c.llm.model}}}};
}

// Splits a trajectory back into the solution path it shows.
RenderedPath path_from_trajectory(const InstructionRecord& r) {
  RenderedPath p;
  if (r.turns.size() < 3) throw Error(ErrorCode::kIntegrity, "trajectory too short");
  p.question = r.turns[1].text;
  p.fol = r.meta.fol;
  constexpr std::string_view kThought = "Thought: ";
  constexpr std::string_view kAction = "\nAction: ";
  constexpr std::string_view kInput = "\nAction Input: ";
  constexpr std::string_view kFinal = "Final Answer: ";
  auto list_of = [](std::string_view text) {
    json j = json::parse(text, nullptr, false);
    if (j.is_discarded() || !j.is_array()) {
      throw Error(ErrorCode::kIntegrity, "tool response is not a JSON list");
    }
    std::vector<std::string> out;
    for (const json& s : j) {
      if (!s.is_string()) throw Error(ErrorCode::kIntegrity, "non-string entity");
      out.push_back(s.get<std::string>());
    }
    return out;
  };
  std::size_t i = 2;
  for (; i + 1 < r.turns.size(); i += 2) {
    const Turn& a = r.turns[i];
    const Turn& t = r.turns[i + 1];
    if (a.role != Role::kAssistant || t.role != Role::kTool) {
      throw Error(ErrorCode::kIntegrity, "unexpected turn order in trajectory");
    }
    std::string_view text = a.text;
    std::size_t act = text.find(kAction);
    std::size_t in = text.find(kInput);
    if (text.substr(0, kThought.size()) != kThought ||
        act == std::string_view::npos || in == std::string_view::npos || in < act) {
      throw Error(ErrorCode::kIntegrity, "malformed assistant action");
    }
    RenderedStep step;
    step.goal = std::string(text.substr(kThought.size(), act - kThought.size()));
    step.api = std::string(text.substr(act + kAction.size(), in - act - kAction.size()));
    json args = json::parse(text.substr(in + kInput.size()), nullptr, false);
    if (args.is_discarded() || !args.is_object()) {
      throw Error(ErrorCode::kIntegrity, "action input is not a JSON object");
    }
    for (const auto& [name, value] : args.items()) {
      step.args.emplace_back(name, list_of(value.dump()));
    }
    step.response = list_of(t.text);
    p.subtasks.push_back(step.goal);
    p.steps.push_back(std::move(step));
  }
  if (i + 1 != r.turns.size() || r.turns[i].role != Role::kAssistant ||
      std::string_view(r.turns[i].text).substr(0, kFinal.size()) != kFinal) {
    throw Error(ErrorCode::kIntegrity, "trajectory lacks a final answer");
  }
  p.final_answer = list_of(std::string_view(r.turns[i].text).substr(kFinal.size()));
  return p;
}

json read_json_file(const fs::path& path) {
  json j = json::parse(read_text(path), nullptr, false);
  if (j.is_discarded() || !j.is_object()) {
    throw Error(ErrorCode::kSyntax, path.string() + " is not a JSON object");
  }
  return j;
}

}  // namespace

KnowledgeGraph load_graph(const PipelineConfig& c) {
  LoadOptions opts;
  opts.lenient = c.lenient;
  opts.labels_path = c.labels;
  LoadReport report;
  KnowledgeGraph g = load_triples(c.kg, opts, &report);
  spdlog::info("loaded {}: {} entities, {} relations, {} triples ({} duplicate, {} skipped lines)",
               c.kg.string(), report.entities, report.relations,
               report.triples, report.duplicates, report.skipped);
  return g;
}

LlmApiPrompts api_prompts(const PipelineConfig& c) {
  LlmApiPrompts p = default_api_prompts();
  if (c.api_forward_prompt) p.forward = read_text(*c.api_forward_prompt);
  if (c.api_inverse_prompt) p.inverse = read_text(*c.api_inverse_prompt);
  return p;
}

ApiMode effective_api_mode(const PipelineConfig& c) {
  if (c.api_mode) return *c.api_mode;
  return c.translator == TranslationMode::kLlm ? ApiMode::kLlm
                                               : ApiMode::kTemplate;
}

std::vector<InstantiatedSample> draw_samples(const KnowledgeGraph& g,
                                             const PipelineConfig& c,
                                             PatternTag p, std::size_t n) {
  BatchOptions opts;
  opts.n = n;
  opts.seed = derive_seed(*c.seed, {kSampleStream});
  opts.max_attempts = c.max_attempts;
  opts.workers = c.workers;
  opts.sampler.answer_cap = c.answer_cap;
  opts.sampler.use_inverse = c.use_inverse;
  BatchStats stats;
  auto samples = sample_batch(g, p, opts, &stats);
  spdlog::info("pattern {}: {} samples after {} attempts ({} duplicates)",
               pattern_name(p), stats.successes, stats.attempts,
               stats.duplicates);
  return samples;
}

fs::path manifest_path(const fs::path& dataset) {
  return fs::path(dataset.string() + ".manifest.json");
}

fs::path apis_path(const fs::path& dataset) {
  return fs::path(dataset.string() + ".apis.jsonl");
}

void apply_config_file(PipelineConfig& c, const fs::path& path) {
  apply_config_text(c, read_text(path), path.string());
}

void apply_config_text(PipelineConfig& c, std::string_view text,
                       std::string_view source) {
  json j = json::parse(text, nullptr, false);
  if (j.is_discarded() || !j.is_object()) {
    invalid("config", std::string(source) + " is not a JSON object");
  }
  auto str = [&](const char* key) -> std::optional<std::string> {
    if (!j.contains(key)) return std::nullopt;
    if (!j[key].is_string()) invalid(key, "expected a string");
    return j[key].get<std::string>();
  };
  auto uint = [&](const json& obj, const char* key) -> std::optional<std::uint64_t> {
    if (!obj.contains(key)) return std::nullopt;
    if (!obj[key].is_number_unsigned()) invalid(key, "expected a non-negative integer");
    return obj[key].get<std::uint64_t>();
  };
  auto boolean = [&](const char* key) -> std::optional<bool> {
    if (!j.contains(key)) return std::nullopt;
    if (!j[key].is_boolean()) invalid(key, "expected true or false");
    return j[key].get<bool>();
  };
  if (auto v = str("kg")) c.kg = *v;
  if (auto v = str("labels")) c.labels = fs::path(*v);
  if (auto v = boolean("lenient")) c.lenient = *v;
  if (j.contains("patterns")) {
    const json& p = j["patterns"];
    if (p.is_string()) {
      c.patterns = parse_patterns(split_commas(p.get<std::string>()), "patterns");
    } else if (p.is_array()) {
      std::vector<std::string> names;
      for (const json& n : p) {
        if (!n.is_string()) invalid("patterns", "expected pattern names");
        names.push_back(n.get<std::string>());
      }
      c.patterns = parse_patterns(names, "patterns");
    } else {
      invalid("patterns", "expected a list or a comma-separated string");
    }
  }
  if (auto v = uint(j, "per_pattern")) c.per_pattern = *v;
  if (auto v = uint(j, "pool_size")) c.pool_size = *v;
  if (auto v = uint(j, "seed")) c.seed = *v;
  if (auto v = str("translator")) c.translator = parse_translator(*v, "translator");
  if (auto v = str("api_mode")) {
    c.api_mode = parse_translator(*v, "api_mode") == TranslationMode::kLlm
                     ? ApiMode::kLlm
                     : ApiMode::kTemplate;
  }
  if (auto v = uint(j, "distractors")) c.distractors = *v;
  if (auto v = uint(j, "answer_cap")) c.answer_cap = *v;
  if (j.contains("review_prob")) {
    if (!j["review_prob"].is_number()) invalid("review_prob", "expected a number");
    c.review_prob = j["review_prob"].get<double>();
  }
  if (auto v = str("format")) c.format = parse_format(*v, "format");
  if (auto v = str("out")) c.out = *v;
  if (auto v = uint(j, "workers")) c.workers = static_cast<unsigned>(*v);
  if (auto v = uint(j, "max_attempts")) c.max_attempts = *v;
  if (auto v = boolean("use_inverse")) c.use_inverse = *v;
  if (j.contains("llm")) {
    const json& l = j["llm"];
    if (!l.is_object()) invalid("llm", "expected an object");
    auto lstr = [&](const char* key, std::string& dst) {
      if (!l.contains(key)) return;
      if (!l[key].is_string()) invalid(std::string("llm.") + key, "expected a string");
      dst = l[key].get<std::string>();
    };
    lstr("base_url", c.llm.base_url);
    lstr("model", c.llm.model);
    lstr("api_key", c.llm.api_key);
    if (auto v = uint(l, "timeout_ms")) c.llm.timeout = std::chrono::milliseconds(*v);
    if (auto v = uint(l, "backoff_ms")) c.llm.backoff = std::chrono::milliseconds(*v);
    if (auto v = uint(l, "max_attempts")) c.llm.max_attempts = static_cast<int>(*v);
    if (auto v = uint(l, "max_concurrent")) c.llm.max_concurrent = static_cast<int>(*v);
    if (auto v = uint(l, "requests_per_minute")) {
      c.llm.requests_per_minute = static_cast<int>(*v);
    }
  }
  if (j.contains("prompts")) {
    const json& p = j["prompts"];
    if (!p.is_object()) invalid("prompts", "expected an object");
    auto ppath = [&](const char* key, std::optional<fs::path>& dst) {
      if (!p.contains(key)) return;
      if (!p[key].is_string()) invalid(std::string("prompts.") + key, "expected a path");
      dst = fs::path(p[key].get<std::string>());
    };
    ppath("system", c.system_prompt);
    ppath("translate", c.translate_prompt);
    ppath("api_forward", c.api_forward_prompt);
    ppath("api_inverse", c.api_inverse_prompt);
  }
}

void validate(const PipelineConfig& c, Command command) {
  if (command == Command::kVerify) return;
  if (c.kg.empty()) invalid("kg", "required");
  if (command == Command::kStats || command == Command::kGenApis) return;
  if (!c.seed) invalid("seed", "required");
  if (c.patterns.empty()) invalid("patterns", "at least one pattern required");
  if (c.per_pattern == 0) invalid("per_pattern", "must be at least 1");
  if (c.answer_cap == 0) invalid("answer_cap", "must be at least 1");
  if (c.workers == 0) invalid("workers", "must be at least 1");
  if (command == Command::kSample) return;
  if (c.out.empty()) invalid("out", "required");
  if (!(c.review_prob >= 0.0 && c.review_prob <= 1.0)) {
    invalid("review_prob", "must lie in [0, 1]");
  }
  if (c.pool_size && *c.pool_size < c.per_pattern) {
    invalid("pool_size", "must be at least per_pattern");
  }
}

SynthResult run_synth(const PipelineConfig& c, LlmClient& client) {
  validate(c, Command::kSynth);
  const std::uint64_t seed = *c.seed;
  KnowledgeGraph g = load_graph(c);
  ApiRegistry apis = ApiRegistry::build(g, effective_api_mode(c), &client,
                                        api_prompts(c), c.workers);
  spdlog::info("derived {} APIs ({} name collisions)", apis.all().size(),
               apis.collisions());

  struct Pair {
    PatternTag pattern;
    std::size_t index;
    FolQuery query;
    std::vector<std::string> lines;
    std::array<std::size_t, kRecordKindCount> kinds{};
    NlQuery question;
  };
  std::vector<Pair> pairs;
  for (PatternTag p : c.patterns) {
    const std::size_t pool_n = c.pool_size.value_or(c.per_pattern);
    std::vector<InstantiatedSample> pool = draw_samples(g, c, p, pool_n);
    std::vector<std::size_t> order(pool.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    if (pool.size() > c.per_pattern) {
      Rng rng(derive_seed(seed, {kSelectStream, static_cast<std::uint64_t>(p)}));
      rng.shuffle(order);
      order.resize(c.per_pattern);
    }
    for (std::size_t i = 0; i < order.size(); ++i) {
      pairs.push_back({p, i, std::move(pool[order[i]].query), {}, {}, {}});
    }
  }

  const std::string translate_prompt =
      c.translate_prompt ? read_text(*c.translate_prompt)
                         : default_translation_prompt();
  PairContext ctx{g, apis, {}, c.distractors, seed};
  ctx.build.review_prob = c.review_prob;
  ctx.build.system_prompt =
      c.system_prompt ? read_text(*c.system_prompt) : default_system_prompt();

  parallel_for(pairs.size(), c.workers, [&](std::size_t i) {
    Pair& pair = pairs[i];
    TranslationRequest req = make_request(g, pair.query, apis);
    pair.question = c.translator == TranslationMode::kLlm
                        ? translate_llm(req, client, translate_prompt)
                        : translate_template(req);
    for (const InstructionRecord& r :
         records_for_pair(ctx, pair.query, pair.question, pair.index)) {
      ++pair.kinds[static_cast<std::size_t>(r.kind())];
      pair.lines.push_back(record_to_line(r, c.format));
    }
  });

  json patterns = json::object();
  std::array<std::size_t, kRecordKindCount> kinds{};
  std::size_t llm_questions = 0;
  std::size_t flagged_questions = 0;
  std::vector<std::string> lines;
  for (PatternTag p : c.patterns) {
    std::size_t n = 0, records = 0, reviews = 0;
    for (const Pair& pair : pairs) {
      if (pair.pattern != p) continue;
      ++n;
      records += pair.lines.size();
      reviews += pair.kinds[static_cast<std::size_t>(RecordKind::kReview)];
    }
    patterns[std::string(pattern_name(p))] = {{"pairs", n},
                                              {"steps_per_pair", chain_length(p)},
                                              {"records", records},
                                              {"reviews", reviews}};
  }
  for (Pair& pair : pairs) {
    for (std::size_t k = 0; k < kRecordKindCount; ++k) kinds[k] += pair.kinds[k];
    if (pair.question.mode == TranslationMode::kLlm) ++llm_questions;
    if (pair.question.flagged) ++flagged_questions;
    for (std::string& line : pair.lines) lines.push_back(std::move(line));
    pair.lines.clear();
    pair.lines.shrink_to_fit();
  }
  Rng shuffle(derive_seed(seed, {kShuffleStream}));
  shuffle.shuffle(lines);

  if (c.out.has_parent_path()) fs::create_directories(c.out.parent_path());
  write_lines(c.out, lines);
  write_lines(apis_path(c.out), apis.to_lines(g));

  SynthResult result;
  result.pairs = pairs.size();
  result.records = lines.size();
  result.dataset_sha256 = sha256_file(c.out);

  json kind_counts = json::object();
  for (RecordKind k : kAllRecordKinds) {
    kind_counts[std::string(kind_name(k))] = kinds[static_cast<std::size_t>(k)];
  }
  std::size_t flagged_apis = 0;
  for (const ApiDescriptor& a : apis.all()) flagged_apis += a.flagged ? 1 : 0;
  GraphStats stats = g.stats();
  json manifest = {
      {"generator", kGeneratorVersion},
      {"seed", seed},
      {"config", effective_config(c)},
      {"kg",
       {{"path", fs::absolute(c.kg).lexically_normal().string()},
        {"sha256", sha256_file(c.kg)},
        {"entities", stats.entities},
        {"relations", stats.relations},
        {"triples", stats.triples}}},
      {"format", format_name(c.format)},
      {"dataset",
       {{"file", c.out.filename().string()},
        {"sha256", result.dataset_sha256},
        {"pairs", result.pairs},
        {"records", result.records}}},
      {"apis",
       {{"file", apis_path(c.out).filename().string()},
        {"sha256", sha256_file(apis_path(c.out))},
        {"count", apis.all().size()},
        {"collisions", apis.collisions()},
        {"flagged", flagged_apis}}},
      {"system_prompt", ctx.build.system_prompt},
      {"patterns", std::move(patterns)},
      {"kinds", std::move(kind_counts)},
      {"translation",
       {{"llm", llm_questions},
        {"template", pairs.size() - llm_questions},
        {"flagged", flagged_questions}}},
      {"llm_requests", client.requests()},
  };
  std::ofstream m(manifest_path(c.out), std::ios::binary | std::ios::trunc);
  m << manifest.dump(2) << '\n';
  if (!m) throw Error(ErrorCode::kIo, "cannot write manifest");
  spdlog::info("wrote {} records for {} pairs to {}", result.records,
               result.pairs, c.out.string());
  return result;
}

VerifyResult run_verify(const fs::path& dataset,
                        const std::optional<fs::path>& kg_override) {
  VerifyResult result;
  const json manifest = read_json_file(manifest_path(dataset));
  const json& cfg = manifest.at("config");

  PipelineConfig c;
  c.kg = kg_override ? *kg_override : fs::path(manifest.at("kg").at("path").get<std::string>());
  if (!cfg.at("labels").is_null()) c.labels = fs::path(cfg.at("labels").get<std::string>());
  c.lenient = cfg.at("lenient").get<bool>();
  auto format = format_from_name(manifest.at("format").get<std::string>());
  if (!format) throw Error(ErrorCode::kSyntax, "manifest has an unknown format");

  if (sha256_file(c.kg) != manifest.at("kg").at("sha256").get<std::string>()) {
    result.problems.push_back("knowledge graph digest differs from the manifest");
    return result;
  }
  KnowledgeGraph g = load_graph(c);
  const fs::path api_file = apis_path(dataset);
  if (sha256_file(api_file) != manifest.at("apis").at("sha256").get<std::string>()) {
    result.problems.push_back("API table digest differs from the manifest");
    return result;
  }
  std::vector<std::string> api_lines = read_lines(api_file);
  ApiRegistry apis = ApiRegistry::from_lines(g, api_lines);

  PairContext ctx{g, apis, {}, cfg.at("distractors").get<std::size_t>(),
                  manifest.at("seed").get<std::uint64_t>()};
  ctx.build.review_prob = cfg.at("review_prob").get<double>();
  ctx.build.system_prompt = manifest.at("system_prompt").get<std::string>();

  std::vector<std::string> lines = read_lines(dataset);
  result.records = lines.size();

  struct Group {
    std::vector<std::size_t> lines;  // 0-based line indexes
    std::map<std::string, std::size_t> by_id;
    std::optional<std::size_t> trajectory;
  };
  std::vector<std::string> order;
  std::unordered_map<std::string, Group> groups;
  std::vector<InstructionRecord> records(lines.size());
  auto where = [&](std::size_t line, const std::string& id) {
    return "line " + std::to_string(line + 1) + (id.empty() ? "" : " (" + id + ")");
  };
  std::map<std::string, std::size_t> kind_counts;
  std::map<std::string, std::size_t> pattern_records;
  for (std::size_t i = 0; i < lines.size(); ++i) {
    try {
      records[i] = record_from_line(lines[i], *format);
    } catch (const Error& e) {
      result.problems.push_back(where(i, "") + ": " + e.what());
      continue;
    }
    const RecordMeta& m = records[i].meta;
    ++kind_counts[std::string(kind_name(m.kind))];
    ++pattern_records[std::string(pattern_name(m.pattern))];
    if (!groups.count(m.sample_id)) order.push_back(m.sample_id);
    Group& grp = groups[m.sample_id];
    grp.lines.push_back(i);
    if (!grp.by_id.emplace(m.id, i).second) {
      result.problems.push_back(where(i, m.id) + ": duplicate record id");
    }
    if (m.kind == RecordKind::kTrajectory) grp.trajectory = i;
  }
  result.samples = order.size();

  for (const std::string& sid : order) {
    const Group& grp = groups[sid];
    if (!grp.trajectory) {
      result.problems.push_back(where(grp.lines.front(), sid) +
                                ": sample has no trajectory record");
      continue;
    }
    const std::size_t tline = *grp.trajectory;
    const InstructionRecord& traj = records[tline];
    try {
      auto parsed_id = parse_sample_id(sid);
      if (!parsed_id || parsed_id->first != traj.meta.pattern) {
        throw Error(ErrorCode::kIntegrity, "malformed sample id");
      }
      RenderedPath shown = path_from_trajectory(traj);
      VerificationReport report = verify_replay(g, apis, shown);
      result.step_mismatches += report.mismatches;
      if (!report.pass()) {
        std::string what = report.first_mismatch
                               ? "step " + std::to_string(*report.first_mismatch + 1) +
                                     " does not match replay"
                               : "final answer or step count does not match replay";
        result.problems.push_back(where(tline, traj.meta.id) + ": " + what);
        continue;
      }
      FolQuery q = resolve(g, parse_fol(traj.meta.fol));
      if (q.pattern != traj.meta.pattern) {
        throw Error(ErrorCode::kIntegrity, "pattern tag disagrees with the FOL form");
      }
      NlQuery question{shown.question, traj.meta.translation,
                       traj.meta.translation_flagged};
      std::vector<InstructionRecord> expected =
          records_for_pair(ctx, q, question, parsed_id->second);
      std::map<std::string, bool> seen;
      for (const InstructionRecord& want : expected) {
        auto it = grp.by_id.find(want.meta.id);
        if (it == grp.by_id.end()) {
          result.problems.push_back(where(tline, want.meta.id) + ": record missing");
          continue;
        }
        seen[want.meta.id] = true;
        if (record_to_line(want, *format) != lines[it->second]) {
          result.problems.push_back(where(it->second, want.meta.id) +
                                    ": record differs from regeneration");
        }
      }
      for (const auto& [id, line] : grp.by_id) {
        if (!seen.count(id)) {
          result.problems.push_back(where(line, id) + ": unexpected record");
        }
      }
    } catch (const Error& e) {
      result.problems.push_back(where(tline, traj.meta.id) + ": " +
                                std::string(code_name(e.code())) + ": " + e.what());
    }
  }

  const json& ds = manifest.at("dataset");
  if (ds.at("records").get<std::size_t>() != lines.size()) {
    result.problems.push_back("record count differs from the manifest");
  }
  if (ds.at("pairs").get<std::size_t>() != result.samples) {
    result.problems.push_back("pair count differs from the manifest");
  }
  for (const auto& [kind, n] : manifest.at("kinds").items()) {
    if (kind_counts[kind] != n.get<std::size_t>()) {
      result.problems.push_back("count of " + kind + " records differs from the manifest");
    }
  }
  for (const auto& [pattern, info] : manifest.at("patterns").items()) {
    if (pattern_records[pattern] != info.at("records").get<std::size_t>()) {
      result.problems.push_back("record count of pattern " + pattern +
                                " differs from the manifest");
    }
  }
  if (sha256_file(dataset) != ds.at("sha256").get<std::string>()) {
    result.problems.push_back("dataset digest differs from the manifest");
  }
  return result;
}

}  // namespace kgsynth
