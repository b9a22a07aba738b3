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

#include <cstdlib>
#include <fstream>
#include <ostream>

#include "CLI11.hpp"
#include "json.hpp"
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include "kgsynth/error.h"
#include "kgsynth/parallel.h"
#include "kgsynth/pipeline.h"
#include "kgsynth/sampler.h"

namespace kgsynth {
namespace {

namespace fs = std::filesystem;

struct Flags {
  std::string kg, patterns, per_pattern, seed, translator, distractors,
      answer_cap, review_prob, format, out, workers, config;
  std::string dataset;
};

void add_flags(CLI::App* cmd, Flags& f) {
  cmd->add_option("--kg", f.kg, "Triple file (head<TAB>relation<TAB>tail)");
  cmd->add_option("--patterns", f.patterns, "Comma-separated patterns, or 'all'");
  cmd->add_option("--per-pattern", f.per_pattern, "Pairs per pattern");
  cmd->add_option("--seed", f.seed, "Random seed (required for sampling)");
  cmd->add_option("--translator", f.translator, "template or llm");
  cmd->add_option("--distractors", f.distractors, "Unused tools per record");
  cmd->add_option("--answer-cap", f.answer_cap, "Maximum answer-set size");
  cmd->add_option("--review-prob", f.review_prob, "Review probability per step");
  cmd->add_option("--format", f.format, "sharegpt-jsonl or alpaca-jsonl");
  cmd->add_option("--out", f.out, "Output path");
  cmd->add_option("--workers", f.workers, "Worker threads");
  cmd->add_option("--config", f.config, "JSON config file");
}

std::uint64_t number(const std::string& text, const std::string& field) {
  if (text.empty() || text.find_first_not_of("0123456789") != std::string::npos) {
    throw Error(ErrorCode::kInvalidConfig,
                field + ": expected a non-negative integer, got '" + text + "'");
  }
  try {
    return std::stoull(text);
  } catch (const std::exception&) {
    throw Error(ErrorCode::kInvalidConfig, field + ": integer out of range");
  }
}

PipelineConfig build_config(const Flags& f) {
  PipelineConfig c;
  c.llm = LlmConfig::from_env();
  c.workers = default_workers();
  if (!f.config.empty()) apply_config_file(c, f.config);
  // Flags go through the config-file parser so both share validation.
  nlohmann::json overlay = nlohmann::json::object();
  if (!f.kg.empty()) overlay["kg"] = f.kg;
  if (!f.patterns.empty()) overlay["patterns"] = f.patterns;
  if (!f.per_pattern.empty()) overlay["per_pattern"] = number(f.per_pattern, "--per-pattern");
  if (!f.seed.empty()) overlay["seed"] = number(f.seed, "--seed");
  if (!f.translator.empty()) overlay["translator"] = f.translator;
  if (!f.distractors.empty()) overlay["distractors"] = number(f.distractors, "--distractors");
  if (!f.answer_cap.empty()) overlay["answer_cap"] = number(f.answer_cap, "--answer-cap");
  if (!f.review_prob.empty()) {
    try {
      std::size_t used = 0;
      double p = std::stod(f.review_prob, &used);
      if (used != f.review_prob.size()) throw std::invalid_argument("");
      overlay["review_prob"] = p;
    } catch (const std::exception&) {
      throw Error(ErrorCode::kInvalidConfig,
                  "--review-prob: expected a number, got '" + f.review_prob + "'");
    }
  }
  if (!f.format.empty()) overlay["format"] = f.format;
  if (!f.out.empty()) overlay["out"] = f.out;
  if (!f.workers.empty()) overlay["workers"] = number(f.workers, "--workers");
  if (!overlay.empty()) apply_config_text(c, overlay.dump(), "flags");
  return c;
}

void write_or_print(const std::string& out_path,
                    const std::vector<std::string>& lines, std::ostream& out) {
  if (out_path.empty()) {
    for (const std::string& l : lines) out << l << '\n';
  } else {
    write_lines(out_path, lines);
  }
}

int cmd_sample(const PipelineConfig& c, std::ostream& out) {
  validate(c, Command::kSample);
  KnowledgeGraph g = load_graph(c);
  std::vector<std::string> lines;
  for (PatternTag p : c.patterns) {
    for (const InstantiatedSample& s : draw_samples(g, c, p, c.per_pattern)) {
      lines.push_back(sample_to_line(g, s));
    }
  }
  write_or_print(c.out.string(), lines, out);
  return 0;
}

int cmd_gen_apis(const PipelineConfig& c, LlmClient& client, std::ostream& out) {
  validate(c, Command::kGenApis);
  KnowledgeGraph g = load_graph(c);
  ApiRegistry apis = ApiRegistry::build(g, effective_api_mode(c), &client,
                                        api_prompts(c), c.workers);
  write_or_print(c.out.string(), apis.to_lines(g), out);
  spdlog::info("{} APIs, {} name collisions", apis.all().size(), apis.collisions());
  return 0;
}

int cmd_stats(const PipelineConfig& c, const std::string& dataset,
              std::ostream& out) {
  if (!dataset.empty()) {
    std::ifstream in(manifest_path(dataset));
    if (!in) throw Error(ErrorCode::kIo, "cannot read " + manifest_path(dataset).string());
    nlohmann::ordered_json m = nlohmann::ordered_json::parse(in, nullptr, false);
    if (m.is_discarded()) throw Error(ErrorCode::kSyntax, "manifest is not JSON");
    std::size_t lines = read_lines(dataset).size();
    out << "records: " << lines << '\n';
    out << "pairs: " << m["dataset"]["pairs"] << '\n';
    for (const auto& [name, info] : m["patterns"].items()) {
      out << "pattern " << name << ": " << info["pairs"] << " pairs, "
          << info["records"] << " records\n";
    }
    for (const auto& [name, n] : m["kinds"].items()) {
      out << "kind " << name << ": " << n << '\n';
    }
    if (m["dataset"]["records"].get<std::size_t>() != lines) {
      throw Error(ErrorCode::kIntegrity, "record count differs from the manifest");
    }
    return 0;
  }
  validate(c, Command::kStats);
  KnowledgeGraph g = load_graph(c);
  GraphStats s = g.stats();
  out << "entities: " << s.entities << '\n'
      << "relations: " << s.relations << '\n'
      << "triples: " << s.triples << '\n'
      << "max_out_degree: " << s.max_out_degree << '\n';
  return 0;
}

int cmd_verify(const Flags& f, std::ostream& out, std::ostream& err) {
  if (f.dataset.empty()) {
    throw Error(ErrorCode::kInvalidConfig, "dataset: required");
  }
  std::optional<fs::path> kg;
  if (!f.kg.empty()) kg = fs::path(f.kg);
  VerifyResult r = run_verify(f.dataset, kg);
  out << "records: " << r.records << '\n'
      << "samples: " << r.samples << '\n'
      << "step mismatches: " << r.step_mismatches << '\n'
      << "result: " << (r.ok() ? "PASS" : "FAIL") << '\n';
  constexpr std::size_t kShown = 20;
  for (std::size_t i = 0; i < r.problems.size() && i < kShown; ++i) {
    err << "integrity: " << r.problems[i] << '\n';
  }
  if (r.problems.size() > kShown) {
    err << "integrity: " << r.problems.size() - kShown << " more problems\n";
  }
  return r.ok() ? 0 : 2;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out,
            std::ostream& err, LlmClient* client) {
  static const bool logger_ready = [] {
    spdlog::set_default_logger(spdlog::stderr_color_mt("kgsynth"));
    return true;
  }();
  (void)logger_ready;
  if (const char* level = std::getenv("KGSYNTH_LOG_LEVEL")) {
    spdlog::set_level(spdlog::level::from_str(level));
  }
  CLI::App app{"Synthesize tool-use instruction data from a knowledge graph."};
  app.name("kgsynth");
  app.require_subcommand(1);
  Flags f;
  CLI::App* sample = app.add_subcommand("sample", "Dump instantiated query samples");
  CLI::App* gen = app.add_subcommand("gen-apis", "Write the API descriptor table");
  CLI::App* synth = app.add_subcommand("synth", "Build and export an instruction dataset");
  CLI::App* verify = app.add_subcommand("verify", "Replay-audit an exported dataset");
  CLI::App* stats = app.add_subcommand("stats", "Report KG or dataset statistics");
  for (CLI::App* cmd : {sample, gen, synth, verify, stats}) add_flags(cmd, f);
  verify->add_option("dataset", f.dataset, "Exported dataset")->required();
  stats->add_option("dataset", f.dataset, "Exported dataset (optional)");

  std::vector<const char*> argv = {"kgsynth"};
  for (const std::string& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "error[" << code_name(ErrorCode::kInvalidConfig) << "]: " << e.what()
        << '\n';
    return 1;
  }

  try {
    if (verify->parsed()) return cmd_verify(f, out, err);
    PipelineConfig c = build_config(f);
    std::unique_ptr<LlmClient> owned;
    if (client == nullptr) {
      owned = std::make_unique<LlmClient>(c.llm);
      client = owned.get();
    }
    if (sample->parsed()) return cmd_sample(c, out);
    if (gen->parsed()) return cmd_gen_apis(c, *client, out);
    if (stats->parsed()) return cmd_stats(c, f.dataset, out);
    SynthResult r = run_synth(c, *client);
    out << "pairs: " << r.pairs << '\n'
        << "records: " << r.records << '\n'
        << "sha256: " << r.dataset_sha256 << '\n';
    return 0;
  } catch (const Error& e) {
    err << "error[" << code_name(e.code()) << "]: " << e.what() << '\n';
    return is_integrity_failure(e.code()) ? 2 : 1;
  } catch (const std::exception& e) {
    err << "error[" << code_name(ErrorCode::kIo) << "]: " << e.what() << '\n';
    return 1;
  }
}

}  // namespace kgsynth
