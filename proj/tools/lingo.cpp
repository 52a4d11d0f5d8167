// Copyright 2026 The Lingo Authors
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

// lingo: dataset generation, learning runs, evaluation and reports.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "lingo/domain.hpp"
#include "lingo/harness.hpp"

namespace fs = std::filesystem;
using namespace lingo;

namespace {

std::string read_file(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const fs::path& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << text;
}

struct Splits {
  std::vector<Task> train, test;
};

Splits load_splits(const std::string& path, const Domain& domain) {
  Splits s;
  for (auto& t : load_dataset(path, domain)) (t.split == Split::kTrain ? s.train : s.test).push_back(std::move(t));
  return s;
}

// Every RunConfig field as a flag; values left unset keep `c`.
void add_config_flags(CLI::App* app, RunConfig& c, std::string& mode) {
  app->add_option("--domain", c.domain, "strings or graphics");
  app->add_option("--iterations", c.iterations, "learning iterations (<0: domain default)");
  app->add_option("--batch-size", c.batch_size, "training tasks searched per iteration");
  app->add_option("--search-budget", c.search_budget, "expansions per task");
  app->add_option("--beam-width", c.beam_width, "programs kept per frontier");
  app->add_option("--structure-penalty", c.compression.structure_penalty);
  app->add_option("--pseudocounts", c.compression.pseudocounts);
  app->add_option("--max-new-abstractions", c.compression.max_new_abstractions);
  app->add_option("--max-arity", c.compression.max_arity);
  app->add_option("--refactoring-depth", c.compression.refactoring_depth);
  app->add_option("--translation-weight", c.compression.translation_weight);
  app->add_option("--candidates-to-score", c.compression.candidates_to_score);
  app->add_option("--em-iterations", c.translation.em_iterations);
  app->add_option("--me-alpha", c.translation.me_alpha);
  app->add_option("--lm-smoothing", c.translation.lm_smoothing);
  app->add_option("--lm-weight", c.translation.lm_weight);
  app->add_option("--decode-beam", c.translation.beam_width);
  app->add_option("--words-per-token", c.translation.words_per_token);
  app->add_option("--embedding", c.recognition.embedding);
  app->add_option("--hidden", c.recognition.hidden);
  app->add_option("--hash-buckets", c.recognition.hash_buckets);
  app->add_option("--learning-rate", c.recognition.learning_rate);
  app->add_option("--recognition-steps", c.recognition.steps);
  app->add_option("--language-dropout", c.recognition.language_dropout);
  app->add_option("--joint-samples", c.joint_samples, "joint samples per iteration");
  app->add_option("--mode", mode, "baseline-no-language | multimodal-no-generative | laps | laps+me | laps+me+compression");
  app->add_option("--language-at-test", c.language_at_test);
  app->add_option("--curriculum", c.curriculum);
  app->add_option("--eval-interval", c.eval_interval);
  app->add_option("--seed", c.seed);
  app->add_option("--workers", c.workers, "0: LINGO_WORKERS or all cores");
}

int cmd_generate(const std::string& domain_name, int train, int test, std::uint64_t seed, const std::string& out) {
  auto domain = make_domain(domain_name);
  auto tasks = domain->generate(train + test, seed);
  for (std::size_t i = static_cast<std::size_t>(train); i < tasks.size(); ++i) tasks[i].split = Split::kTest;
  if (fs::path(out).has_parent_path()) fs::create_directories(fs::path(out).parent_path());
  save_dataset(out, tasks, *domain);
  fmt::print("wrote {} train and {} test {} tasks to {}\n", train, test, domain_name, out);
  return 0;
}

int cmd_run(RunConfig config, const std::string& mode, const std::string& data, const std::string& run_dir,
            bool resume) {
  if (!mode.empty()) config.mode = parse_mode(mode);
  config.validate();
  auto domain = make_domain(config.domain);
  Splits s = load_splits(data, *domain);

  fs::create_directories(run_dir);
  fs::path dir(run_dir);
  std::optional<Checkpoint> start;
  if (resume && fs::exists(dir / "checkpoint.json")) {
    nlohmann::json saved = nlohmann::json::parse(read_file(dir / "config.json"));
    nlohmann::json now = config.to_json();
    for (const char* free : {"iterations", "workers"}) {
      saved.erase(free);
      now.erase(free);
    }
    if (saved != now) {
      std::string keys;
      for (const auto& [k, v] : now.items())
        if (!saved.contains(k) || saved[k] != v) keys += " " + k;
      throw std::invalid_argument("resumed settings differ from the run's config.json:" + keys);
    }
    start = Checkpoint::load((dir / "checkpoint.json").string());
  }
  write_file(dir / "config.json", config.to_json().dump(2) + "\n");

  Runner runner(config, *domain, s.train, s.test);
  std::ofstream log(dir / "run.log", resume ? std::ios::app : std::ios::trunc);
  runner.set_log([&](const std::string& text) {
    log << text;
    log.flush();
  });
  Checkpoint cp = runner.run(std::move(start), [&](const Checkpoint& c) {
    c.save((dir / "checkpoint.json").string());
    write_file(dir / "metrics.tsv", metrics_to_tsv(c.history));
    const IterationMetrics& m = c.history.back();
    std::string line = fmt::format("iteration {}: train {:.2f}% test {} library {} (+{})\n", m.iteration,
                                   100 * m.train_solved,
                                   m.test_solved ? fmt::format("{:.2f}%", 100 * *m.test_solved) : "-",
                                   m.library_size, m.new_abstractions.size());
    log << line;
    log.flush();
    fmt::print("{}", line);
    std::fflush(stdout);
  });
  write_file(dir / "grammar.json", cp.grammar.to_json().dump(2) + "\n");
  fmt::print("{}", history_table(cp.history));
  return 0;
}

int cmd_evaluate(const std::string& run_dir, const std::string& data, long budget, bool no_language, bool enumerative,
                 int workers) {
  fs::path dir(run_dir);
  RunConfig config = RunConfig::from_json(nlohmann::json::parse(read_file(dir / "config.json")));
  auto domain = make_domain(config.domain);
  Checkpoint cp = Checkpoint::load((dir / "checkpoint.json").string());
  std::vector<Task> tests = load_splits(data, *domain).test;
  SearchBudget b;
  b.max_expansions = budget > 0 ? budget : config.search_budget;
  EvaluationResult r = evaluate(cp, *domain, tests, b, !no_language, config.beam_width, workers, enumerative);
  nlohmann::json out{{"iteration", cp.iteration},  {"solved", r.solved},           {"total", r.total},
                     {"rate", r.rate()},           {"use_language", !no_language}, {"enumerative", enumerative},
                     {"budget", b.max_expansions}, {"expansions", r.expansions}};
  nlohmann::json programs = nlohmann::json::object();
  for (std::size_t i = 0; i < r.frontiers.size(); ++i)
    if (!r.frontiers[i].empty()) programs[tests[i].id] = r.frontiers[i].best().program.str();
  out["programs"] = programs;
  std::string name = fmt::format("evaluation{}{}.json", no_language ? "-nolang" : "", enumerative ? "-enum" : "");
  write_file(dir / name, out.dump(2) + "\n");
  fmt::print("solved {}/{} ({:.2f}%)\n", r.solved, r.total, 100 * r.rate());
  return 0;
}

int cmd_report(const std::vector<std::string>& run_dirs, const std::string& out) {
  std::vector<RunSummary> runs;
  for (const auto& d : run_dirs) {
    fs::path dir(d);
    RunConfig config = RunConfig::from_json(nlohmann::json::parse(read_file(dir / "config.json")));
    RunSummary s{std::string(mode_name(config.mode)), config.seed, metrics_from_tsv(read_file(dir / "metrics.tsv"))};
    fmt::print("== {} ({}, seed {})\n{}\n", d, s.mode, s.seed, history_table(s.history));
    runs.push_back(std::move(s));
  }
  std::string table = comparison_table(runs);
  fmt::print("{}", table);
  if (!out.empty()) {
    std::string tsv = "run\tmode\tseed\titeration\ttest_solved\ttest_solved_no_language\ttrain_solved\tlibrary_size\n";
    for (std::size_t i = 0; i < runs.size(); ++i)
      for (const auto& m : runs[i].history)
        tsv += fmt::format("{}\t{}\t{}\t{}\t{}\t{}\t{:.17g}\t{}\n", run_dirs[i], runs[i].mode, runs[i].seed,
                           m.iteration, m.test_solved ? fmt::format("{:.17g}", *m.test_solved) : "NA",
                           m.test_solved_no_language ? fmt::format("{:.17g}", *m.test_solved_no_language) : "NA",
                           m.train_solved, m.library_size);
    write_file(out, tsv);
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Library learning from programs and language"};
  app.require_subcommand(1);

  std::string gen_domain = "strings", gen_out = "tasks.json";
  int gen_train = 100, gen_test = 50;
  std::uint64_t gen_seed = 0;
  auto* gen = app.add_subcommand("generate", "Generate a synthetic dataset");
  gen->add_option("--domain", gen_domain)->check(CLI::IsMember({"strings", "graphics"}));
  gen->add_option("--train", gen_train)->check(CLI::NonNegativeNumber);
  gen->add_option("--test", gen_test)->check(CLI::NonNegativeNumber);
  gen->add_option("--seed", gen_seed);
  gen->add_option("-o,--out", gen_out);

  RunConfig config;
  std::string mode, data, run_dir;
  bool resume = false;
  auto* run = app.add_subcommand("run", "Run the learning loop");
  // Loaded as soon as it is parsed, so flags given after it override it.
  run->add_option_function<std::string>(
         "--config", [&](const std::string& path) { config = RunConfig::from_json(nlohmann::json::parse(read_file(path))); },
         "JSON config; later flags override it")
      ->check(CLI::ExistingFile)
      ->trigger_on_parse();
  add_config_flags(run, config, mode);
  run->add_option("--data", data)->required()->check(CLI::ExistingFile);
  run->add_option("--run-dir", run_dir)->required();
  run->add_flag("--resume", resume, "continue from the run directory's checkpoint");

  std::string eval_dir, eval_data;
  long eval_budget = 0;
  bool no_language = false, enumerative = false;
  int eval_workers = 0;
  auto* ev = app.add_subcommand("evaluate", "Evaluate a run's checkpoint on held-out tasks");
  ev->add_option("--run-dir", eval_dir)->required()->check(CLI::ExistingDirectory);
  ev->add_option("--data", eval_data)->required()->check(CLI::ExistingFile);
  ev->add_option("--search-budget", eval_budget, "expansions per task (default: the run's)");
  ev->add_flag("--no-language", no_language, "search from examples only");
  ev->add_flag("--enumerative", enumerative, "search the library prior without recognition");
  ev->add_option("--workers", eval_workers);

  std::vector<std::string> report_dirs;
  std::string report_out;
  auto* rep = app.add_subcommand("report", "Summarize one or more runs");
  rep->add_option("run-dirs", report_dirs)->check(CLI::ExistingDirectory);
  rep->add_option("-o,--out", report_out, "write a tab-separated results file");

  CLI11_PARSE(app, argc, argv);
  try {
    if (*gen) return cmd_generate(gen_domain, gen_train, gen_test, gen_seed, gen_out);
    if (*run) return cmd_run(config, mode, data, run_dir, resume);
    if (*ev) return cmd_evaluate(eval_dir, eval_data, eval_budget, no_language, enumerative, eval_workers);
    if (*rep) return cmd_report(report_dirs, report_out);
  } catch (const std::exception& e) {
    fmt::print(stderr, "error: {}\n", e.what());
    return 1;
  }
  return 0;
}
