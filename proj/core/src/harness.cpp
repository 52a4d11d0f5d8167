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

#include "lingo/harness.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include <fmt/format.h>

namespace lingo {

namespace {

enum Purpose { kOrder = 1, kRecognitionInit, kJointSamples, kRecognitionTrain };

std::uint64_t splitmix(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ull;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}

nlohmann::json frontier_to_json(const Frontier& f) {
  nlohmann::json entries = nlohmann::json::array();
  for (const auto& e : f.entries)
    entries.push_back({{"program", e.program.str()}, {"log_prior", e.log_prior}, {"log_posterior", e.log_posterior}});
  return {{"task", f.task_id}, {"request", f.request->str()}, {"beam_width", f.beam_width}, {"entries", entries}};
}

Frontier frontier_from_json(const nlohmann::json& j) {
  Frontier f;
  f.task_id = j.at("task").get<std::string>();
  f.request = parse_type(j.at("request").get<std::string>());
  f.beam_width = j.at("beam_width").get<int>();
  for (const auto& e : j.at("entries"))
    f.entries.push_back({parse(e.at("program").get<std::string>()), e.at("log_prior").get<double>(),
                         e.at("log_posterior").get<double>()});
  return f;
}

nlohmann::json optional_json(const std::optional<double>& v) { return v ? nlohmann::json(*v) : nlohmann::json(); }
std::optional<double> optional_from(const nlohmann::json& j) {
  if (j.is_null()) return std::nullopt;
  return j.get<double>();
}

nlohmann::json metrics_to_json(const IterationMetrics& m) {
  return {{"iteration", m.iteration},
          {"train_solved", m.train_solved},
          {"batch_solved", m.batch_solved},
          {"batch_size", m.batch_size},
          {"test_solved", optional_json(m.test_solved)},
          {"test_solved_no_language", optional_json(m.test_solved_no_language)},
          {"library_size", m.library_size},
          {"abstractions", m.abstractions},
          {"dl_program", m.description_length.program},
          {"dl_grammar", m.description_length.grammar},
          {"dl_parameters", m.description_length.parameters},
          {"dl_translation", m.description_length.translation},
          {"new_abstractions", m.new_abstractions},
          {"recognition_loss", m.recognition_loss},
          {"expansions", m.expansions}};
}

IterationMetrics metrics_from_json(const nlohmann::json& j) {
  IterationMetrics m;
  m.iteration = j.at("iteration").get<int>();
  m.train_solved = j.at("train_solved").get<double>();
  m.batch_solved = j.at("batch_solved").get<int>();
  m.batch_size = j.at("batch_size").get<int>();
  m.test_solved = optional_from(j.at("test_solved"));
  m.test_solved_no_language = optional_from(j.at("test_solved_no_language"));
  m.library_size = j.at("library_size").get<int>();
  m.abstractions = j.at("abstractions").get<int>();
  m.description_length.program = j.at("dl_program").get<double>();
  m.description_length.grammar = j.at("dl_grammar").get<double>();
  m.description_length.parameters = j.at("dl_parameters").get<double>();
  m.description_length.translation = j.at("dl_translation").get<double>();
  m.new_abstractions = j.at("new_abstractions").get<std::vector<std::string>>();
  m.recognition_loss = j.at("recognition_loss").get<double>();
  m.expansions = j.at("expansions").get<long>();
  return m;
}

std::vector<std::shared_ptr<const GrammarLike>> make_views(const Checkpoint& cp, const Domain& domain,
                                                           const std::vector<Task>& tasks, bool use_language,
                                                           bool enumerative) {
  auto space = std::make_shared<ChoiceSpace>(cp.grammar);
  std::vector<std::shared_ptr<const GrammarLike>> views;
  views.reserve(tasks.size());
  if (enumerative || !cp.recognition) {
    auto prior = std::make_shared<PriorView>(cp.grammar, space);
    views.assign(tasks.size(), prior);
    return views;
  }
  const RecognitionModel& model = *cp.recognition;
  for (const auto& t : tasks) {
    std::optional<std::vector<std::string>> d;
    if (use_language && model.has_language() && t.has_description()) d = t.description;
    views.push_back(
        std::make_shared<RecognitionView>(cp.grammar, space, model.predict(cp.grammar, domain.task_features(t), d)));
  }
  return views;
}

int count_invented(const Grammar& g) {
  int n = 0;
  for (const auto& p : g.productions()) n += p.term.is_invented();
  return n;
}

void rescore(std::vector<Frontier>& frontiers, const Grammar& grammar) {
  PriorView view(grammar);
  for (auto& f : frontiers) {
    for (auto& e : f.entries) {
      e.log_prior = log_prior(e.program, f.request, view);
      e.log_posterior = e.log_prior;
    }
    f.normalize();
  }
}

std::string fmt_rate(const std::optional<double>& v) { return v ? fmt::format("{:6.2f}", 100.0 * *v) : "     -"; }

}  // namespace

// --- modes -----------------------------------------------------------------

const std::vector<Mode>& all_modes() {
  static const std::vector<Mode> modes{Mode::kBaselineNoLanguage, Mode::kMultimodalNoGenerative, Mode::kLaps,
                                       Mode::kLapsMe, Mode::kLapsMeCompression};
  return modes;
}

std::string_view mode_name(Mode mode) {
  switch (mode) {
    case Mode::kBaselineNoLanguage:
      return "baseline-no-language";
    case Mode::kMultimodalNoGenerative:
      return "multimodal-no-generative";
    case Mode::kLaps:
      return "laps";
    case Mode::kLapsMe:
      return "laps+me";
    case Mode::kLapsMeCompression:
      return "laps+me+compression";
  }
  return "?";
}

Mode parse_mode(std::string_view name) {
  for (Mode m : all_modes())
    if (mode_name(m) == name) return m;
  throw std::invalid_argument(fmt::format("unknown mode '{}'", name));
}

ModeTraits traits(Mode mode) {
  ModeTraits t;
  int level = static_cast<int>(mode);
  t.language_encoding = level >= static_cast<int>(Mode::kMultimodalNoGenerative);
  t.translation = level >= static_cast<int>(Mode::kLaps);
  t.mutual_exclusivity = level >= static_cast<int>(Mode::kLapsMe);
  t.translation_compression = level >= static_cast<int>(Mode::kLapsMeCompression);
  return t;
}

// --- configuration ---------------------------------------------------------

void RunConfig::validate() const {
  if (domain.empty()) throw std::invalid_argument("domain is required");
  if (batch_size <= 0) throw std::invalid_argument("batch size must be positive");
  if (search_budget <= 0) throw std::invalid_argument("search budget must be positive");
  if (beam_width <= 0) throw std::invalid_argument("beam width must be positive");
  if (joint_samples < 0) throw std::invalid_argument("joint sample count must be non-negative");
  if (eval_interval <= 0) throw std::invalid_argument("evaluation interval must be positive");
  if (!compression.valid()) throw std::invalid_argument("invalid compression parameters");
  if (!translation.valid()) throw std::invalid_argument("invalid translation parameters");
  if (!recognition.valid()) throw std::invalid_argument("invalid recognition parameters");
}

int RunConfig::resolved_iterations(const Domain& d) const { return iterations < 0 ? d.default_iterations() : iterations; }

nlohmann::json RunConfig::to_json() const {
  return {{"domain", domain},
          {"iterations", iterations},
          {"batch_size", batch_size},
          {"search_budget", search_budget},
          {"beam_width", beam_width},
          {"compression",
           {{"structure_penalty", compression.structure_penalty},
            {"pseudocounts", compression.pseudocounts},
            {"max_new_abstractions", compression.max_new_abstractions},
            {"max_arity", compression.max_arity},
            {"refactoring_depth", compression.refactoring_depth},
            {"translation_weight", compression.translation_weight},
            {"candidates_to_score", compression.candidates_to_score}}},
          {"translation",
           {{"em_iterations", translation.em_iterations},
            {"me_alpha", translation.me_alpha},
            {"lm_smoothing", translation.lm_smoothing},
            {"lm_weight", translation.lm_weight},
            {"beam_width", translation.beam_width},
            {"words_per_token", translation.words_per_token}}},
          {"recognition",
           {{"embedding", recognition.embedding},
            {"hidden", recognition.hidden},
            {"hash_buckets", recognition.hash_buckets},
            {"learning_rate", recognition.learning_rate},
            {"steps", recognition.steps},
            {"language_dropout", recognition.language_dropout}}},
          {"joint_samples", joint_samples},
          {"mode", std::string(mode_name(mode))},
          {"language_at_test", language_at_test},
          {"curriculum", curriculum},
          {"eval_interval", eval_interval},
          {"seed", seed},
          {"workers", workers}};
}

RunConfig RunConfig::from_json(const nlohmann::json& j) {
  RunConfig c;
  c.domain = j.value("domain", c.domain);
  c.iterations = j.value("iterations", c.iterations);
  c.batch_size = j.value("batch_size", c.batch_size);
  c.search_budget = j.value("search_budget", c.search_budget);
  c.beam_width = j.value("beam_width", c.beam_width);
  if (j.contains("compression")) {
    const auto& k = j["compression"];
    auto& p = c.compression;
    p.structure_penalty = k.value("structure_penalty", p.structure_penalty);
    p.pseudocounts = k.value("pseudocounts", p.pseudocounts);
    p.max_new_abstractions = k.value("max_new_abstractions", p.max_new_abstractions);
    p.max_arity = k.value("max_arity", p.max_arity);
    p.refactoring_depth = k.value("refactoring_depth", p.refactoring_depth);
    p.translation_weight = k.value("translation_weight", p.translation_weight);
    p.candidates_to_score = k.value("candidates_to_score", p.candidates_to_score);
  }
  if (j.contains("translation")) {
    const auto& k = j["translation"];
    auto& p = c.translation;
    p.em_iterations = k.value("em_iterations", p.em_iterations);
    p.me_alpha = k.value("me_alpha", p.me_alpha);
    p.lm_smoothing = k.value("lm_smoothing", p.lm_smoothing);
    p.lm_weight = k.value("lm_weight", p.lm_weight);
    p.beam_width = k.value("beam_width", p.beam_width);
    p.words_per_token = k.value("words_per_token", p.words_per_token);
  }
  if (j.contains("recognition")) {
    const auto& k = j["recognition"];
    auto& p = c.recognition;
    p.embedding = k.value("embedding", p.embedding);
    p.hidden = k.value("hidden", p.hidden);
    p.hash_buckets = k.value("hash_buckets", p.hash_buckets);
    p.learning_rate = k.value("learning_rate", p.learning_rate);
    p.steps = k.value("steps", p.steps);
    p.language_dropout = k.value("language_dropout", p.language_dropout);
  }
  c.joint_samples = j.value("joint_samples", c.joint_samples);
  c.mode = parse_mode(j.value("mode", std::string(mode_name(c.mode))));
  c.language_at_test = j.value("language_at_test", c.language_at_test);
  c.curriculum = j.value("curriculum", c.curriculum);
  c.eval_interval = j.value("eval_interval", c.eval_interval);
  c.seed = j.value("seed", c.seed);
  c.workers = j.value("workers", c.workers);
  c.validate();
  return c;
}

// --- metrics ---------------------------------------------------------------

namespace {

constexpr const char* kTsvHeader =
    "iteration\ttrain_solved\tbatch_solved\tbatch_size\ttest_solved\ttest_solved_no_language\tlibrary_size\t"
    "abstractions\tdl_program\tdl_grammar\tdl_parameters\tdl_translation\trecognition_loss\texpansions\t"
    "new_abstractions";

std::string opt_field(const std::optional<double>& v) { return v ? fmt::format("{:.17g}", *v) : "NA"; }

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : s) {
    if (c == sep) {
      out.push_back(cur);
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  out.push_back(cur);
  return out;
}

}  // namespace

std::string metrics_to_tsv(const std::vector<IterationMetrics>& history) {
  std::string out = std::string(kTsvHeader) + "\n";
  for (const auto& m : history) {
    std::string abstractions;
    for (std::size_t i = 0; i < m.new_abstractions.size(); ++i) {
      if (i) abstractions += "|";
      abstractions += m.new_abstractions[i];
    }
    out += fmt::format("{}\t{:.17g}\t{}\t{}\t{}\t{}\t{}\t{}\t{:.17g}\t{:.17g}\t{:.17g}\t{:.17g}\t{:.17g}\t{}\t{}\n",
                       m.iteration, m.train_solved, m.batch_solved, m.batch_size, opt_field(m.test_solved),
                       opt_field(m.test_solved_no_language), m.library_size, m.abstractions,
                       m.description_length.program, m.description_length.grammar, m.description_length.parameters,
                       m.description_length.translation, m.recognition_loss, m.expansions, abstractions);
  }
  return out;
}

std::vector<IterationMetrics> metrics_from_tsv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line) || line != kTsvHeader) throw std::runtime_error("metrics file has an unexpected header");
  std::vector<IterationMetrics> out;
  auto opt = [](const std::string& s) -> std::optional<double> {
    if (s == "NA") return std::nullopt;
    return std::stod(s);
  };
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    auto f = split(line, '\t');
    if (f.size() != 15) throw std::runtime_error("metrics row has " + std::to_string(f.size()) + " fields");
    IterationMetrics m;
    m.iteration = std::stoi(f[0]);
    m.train_solved = std::stod(f[1]);
    m.batch_solved = std::stoi(f[2]);
    m.batch_size = std::stoi(f[3]);
    m.test_solved = opt(f[4]);
    m.test_solved_no_language = opt(f[5]);
    m.library_size = std::stoi(f[6]);
    m.abstractions = std::stoi(f[7]);
    m.description_length.program = std::stod(f[8]);
    m.description_length.grammar = std::stod(f[9]);
    m.description_length.parameters = std::stod(f[10]);
    m.description_length.translation = std::stod(f[11]);
    m.recognition_loss = std::stod(f[12]);
    m.expansions = std::stol(f[13]);
    if (!f[14].empty()) m.new_abstractions = split(f[14], '|');
    out.push_back(std::move(m));
  }
  return out;
}

// --- checkpoints -----------------------------------------------------------

nlohmann::json Checkpoint::to_json() const {
  nlohmann::json fs = nlohmann::json::array();
  for (const auto& f : frontiers) fs.push_back(frontier_to_json(f));
  nlohmann::json hist = nlohmann::json::array();
  for (const auto& m : history) hist.push_back(metrics_to_json(m));
  return {{"format", 1},
          {"iteration", iteration},
          {"grammar", grammar.to_json()},
          {"translation", translation ? nlohmann::json(translation->to_text()) : nlohmann::json()},
          {"recognition", recognition ? nlohmann::json(recognition->to_text()) : nlohmann::json()},
          {"frontiers", fs},
          {"history", hist},
          {"order", order},
          {"cursor", cursor}};
}

Checkpoint Checkpoint::from_json(const nlohmann::json& j) {
  if (j.value("format", 0) != 1) throw std::runtime_error("unsupported checkpoint format");
  Checkpoint c;
  c.iteration = j.at("iteration").get<int>();
  c.grammar = Grammar::from_json(j.at("grammar"));
  if (!j.at("translation").is_null()) c.translation = TranslationTable::from_text(j["translation"].get<std::string>());
  if (!j.at("recognition").is_null()) c.recognition = RecognitionModel::from_text(j["recognition"].get<std::string>());
  for (const auto& f : j.at("frontiers")) c.frontiers.push_back(frontier_from_json(f));
  for (const auto& m : j.at("history")) c.history.push_back(metrics_from_json(m));
  c.order = j.at("order").get<std::vector<int>>();
  c.cursor = j.at("cursor").get<int>();
  return c;
}

void Checkpoint::save(const std::string& path) const {
  std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp);
    if (!out) throw std::runtime_error("cannot write " + tmp);
    out << to_json().dump();
  }
  if (std::rename(tmp.c_str(), path.c_str()) != 0) throw std::runtime_error("cannot replace " + path);
}

Checkpoint Checkpoint::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read " + path);
  return from_json(nlohmann::json::parse(in));
}

// --- evaluation ------------------------------------------------------------

EvaluationResult evaluate(const Checkpoint& checkpoint, const Domain& domain, const std::vector<Task>& tests,
                          const SearchBudget& budget, bool use_language, int beam_width, int workers,
                          bool enumerative) {
  EvaluationResult r;
  r.total = static_cast<int>(tests.size());
  if (tests.empty()) return r;
  auto views = make_views(checkpoint, domain, tests, use_language, enumerative);
  SolveOptions opts;
  opts.budget = budget;
  opts.beam_width = beam_width;
  opts.workers = workers;
  std::vector<SearchStats> stats;
  r.frontiers = solve_tasks(tests, views, domain.executor(), opts, &stats);
  for (const auto& f : r.frontiers) r.solved += !f.empty();
  for (const auto& s : stats) r.expansions += s.expansions;
  return r;
}

// --- runner ----------------------------------------------------------------

Runner::Runner(RunConfig config, const Domain& domain, std::vector<Task> train, std::vector<Task> test)
    : config_(std::move(config)), domain_(&domain), train_(std::move(train)), test_(std::move(test)) {
  config_.validate();
  if (config_.domain != domain.name())
    throw std::invalid_argument(fmt::format("config domain '{}' does not match '{}'", config_.domain, domain.name()));
  if (train_.empty()) throw std::invalid_argument("training set is empty");
  std::vector<std::vector<std::string>> corpus;
  std::set<std::string> seen_requests;
  for (const auto* set : {&train_, &test_}) {
    for (const auto& t : *set) {
      if (!t.request) throw std::invalid_argument("task " + t.id + " has no request type");
      if (t.examples.empty()) throw std::invalid_argument("task " + t.id + " has no examples");
      description_words_.insert(t.description.begin(), t.description.end());
    }
  }
  for (const auto& t : train_) {
    if (seen_requests.insert(t.request->str()).second) requests_.push_back(t.request);
    if (t.has_description()) corpus.push_back(t.description);
  }
  lm_ = SmoothedLM(corpus, config_.translation.lm_smoothing);
}

std::uint64_t Runner::stream(int iteration, int purpose) const {
  return splitmix(splitmix(config_.seed) ^ (static_cast<std::uint64_t>(iteration) << 8 | static_cast<unsigned>(purpose)));
}

RecognitionModel Runner::train_recognition(const Grammar& grammar, const std::optional<TranslationTable>& table,
                                           const std::vector<Frontier>& frontiers, int iteration,
                                           double* loss) const {
  ModeTraits t = traits(config_.mode);
  std::set<std::string> vocab;
  if (t.translation && table) {
    vocab = table->vocab_known();
    vocab.insert(table->vocab_new().begin(), table->vocab_new().end());
  } else if (t.language_encoding) {
    for (const auto& task : train_) vocab.insert(task.description.begin(), task.description.end());
  }
  RecognitionParams params = config_.recognition;
  params.use_language = t.language_encoding;
  RecognitionModel model(grammar, domain_->feature_size(), vocab, params, stream(iteration, kRecognitionInit));

  std::vector<RecognitionExample> solved;
  for (std::size_t i = 0; i < frontiers.size(); ++i) {
    if (frontiers[i].empty()) continue;
    const Task& task = train_[i];
    solved.push_back({domain_->task_features(task), t.language_encoding ? task.description : std::vector<std::string>{},
                      frontiers[i].best().program, task.request});
  }
  std::vector<RecognitionExample> dreams;
  if (config_.joint_samples > 0) {
    const TranslationTable* described = t.translation && table ? &*table : nullptr;
    for (auto& s : sample_joint(grammar, described, &lm_, *domain_, requests_, config_.joint_samples,
                                stream(iteration, kJointSamples))) {
      dreams.push_back({domain_->task_features(s.task),
                        t.language_encoding ? std::move(s.description) : std::vector<std::string>{},
                        std::move(s.program), s.task.request});
    }
  }
  TrainingReport report;
  RecognitionModel trained =
      train(model, grammar, solved, dreams, params.steps, stream(iteration, kRecognitionTrain), &report);
  if (loss) *loss = report.mean_loss_last;
  return trained;
}

void Runner::evaluate_into(const Checkpoint& cp, IterationMetrics& m) const {
  if (test_.empty()) return;
  SearchBudget budget;
  budget.max_expansions = config_.search_budget;
  bool language = cp.recognition && cp.recognition->has_language();
  EvaluationResult without =
      evaluate(cp, *domain_, test_, budget, false, config_.beam_width, config_.workers, !cp.recognition);
  m.test_solved_no_language = without.rate();
  m.test_solved = without.rate();
  if (language && config_.language_at_test) {
    EvaluationResult with = evaluate(cp, *domain_, test_, budget, true, config_.beam_width, config_.workers);
    m.test_solved = with.rate();
  }
}

Checkpoint Runner::initial() const {
  Checkpoint cp;
  cp.grammar = domain_->initial_grammar();
  for (const auto& t : train_) {
    Frontier f;
    f.task_id = t.id;
    f.request = t.request;
    f.beam_width = config_.beam_width;
    cp.frontiers.push_back(std::move(f));
  }
  cp.order.resize(train_.size());
  std::iota(cp.order.begin(), cp.order.end(), 0);
  if (config_.curriculum) {
    std::stable_sort(cp.order.begin(), cp.order.end(), [&](int a, int b) {
      return train_[static_cast<std::size_t>(a)].description.size() <
             train_[static_cast<std::size_t>(b)].description.size();
    });
  } else {
    std::mt19937_64 rng(stream(0, kOrder));
    for (std::size_t i = cp.order.size(); i > 1; --i) std::swap(cp.order[i - 1], cp.order[rng() % i]);
  }

  IterationMetrics m;
  m.library_size = static_cast<int>(cp.grammar.size());
  CompressionParams cparams = config_.compression;
  m.description_length = objective({}, cp.grammar, nullptr, cp.grammar, {}, cparams);
  // Pure enumeration from the initial library.
  evaluate_into(cp, m);
  cp.recognition = train_recognition(cp.grammar, std::nullopt, cp.frontiers, 0, &m.recognition_loss);
  cp.history.push_back(std::move(m));
  return cp;
}

void Runner::step(Checkpoint& cp) const {
  ModeTraits t = traits(config_.mode);
  int k = cp.iteration + 1;
  IterationMetrics m;
  m.iteration = k;

  // Search a batch of training tasks.
  int n = std::min<int>(config_.batch_size, static_cast<int>(train_.size()));
  std::vector<int> batch;
  for (int i = 0; i < n; ++i) batch.push_back(cp.order[static_cast<std::size_t>((cp.cursor + i) % cp.order.size())]);
  cp.cursor = static_cast<int>((cp.cursor + n) % cp.order.size());
  std::vector<Task> tasks;
  for (int i : batch) tasks.push_back(train_[static_cast<std::size_t>(i)]);
  auto views = make_views(cp, *domain_, tasks, t.language_encoding, false);
  SolveOptions opts;
  opts.budget.max_expansions = config_.search_budget;
  opts.beam_width = config_.beam_width;
  opts.workers = config_.workers;
  std::vector<SearchStats> stats;
  auto found = solve_tasks(tasks, views, domain_->executor(), opts, &stats);
  for (const auto& s : stats) m.expansions += s.expansions;
  m.batch_size = n;
  for (std::size_t i = 0; i < batch.size(); ++i) {
    m.batch_solved += !found[i].empty();
    auto& f = cp.frontiers[static_cast<std::size_t>(batch[i])];
    f.entries.insert(f.entries.end(), found[i].entries.begin(), found[i].entries.end());
  }
  rescore(cp.frontiers, cp.grammar);

  // Compress the solved frontiers and refit the weights.
  std::vector<int> solved;
  for (std::size_t i = 0; i < cp.frontiers.size(); ++i)
    if (!cp.frontiers[i].empty()) solved.push_back(static_cast<int>(i));
  std::vector<Frontier> active;
  for (int i : solved) active.push_back(cp.frontiers[static_cast<std::size_t>(i)]);
  CompressionParams cparams = config_.compression;
  if (!t.translation_compression) cparams.translation_weight = 0.0;
  const TranslationTable* table = t.translation_compression && cp.translation ? &*cp.translation : nullptr;
  if (!active.empty()) {
    CompressionResult r = compress(active, cp.grammar, table, cparams);
    if (log_) log_(fmt::format("iteration {}\n{}", k, compression_report(r)));
    for (const auto& c : r.accepted)
      m.new_abstractions.push_back((c.body.is_invented() ? c.body : Term::invented(c.body)).str());
    active = std::move(r.frontiers);
    cp.grammar = fit_weights(r.grammar, active, cparams.pseudocounts);
    for (std::size_t i = 0; i < solved.size(); ++i) cp.frontiers[static_cast<std::size_t>(solved[i])] = active[i];
    rescore(cp.frontiers, cp.grammar);
    active.clear();
    for (int i : solved) active.push_back(cp.frontiers[static_cast<std::size_t>(i)]);
  }
  m.description_length = objective(active, cp.grammar, table, cp.grammar, {}, cparams);

  // Retrain the translation model on the rewritten programs.
  if (t.translation) {
    std::vector<TranslationPair> pairs;
    for (int i : solved) {
      const Task& task = train_[static_cast<std::size_t>(i)];
      if (task.has_description())
        pairs.push_back({linearize(cp.frontiers[static_cast<std::size_t>(i)].best().program), task.description});
    }
    if (!pairs.empty()) {
      TranslationTable tt = train_em(pairs, config_.translation);
      if (t.mutual_exclusivity && config_.translation.me_enabled) {
        std::vector<std::string> fresh;
        for (const auto& w : description_words_)
          if (!tt.vocab_known().count(w)) fresh.push_back(w);
        if (!fresh.empty()) tt = apply_mutual_exclusivity(tt, cp.grammar, fresh, config_.translation.me_alpha);
      }
      cp.translation = std::move(tt);
    }
  }

  cp.recognition = train_recognition(cp.grammar, cp.translation, cp.frontiers, k, &m.recognition_loss);
  cp.iteration = k;

  m.train_solved = static_cast<double>(solved.size()) / static_cast<double>(train_.size());
  m.library_size = static_cast<int>(cp.grammar.size());
  m.abstractions = count_invented(cp.grammar);
  if (k % config_.eval_interval == 0 || k == config_.resolved_iterations(*domain_)) evaluate_into(cp, m);
  cp.history.push_back(std::move(m));
}

Checkpoint Runner::run(std::optional<Checkpoint> resume,
                       const std::function<void(const Checkpoint&)>& on_iteration) const {
  Checkpoint cp;
  if (resume) {
    cp = std::move(*resume);
    if (cp.frontiers.size() != train_.size())
      throw std::invalid_argument("checkpoint does not match the training set");
  } else {
    cp = initial();
    if (on_iteration) on_iteration(cp);
  }
  int total = config_.resolved_iterations(*domain_);
  while (cp.iteration < total) {
    step(cp);
    if (on_iteration) on_iteration(cp);
  }
  return cp;
}

// --- reports ---------------------------------------------------------------

std::string history_table(const std::vector<IterationMetrics>& history) {
  std::string out = fmt::format("{:>4} {:>7} {:>7} {:>7} {:>7} {:>5} {:>5} {:>11} {:>9}\n", "iter", "train%", "batch",
                                "test%", "nolang%", "lib", "inv", "DL", "rec-loss");
  for (const auto& m : history) {
    out += fmt::format("{:>4} {:>7.2f} {:>7} {:>7} {:>7} {:>5} {:>5} {:>11.3f} {:>9.4f}\n", m.iteration,
                       100.0 * m.train_solved, fmt::format("{}/{}", m.batch_solved, m.batch_size),
                       fmt_rate(m.test_solved), fmt_rate(m.test_solved_no_language), m.library_size, m.abstractions,
                       m.description_length.total(), m.recognition_loss);
    for (const auto& a : m.new_abstractions) out += "       + " + a + "\n";
  }
  return out;
}

std::string comparison_table(const std::vector<RunSummary>& runs) {
  if (runs.empty()) return {};
  struct Agg {
    std::vector<double> with, without, start;
  };
  std::vector<std::string> order;
  std::map<std::string, Agg> by_mode;
  for (const auto& r : runs) {
    if (!by_mode.count(r.mode)) order.push_back(r.mode);
    Agg& a = by_mode[r.mode];
    const IterationMetrics* last = nullptr;
    for (const auto& m : r.history)
      if (m.test_solved) last = &m;
    if (last && last->iteration > 0) {
      a.with.push_back(*last->test_solved);
      a.without.push_back(last->test_solved_no_language.value_or(*last->test_solved));
    }
    if (!r.history.empty() && r.history.front().test_solved) a.start.push_back(*r.history.front().test_solved);
  }
  auto best = [](const std::vector<double>& v) { return v.empty() ? 0.0 : *std::max_element(v.begin(), v.end()); };
  auto mean = [](const std::vector<double>& v) {
    return v.empty() ? 0.0 : std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
  };
  std::string out = fmt::format("{:<28} {:>5} {:>11} {:>11} {:>14} {:>14}\n", "model", "runs", "best%", "mean%",
                                "best-nolang%", "mean-nolang%");
  std::vector<double> start;
  for (const auto& name : order) {
    const Agg& a = by_mode[name];
    start.insert(start.end(), a.start.begin(), a.start.end());
    if (a.with.empty()) continue;
    out += fmt::format("{:<28} {:>5} {:>11.2f} {:>11.2f} {:>14.2f} {:>14.2f}\n", name, a.with.size(),
                       100 * best(a.with), 100 * mean(a.with), 100 * best(a.without), 100 * mean(a.without));
  }
  if (!start.empty())
    out += fmt::format("{:<28} {:>5} {:>11.2f} {:>11.2f} {:>14.2f} {:>14.2f}\n", "initial library, enumerative",
                       start.size(), 100 * best(start), 100 * mean(start), 100 * best(start), 100 * mean(start));
  return out;
}

}  // namespace lingo
