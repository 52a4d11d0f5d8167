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

// The outer learning loop: search, compress, refit, retrain, evaluate.

#ifndef LINGO_HARNESS_HPP_
#define LINGO_HARNESS_HPP_

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "lingo/compression.hpp"
#include "lingo/domain.hpp"
#include "lingo/frontier.hpp"
#include "lingo/grammar.hpp"
#include "lingo/recognition.hpp"
#include "lingo/search.hpp"
#include "lingo/translation.hpp"

namespace lingo {

// Each mode adds one component to the previous one.
enum class Mode {
  kBaselineNoLanguage,      // examples only
  kMultimodalNoGenerative,  // + description encoding
  kLaps,                    // + translation model and described joint samples
  kLapsMe,                  // + mutual exclusivity
  kLapsMeCompression,       // + alignment term in compression
};

std::string_view mode_name(Mode mode);
Mode parse_mode(std::string_view name);
const std::vector<Mode>& all_modes();

struct ModeTraits {
  bool language_encoding = false;
  bool translation = false;
  bool mutual_exclusivity = false;
  bool translation_compression = false;
};
ModeTraits traits(Mode mode);

struct RunConfig {
  std::string domain = "strings";
  int iterations = -1;  // < 0: the domain default
  int batch_size = 40;
  long search_budget = 200000;  // expansions per task, training and test
  int beam_width = 5;
  CompressionParams compression;
  TranslationParams translation;
  RecognitionParams recognition;
  int joint_samples = 200;  // recognition samples per iteration
  Mode mode = Mode::kLapsMeCompression;
  bool language_at_test = true;
  bool curriculum = false;  // order training tasks by description length
  int eval_interval = 1;
  std::uint64_t seed = 0;
  int workers = 0;  // 0: LINGO_WORKERS or the hardware count

  // Throws std::invalid_argument on inconsistent settings.
  void validate() const;
  int resolved_iterations(const Domain& domain) const;

  nlohmann::json to_json() const;
  static RunConfig from_json(const nlohmann::json& j);
};

struct IterationMetrics {
  int iteration = 0;  // 0 is the untrained starting point
  double train_solved = 0.0;  // fraction of training tasks with a frontier
  int batch_solved = 0;
  int batch_size = 0;
  // Held-out solve rates; absent when not evaluated this iteration.
  std::optional<double> test_solved;              // language per config
  std::optional<double> test_solved_no_language;  // examples only
  int library_size = 0;
  int abstractions = 0;  // invented productions in the library
  ObjectiveTerms description_length;
  std::vector<std::string> new_abstractions;
  double recognition_loss = 0.0;  // mean over the last tenth of training
  long expansions = 0;            // search expansions this iteration

  bool operator==(const IterationMetrics&) const = default;
};

// One row per iteration, tab separated, with a header line.
std::string metrics_to_tsv(const std::vector<IterationMetrics>& history);
std::vector<IterationMetrics> metrics_from_tsv(const std::string& text);

struct Checkpoint {
  int iteration = 0;  // completed iterations
  Grammar grammar;
  std::optional<TranslationTable> translation;
  std::optional<RecognitionModel> recognition;
  std::vector<Frontier> frontiers;  // training tasks, by task index
  std::vector<IterationMetrics> history;
  std::vector<int> order;  // training task visiting order
  int cursor = 0;          // next position in `order`

  nlohmann::json to_json() const;
  static Checkpoint from_json(const nlohmann::json& j);
  void save(const std::string& path) const;
  static Checkpoint load(const std::string& path);
};

struct EvaluationResult {
  int solved = 0;
  int total = 0;
  long expansions = 0;
  std::vector<Frontier> frontiers;

  double rate() const { return total ? static_cast<double>(solved) / total : 0.0; }
};

// Searches each test task under the checkpoint's recognition model (or the
// grammar prior when there is none, or when `enumerative`).
EvaluationResult evaluate(const Checkpoint& checkpoint, const Domain& domain, const std::vector<Task>& tests,
                          const SearchBudget& budget, bool use_language, int beam_width = 5, int workers = 0,
                          bool enumerative = false);

class Runner {
 public:
  // Fails fast on empty training sets or ill-typed ground truth.
  Runner(RunConfig config, const Domain& domain, std::vector<Task> train, std::vector<Task> test);

  // Starting checkpoint: the initial library, a recognition model trained
  // on prior samples, and the iteration-0 enumeration metrics.
  Checkpoint initial() const;
  // Runs one iteration in place.
  void step(Checkpoint& checkpoint) const;
  // Runs until the configured iteration count; `on_iteration` sees every
  // checkpoint, including the initial one.
  Checkpoint run(std::optional<Checkpoint> resume = std::nullopt,
                 const std::function<void(const Checkpoint&)>& on_iteration = {}) const;

  const RunConfig& config() const { return config_; }
  // Receives the compression report of every iteration.
  void set_log(std::function<void(const std::string&)> log) { log_ = std::move(log); }

 private:
  std::uint64_t stream(int iteration, int purpose) const;
  RecognitionModel train_recognition(const Grammar& grammar, const std::optional<TranslationTable>& table,
                                     const std::vector<Frontier>& frontiers, int iteration, double* loss) const;
  void evaluate_into(const Checkpoint& cp, IterationMetrics& m) const;

  RunConfig config_;
  const Domain* domain_;
  std::vector<Task> train_;
  std::vector<Task> test_;
  std::vector<TypePtr> requests_;
  SmoothedLM lm_;
  std::set<std::string> description_words_;
  std::function<void(const std::string&)> log_;
};

// Final-iteration results of one run, for comparison tables.
struct RunSummary {
  std::string mode;
  std::uint64_t seed = 0;
  std::vector<IterationMetrics> history;
};

// Per-mode best and mean held-out solve rates (with and without language)
// and the iteration-0 enumeration baseline, as an aligned text table.
std::string comparison_table(const std::vector<RunSummary>& runs);
// Per-iteration table of one history.
std::string history_table(const std::vector<IterationMetrics>& history);

}  // namespace lingo

#endif  // LINGO_HARNESS_HPP_
