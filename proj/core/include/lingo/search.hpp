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

#ifndef LINGO_SEARCH_HPP_
#define LINGO_SEARCH_HPP_

#include <functional>
#include <memory>
#include <optional>
#include <vector>

#include "lingo/domain.hpp"
#include "lingo/eval.hpp"
#include "lingo/frontier.hpp"
#include "lingo/grammar.hpp"

namespace lingo {

struct SearchBudget {
  long max_expansions = 200000;
  std::optional<double> max_seconds;

  bool valid() const { return max_expansions > 0; }
};

struct Enumerated {
  Term program;
  double log_prob = 0.0;
};

struct SearchStats {
  long expansions = 0;
  long emitted = 0;
};

// Called for every complete program; return false to stop.
using EmitFn = std::function<bool(const Term& program, double log_prob)>;

// Best-first enumeration of η-long programs for `request` in non-increasing
// log-probability under `dist`; scores within 1e-9 are ties, emitted in
// printed order.
SearchStats enumerate(const GrammarLike& dist, const TypePtr& request, const SearchBudget& budget,
                      const EmitFn& emit);
std::vector<Enumerated> enumerate(const GrammarLike& dist, const TypePtr& request, const SearchBudget& budget);

// True iff the program maps every example input to its output. Evaluation
// failures count as false.
bool check_task(const Term& program, const Task& task, const DomainExecutor& executor,
                const EvalLimit& limit = {});

struct SolveOptions {
  SearchBudget budget;
  int beam_width = 5;
  EvalLimit limit;
  // 0 picks the LINGO_WORKERS environment variable or the hardware count.
  int workers = 0;
};

// Searches each task under its own distribution (dists[i] for tasks[i]).
// Frontier entries carry log-priors under the distribution's grammar.
// Results are ordered by task index.
std::vector<Frontier> solve_tasks(const std::vector<Task>& tasks,
                                  const std::vector<std::shared_ptr<const GrammarLike>>& dists,
                                  const DomainExecutor& executor, const SolveOptions& options,
                                  std::vector<SearchStats>* stats = nullptr);

int default_workers();

// Runs fn(i) for i in [0, n) on a bounded pool; exceptions propagate.
void parallel_for(int n, int workers, const std::function<void(int)>& fn);

}  // namespace lingo

#endif  // LINGO_SEARCH_HPP_
