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

// Library learning by abstracting subtrees shared across frontiers.

#ifndef LINGO_COMPRESSION_HPP_
#define LINGO_COMPRESSION_HPP_

#include <string>
#include <vector>

#include "lingo/frontier.hpp"
#include "lingo/grammar.hpp"
#include "lingo/term.hpp"
#include "lingo/translation.hpp"

namespace lingo {

struct UsageSite {
  int frontier = 0;  // index into the frontier list
  int entry = 0;     // index into that frontier's entries
  int node = 0;      // pre-order node index within the program
};

struct Candidate {
  // Closed term; its leading `arity` λs bind the abstracted arguments.
  Term body;
  int arity = 0;
  std::vector<UsageSite> uses;

  // Initial-library primitives of the inlined body, sorted.
  std::vector<std::string> subcomponents() const;
  int distinct_entries() const;
};

struct ObjectiveTerms {
  double program = 0.0;      // -Σ_t log Σ_ρ P[ρ | 𝓛, θ] with θ refit
  double grammar = 0.0;      // structure penalty · Σ size
  double parameters = 0.0;   // number of weights
  double translation = 0.0;  // weighted alignment description length

  double total() const { return program + grammar + parameters + translation; }
  bool operator==(const ObjectiveTerms&) const = default;
};

struct CompressionStep {
  Candidate candidate;
  ObjectiveTerms before;
  ObjectiveTerms after;
  int rewritten_entries = 0;
};

struct CompressionResult {
  Grammar grammar;
  std::vector<Frontier> frontiers;
  double objective_before = 0.0;
  double objective_after = 0.0;
  std::vector<Candidate> accepted;
  std::vector<CompressionStep> steps;
};

// Subtree templates with up to min(max_arity, refactoring_depth)
// abstracted argument positions that occur in at least two distinct
// frontier entries, deduplicated structurally.
std::vector<Candidate> propose(const std::vector<Frontier>& frontiers, const CompressionParams& params);

// Every abstraction template of one program, with its node index. Used by
// propose and exposed for inspection.
std::vector<std::pair<Term, int>> refactorings(const Term& program, const CompressionParams& params);

// Replaces every maximal match of the candidate with an application of the
// invented production, η-expanded where the match is an abstraction.
Term rewrite(const Term& program, const Candidate& candidate);
// As rewrite, but keeps only sites that leave the program typeable under
// `grammar` (which must contain the candidate) for `request`.
Term rewrite_typed(const Term& program, const Candidate& candidate, const TypePtr& request, const Grammar& grammar);

// Joint objective of a library and its frontiers (lower is better).
// `translation` may be null; `merges` are the subcomponent sets of
// abstractions that already compressed the alignment table, whose tokens
// belong to `table_grammar`.
ObjectiveTerms objective(const std::vector<Frontier>& frontiers, const Grammar& grammar,
                         const TranslationTable* translation, const Grammar& table_grammar,
                         const std::vector<std::vector<std::string>>& merges, const CompressionParams& params,
                         Grammar* fitted = nullptr);

// Objective after adding `candidate` and rewriting the frontiers.
double score(const Candidate& candidate, const std::vector<Frontier>& frontiers, const Grammar& grammar,
             const TranslationTable* translation, const CompressionParams& params);

CompressionResult compress(const std::vector<Frontier>& frontiers, const Grammar& grammar,
                           const TranslationTable* translation, const CompressionParams& params);

// One line per accepted abstraction with the objective components.
std::string compression_report(const CompressionResult& result);

}  // namespace lingo

#endif  // LINGO_COMPRESSION_HPP_
