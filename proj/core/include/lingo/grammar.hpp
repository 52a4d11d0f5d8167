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

#ifndef LINGO_GRAMMAR_HPP_
#define LINGO_GRAMMAR_HPP_

#include <deque>
#include <map>
#include <memory>
#include <optional>
#include <random>
#include <shared_mutex>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "lingo/frontier.hpp"
#include "lingo/infer.hpp"
#include "lingo/term.hpp"
#include "lingo/type.hpp"

namespace lingo {

struct Production {
  Term term;  // primitive leaf or invented node
  TypeScheme scheme;
  double log_weight = 0.0;
  // Initial-library primitives in the inlined body of an invented
  // production (multiset, sorted). Empty for primitives.
  std::vector<std::string> subcomponents;

  const std::string& key() const { return key_; }
  int arity() const { return arity_; }

  Production(Term t, TypeScheme s, double w = 0.0, std::vector<std::string> subs = {});

 private:
  std::string key_;
  int arity_ = 0;
};

struct CompressionParams {
  double structure_penalty = 1.5;
  double pseudocounts = 30.0;
  int max_new_abstractions = 5;
  int max_arity = 3;
  int refactoring_depth = 2;
  // Weight of the translation description length in the joint objective.
  double translation_weight = 1.0;
  // Candidates kept for exact scoring after the cheap pre-ranking.
  int candidates_to_score = 60;

  bool valid() const { return structure_penalty > 0 && pseudocounts > 0; }
};

// The library with its weights. Immutable; learning produces new versions.
// Productions are kept sorted by printed term.
class Grammar {
 public:
  Grammar() = default;
  Grammar(std::vector<Production> productions, double variable_log_weight = 0.0, int version = 0);

  // Every primitive with log-weight 0.
  static Grammar uniform(const std::vector<std::pair<std::string, std::string>>& primitives);

  const std::vector<Production>& productions() const { return productions_; }
  std::size_t size() const { return productions_.size(); }
  const Production& operator[](std::size_t i) const { return productions_[i]; }
  double variable_log_weight() const { return variable_log_weight_; }
  int version() const { return version_; }
  int max_arity() const;

  std::optional<int> index_of(const Term& leaf) const;
  std::optional<int> index_of(const std::string& key) const;
  const TypeScheme* primitive_scheme(std::string_view name) const;
  SchemeLookup lookup() const;

  // Adds an invented abstraction with log-weight 0; bumps the version.
  Grammar with_invented(const Term& body) const;
  Grammar with_weights(const std::vector<double>& weights, double variable_weight) const;
  Grammar with_version(int version) const;

  // Primitives that are not invented.
  std::vector<std::string> primitive_names() const;

  nlohmann::json to_json() const;
  static Grammar from_json(const nlohmann::json& j);

 private:
  std::vector<Production> productions_;
  std::unordered_map<std::string, int> by_key_;
  double variable_log_weight_ = 0.0;
  int version_ = 0;
};

inline constexpr int kVariableChoice = -1;
inline constexpr int kRootParent = -1;

// Which productions can fill a hole of a given request type. Legality
// depends only on the request up to variable renaming, so results are
// cached per canonical request. Thread-safe.
class ChoiceSpace {
 public:
  explicit ChoiceSpace(const Grammar& grammar);

  const Grammar& grammar() const { return *grammar_; }

  // Request must already be resolved against its context.
  int request_id(const TypePtr& applied_request) const;
  const std::vector<int>& legal(int request_id) const;
  std::size_t request_count() const;

  // Indices (de Bruijn) of variables in `env` whose return type unifies
  // with `request`. `env.back()` is the type of $0.
  std::vector<int> legal_variables(TypeContext& ctx, const TypePtr& request,
                                   const std::vector<TypePtr>& env) const;

  // Commits `choice` (production index or kVariableChoice with
  // var_index) against `request`; returns argument types, or nullopt on
  // unification failure (context is then restored).
  std::optional<std::vector<TypePtr>> commit(TypeContext& ctx, const TypePtr& request, int choice,
                                             int var_index, const std::vector<TypePtr>& env) const;

 private:
  struct Entry {
    TypePtr request;
    std::vector<int> legal;
  };

  const Grammar* grammar_;
  mutable std::shared_mutex mu_;
  mutable std::unordered_map<std::string, int> ids_;
  mutable std::deque<Entry> entries_;
};

// A distribution over programs that enumeration and scoring can use: the
// grammar prior or a per-task recognition bigram model.
class GrammarLike {
 public:
  virtual ~GrammarLike() = default;

  virtual const Grammar& grammar() const = 0;
  virtual const ChoiceSpace& space() const = 0;
  // Unnormalized log weight of `child` (production or kVariableChoice)
  // filling argument `slot` of `parent` (production or kRootParent).
  virtual double log_weight(int parent, int slot, int child) const = 0;
  // Whether log_weight depends on the parent at all.
  virtual bool contextual() const { return true; }

  // Normalized log probability of one choice among the legal candidates
  // for request `request_id` with `variables` legal variables.
  double log_prob(int parent, int slot, int request_id, int variables, int chosen) const;
  // log Σ over the legal candidates; log_prob = log_weight - log_normalizer.
  double log_normalizer(int parent, int slot, int request_id, int variables) const;
  // Largest log_prob among the legal candidates (-inf when none).
  double best_log_prob(int parent, int slot, int request_id, int variables) const;

 private:
  struct Summary {
    double lse;
    double max_weight;
  };
  Summary summary(int parent, int slot, int request_id) const;

  mutable std::shared_mutex mu_;
  mutable std::unordered_map<std::uint64_t, Summary> cache_;
};

// The generative prior defined by the grammar weights (ignores context).
class PriorView : public GrammarLike {
 public:
  explicit PriorView(const Grammar& grammar);
  // Shares an existing choice space (must outlive this view).
  PriorView(const Grammar& grammar, std::shared_ptr<const ChoiceSpace> space);

  const Grammar& grammar() const override { return *grammar_; }
  const ChoiceSpace& space() const override { return *space_; }
  double log_weight(int parent, int slot, int child) const override;
  bool contextual() const override { return false; }

 private:
  const Grammar* grammar_;
  std::shared_ptr<const ChoiceSpace> space_;
};

// One decision in a program's derivation.
struct ChoiceRecord {
  int parent = kRootParent;
  int slot = 0;
  int request = -1;  // ChoiceSpace request id
  int chosen = kVariableChoice;
  int variables = 0;  // number of legal variables
};

struct Derivation {
  std::vector<ChoiceRecord> choices;
};

// Walks the derivation of an η-long program against `request`. Throws
// TypeError when the program is ill-typed or not fully applied.
Derivation derive(const Term& program, const TypePtr& request, const ChoiceSpace& space);

double log_prior(const Derivation& d, const GrammarLike& dist);
double log_prior(const Term& program, const TypePtr& request, const GrammarLike& dist);
double log_prior(const Term& program, const TypePtr& request, const Grammar& grammar);

// Top-down sample from `dist`; nullopt when a branch exceeds `max_depth`
// nested choices or dead-ends.
std::optional<Term> sample_program(const GrammarLike& dist, const TypePtr& request, std::mt19937_64& rng,
                                   int max_depth = 8);

struct LegalProduction {
  int production = kVariableChoice;  // or kVariableChoice
  int var_index = -1;
  TypePtr type;  // instantiated type under the request
  double probability = 0.0;
};

// Productions (and in-scope variables) that can fill `request`, with
// probabilities renormalized over that set. `env.back()` types $0.
std::vector<LegalProduction> legal_productions(const Grammar& grammar, const TypePtr& request,
                                               const std::vector<TypePtr>& env = {});

double grammar_description_length(const Grammar& grammar, double structure_penalty);

// Re-estimates weights from the frontiers: usage counts weighted by each
// entry's posterior share, smoothed by pseudocounts, iterated to a fixed
// point.
Grammar fit_weights(const Grammar& grammar, const std::vector<Frontier>& frontiers, double pseudocounts);

// Same, from precomputed derivations grouped per frontier.
std::vector<double> fit_weights_from(const Grammar& grammar, const ChoiceSpace& space,
                                     const std::vector<std::vector<Derivation>>& groups,
                                     double pseudocounts, double* variable_weight);

// Σ over frontiers of -log Σ_entries P(entry), the program description
// length.
double program_description_length(const std::vector<std::vector<Derivation>>& groups,
                                  const GrammarLike& dist);

}  // namespace lingo

#endif  // LINGO_GRAMMAR_HPP_
