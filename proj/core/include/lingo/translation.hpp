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

// Word/primitive alignment model between programs and descriptions.

#ifndef LINGO_TRANSLATION_HPP_
#define LINGO_TRANSLATION_HPP_

#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "lingo/grammar.hpp"
#include "lingo/term.hpp"
#include "lingo/type.hpp"

namespace lingo {

inline constexpr const char* kLambdaToken = "λ";
// Empty source/target used by the alignment model.
inline constexpr const char* kNullToken = "<null>";
inline constexpr double kTranslationFloor = 1e-7;

// Pre-order tokens: λ markers, variables ($i), primitive and invented names.
std::vector<std::string> linearize(const Term& program);
// Inverse of linearize for η-long programs of type `request`.
Term delinearize(const std::vector<std::string>& tokens, const TypePtr& request, const Grammar& grammar);

struct TranslationParams {
  int em_iterations = 10;
  double me_alpha = 0.1;
  bool me_enabled = true;
  double lm_smoothing = 0.1;
  double lm_weight = 0.2;
  int beam_width = 5;
  int words_per_token = 3;

  bool valid() const { return em_iterations >= 1 && me_alpha > 0 && lm_smoothing > 0; }
};

struct TranslationPair {
  std::vector<std::string> program;
  std::vector<std::string> words;
};

class TranslationTable {
 public:
  // t[w|l]; 0 when unseen.
  double word_given_token(const std::string& w, const std::string& l) const;
  // t[l|w]; 0 when unseen.
  double token_given_word(const std::string& l, const std::string& w) const;
  // Expected alignment count of (l, w) from the word-given-token direction.
  double count(const std::string& l, const std::string& w) const;

  // l -> w -> t[w|l]
  const std::map<std::string, std::map<std::string, double>>& words_by_token() const { return t_wl_; }
  // w -> l -> t[l|w]
  const std::map<std::string, std::map<std::string, double>>& tokens_by_word() const { return t_lw_; }
  // l -> w -> count
  const std::map<std::string, std::map<std::string, double>>& counts() const { return counts_; }

  const std::set<std::string>& vocab_known() const { return known_; }
  const std::set<std::string>& vocab_new() const { return new_; }
  bool empty() const { return t_wl_.empty(); }

  // Corpus log-likelihood of the word-given-token model, one value per
  // EM iteration plus the final parameters.
  const std::vector<double>& log_likelihood() const { return ll_wl_; }
  const std::vector<double>& reverse_log_likelihood() const { return ll_lw_; }

  // Rows (l, w, t[w|l], t[l|w], count), sorted, round-trip precision.
  std::string to_text() const;
  static TranslationTable from_text(const std::string& text);
  void save(const std::string& path) const;
  static TranslationTable load(const std::string& path);

  // Largest deviation of any conditional row from summing to one.
  double normalization_error() const;

 private:
  friend TranslationTable train_em(const std::vector<TranslationPair>&, const TranslationParams&);
  friend TranslationTable apply_mutual_exclusivity(const TranslationTable&, const Grammar&,
                                                   const std::vector<std::string>&, double);

  std::map<std::string, std::map<std::string, double>> t_wl_;
  std::map<std::string, std::map<std::string, double>> t_lw_;
  std::map<std::string, std::map<std::string, double>> counts_;
  std::set<std::string> known_;
  std::set<std::string> new_;
  std::vector<double> ll_wl_;
  std::vector<double> ll_lw_;
};

// IBM Model 1 EM in both directions, each side padded with kNullToken.
TranslationTable train_em(const std::vector<TranslationPair>& pairs, const TranslationParams& params);

// Injects α / P[l] pseudo-alignments between every new word and every
// grammar production, then renormalizes.
TranslationTable apply_mutual_exclusivity(const TranslationTable& table, const Grammar& grammar,
                                          const std::vector<std::string>& new_words, double alpha);

// P[l] under the grammar weights, normalized over all productions.
std::map<std::string, double> production_marginals(const Grammar& grammar);

// log of the best-alignment probability: each word aligns to its most
// likely program token (or kNullToken), unseen pairs floored.
double score_description(const std::vector<std::string>& words, const Term& program, const TranslationTable& table);

class SmoothedLM {
 public:
  SmoothedLM() = default;
  SmoothedLM(const std::vector<std::vector<std::string>>& corpus, double k);

  // log P(w | prev); "<s>" starts and "</s>" ends a sentence.
  double log_prob(const std::string& prev, const std::string& w) const;
  double sentence_log_prob(const std::vector<std::string>& words) const;
  const std::set<std::string>& vocabulary() const { return vocab_; }
  double smoothing() const { return k_; }

 private:
  double k_ = 0.1;
  std::set<std::string> vocab_;  // includes "</s>" and "<unk>"
  std::map<std::string, std::map<std::string, double>> bigrams_;
  std::map<std::string, double> unigrams_;
};

enum class DecodeMode { kGreedy, kSample };

std::vector<std::string> generate_description(const Term& program, const TranslationTable& table, const SmoothedLM& lm,
                                              DecodeMode mode, std::uint64_t seed,
                                              const TranslationParams& params = {});

// A token is aligned to a word when it holds at least this share of the
// word's alignment counts.
inline constexpr double kAlignmentShare = 0.1;

// Σ count(l, w) · -log t[w|l] over grammar productions l.
double translation_description_length(const TranslationTable& table, const Grammar& grammar);

// Description length after abstractions with the given subcomponent sets
// (in acceptance order) absorb the alignments they fully cover. A word's
// aligned tokens merge into one when an abstraction's primitives are
// exactly the union of two or more of them; the merged entry keeps the
// largest count and the noisy-or probability.
double refactored_description_length(const TranslationTable& table, const Grammar& grammar,
                                     const std::vector<std::vector<std::string>>& merges);

}  // namespace lingo

#endif  // LINGO_TRANSLATION_HPP_
