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

// Task- and language-conditioned bigram model that reweights enumeration.

#ifndef LINGO_RECOGNITION_HPP_
#define LINGO_RECOGNITION_HPP_

#include <cstdint>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "lingo/domain.hpp"
#include "lingo/frontier.hpp"
#include "lingo/grammar.hpp"
#include "lingo/translation.hpp"

namespace lingo {

inline constexpr int kEmbeddingSize = 64;
inline constexpr const char* kUnknownToken = "<unk>";

struct RecognitionParams {
  int embedding = kEmbeddingSize;  // per-encoder output width
  int hidden = 64;                 // trunk width
  int hash_buckets = 512;          // language features; half unigram, half bigram
  double learning_rate = 0.05;
  int steps = 10000;
  bool use_language = true;  // false builds a model without a language slot
  // Chance that a training example is shown without its description.
  double language_dropout = 0.0;

  bool valid() const {
    return embedding > 0 && hidden > 0 && hash_buckets >= 2 && hash_buckets % 2 == 0 && learning_rate > 0 &&
           steps >= 0 && language_dropout >= 0 && language_dropout <= 1;
  }
};

// Dense row-major matrix with a bias per row.
struct Layer {
  int rows = 0;
  int cols = 0;
  std::vector<double> w;  // rows * cols
  std::vector<double> b;  // rows
};

// Shape (|L|+1) x (|L|+2) x A over parent (root first), child (productions,
// then variable, then end) and argument slot.
class BigramTensor {
 public:
  BigramTensor() = default;
  BigramTensor(int productions, int arity, std::vector<double> logits);

  int parents() const { return productions_ + 1; }
  int children() const { return productions_ + 2; }
  int arity() const { return arity_; }
  std::size_t size() const { return logits_.size(); }

  // parent/child use grammar indices with kRootParent / kVariableChoice.
  double at(int parent, int child, int slot) const;
  static std::size_t index(int productions, int arity, int parent, int child, int slot);
  const std::vector<double>& logits() const { return logits_; }

 private:
  int productions_ = 0;
  int arity_ = 1;
  std::vector<double> logits_;
};

// The tensor over a grammar as a GrammarLike for enumeration.
class RecognitionView : public GrammarLike {
 public:
  RecognitionView(const Grammar& grammar, BigramTensor tensor);
  RecognitionView(const Grammar& grammar, std::shared_ptr<const ChoiceSpace> space, BigramTensor tensor);

  const Grammar& grammar() const override { return *grammar_; }
  const ChoiceSpace& space() const override { return *space_; }
  double log_weight(int parent, int slot, int child) const override;
  const BigramTensor& tensor() const { return tensor_; }

 private:
  const Grammar* grammar_;
  std::shared_ptr<const ChoiceSpace> space_;
  BigramTensor tensor_;
};

// Raw hashed language features: unigram counts in the first half, adjacent
// bigram counts in the second. Tokens outside `vocabulary` become "<unk>".
std::vector<double> language_features(const std::vector<std::string>& tokens, const std::set<std::string>& vocabulary,
                                      int buckets);

// One supervised example: raw task features, description and target.
struct RecognitionExample {
  std::vector<double> task_features;
  std::vector<std::string> description;
  Term program;
  TypePtr request;
};

class RecognitionModel {
 public:
  RecognitionModel() = default;
  // Xavier-initialized encoders and trunk; zero output layer.
  RecognitionModel(const Grammar& grammar, int task_feature_size, std::set<std::string> vocabulary,
                   const RecognitionParams& params, std::uint64_t seed);

  int grammar_version() const { return grammar_version_; }
  int productions() const { return productions_; }
  int arity() const { return arity_; }
  std::uint64_t seed() const { return seed_; }
  const RecognitionParams& params() const { return params_; }
  const std::set<std::string>& vocabulary() const { return vocabulary_; }
  bool has_language() const { return params_.use_language; }

  // 64-d encodings: tanh of a linear projection of the raw features.
  std::vector<double> encode_task(const std::vector<double>& raw) const;
  std::vector<double> encode_language(const std::vector<std::string>& tokens) const;

  // Throws std::invalid_argument when the grammar is not the model's.
  BigramTensor predict(const Grammar& grammar, const std::vector<double>& task_features,
                       const std::optional<std::vector<std::string>>& description) const;

  // All parameter blocks, in a fixed order.
  std::vector<Layer*> blocks();
  std::vector<const Layer*> blocks() const;
  std::size_t parameter_count() const;

  // Fixed-precision text: header, vocabulary, then every block.
  std::string to_text() const;
  static RecognitionModel from_text(const std::string& text);
  void save(const std::string& path) const;
  static RecognitionModel load(const std::string& path);

 private:
  friend class RecognitionTrainer;

  RecognitionParams params_;
  int grammar_version_ = 0;
  int productions_ = 0;
  int arity_ = 1;
  std::uint64_t seed_ = 0;
  std::set<std::string> vocabulary_;
  Layer task_;
  Layer language_;
  Layer hidden1_;
  Layer hidden2_;
  Layer output_;
};

// Negative log-likelihood of the example's derivation and its gradient
// with respect to every block (same order as blocks()).
double example_loss(const RecognitionModel& model, const Grammar& grammar, const RecognitionExample& example,
                    bool with_language, std::vector<Layer>* gradient = nullptr);

struct TrainingReport {
  int steps = 0;
  double mean_loss_first = 0.0;  // over the first tenth of the steps
  double mean_loss_last = 0.0;   // over the last tenth
  int skipped = 0;               // examples whose program the grammar cannot derive
};

// SGD with batch size one. Each step draws from `frontier_examples` or
// `joint_examples` with probability one half (whichever is non-empty when
// the other is empty).
RecognitionModel train(const RecognitionModel& model, const Grammar& grammar,
                       const std::vector<RecognitionExample>& frontier_examples,
                       const std::vector<RecognitionExample>& joint_examples, int steps, std::uint64_t seed,
                       TrainingReport* report = nullptr);

struct JointSample {
  Task task;
  std::vector<std::string> description;
  Term program;
};

// Programs drawn from the grammar prior for the given requests, run on
// sampled inputs, and described with the translation table (no
// description when `table` is null or empty). Samples that fail to run or
// whose output copies an input are redrawn. Stops after 200n attempts;
// `exhausted` reports a short batch.
std::vector<JointSample> sample_joint(const Grammar& grammar, const TranslationTable* table, const SmoothedLM* lm,
                                      const Domain& domain, const std::vector<TypePtr>& requests, int n,
                                      std::uint64_t seed, bool* exhausted = nullptr);

}  // namespace lingo

#endif  // LINGO_RECOGNITION_HPP_
