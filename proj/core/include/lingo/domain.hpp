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

#ifndef LINGO_DOMAIN_HPP_
#define LINGO_DOMAIN_HPP_

#include <cstdint>
#include <memory>
#include <optional>
#include <random>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "lingo/eval.hpp"
#include "lingo/grammar.hpp"
#include "lingo/term.hpp"
#include "lingo/type.hpp"
#include "lingo/value.hpp"

namespace lingo {

using Rng = std::mt19937_64;

struct Example {
  std::vector<Value> inputs;
  Value output;
};

enum class Split { kTrain, kTest };

struct Task {
  std::string id;
  TypePtr request;
  std::vector<Example> examples;
  // Whitespace tokens; empty when the task has no description.
  std::vector<std::string> description;
  Split split = Split::kTrain;
  std::optional<Term> ground_truth;

  bool has_description() const { return !description.empty(); }
};

std::vector<std::string> tokenize(std::string_view text);
std::string join_tokens(const std::vector<std::string>& tokens);

// An executable domain: primitives, their semantics, task generation and
// task features.
class Domain {
 public:
  virtual ~Domain() = default;

  virtual std::string name() const = 0;
  virtual const DomainExecutor& executor() const = 0;
  // (name, type) of every initial primitive.
  virtual std::vector<std::pair<std::string, std::string>> primitives() const = 0;
  Grammar initial_grammar() const { return Grammar::uniform(primitives()); }

  // Fixed-length raw features for the recognition task encoder.
  virtual std::vector<double> task_features(const Task& task) const = 0;
  virtual int feature_size() const = 0;

  virtual nlohmann::json encode_value(const Value& v) const = 0;
  virtual Value decode_value(const nlohmann::json& j) const = 0;

  // Fresh example inputs for a request (joint sampling).
  virtual std::vector<std::vector<Value>> sample_inputs(const TypePtr& request, int n, Rng& rng) const = 0;
  // Number of examples a sampled task should carry.
  virtual int examples_per_sample() const { return 1; }

  // Generates `n` tasks with descriptions and ground-truth programs.
  virtual std::vector<Task> generate(int n, std::uint64_t seed) const = 0;

  // Default training iterations for this domain.
  virtual int default_iterations() const = 0;

  bool output_equal(const Value& a, const Value& b) const { return executor().output_equal(a, b); }
};

std::unique_ptr<Domain> make_domain(std::string_view name);

// Dataset files: a JSON document with a domain name and one record per
// task.
nlohmann::json task_to_json(const Task& task, const Domain& domain);
Task task_from_json(const nlohmann::json& j, const Domain& domain);
void save_dataset(const std::string& path, const std::vector<Task>& tasks, const Domain& domain);
std::vector<Task> load_dataset(const std::string& path, const Domain& domain);

}  // namespace lingo

#endif  // LINGO_DOMAIN_HPP_
