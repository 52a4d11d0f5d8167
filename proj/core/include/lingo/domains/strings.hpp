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

#ifndef LINGO_DOMAINS_STRINGS_HPP_
#define LINGO_DOMAINS_STRINGS_HPP_

#include <string>
#include <vector>

#include "lingo/domain.hpp"

namespace lingo {

class StringExecutor : public DomainExecutor {
 public:
  StringExecutor();
  std::optional<PrimitiveInfo> resolve(std::string_view name) const override;
  Value call(int id, std::span<const Value> args, Applier& applier) const override;

 private:
  std::vector<std::pair<std::string, int>> table_;
};

// Transducer families used by the generator.
enum class StringOp { kRemove, kReplace, kDouble, kAdd };
enum class StringSite { kFirst, kLast, kEvery };

struct StringTransducer {
  StringOp op = StringOp::kRemove;
  StringSite site = StringSite::kEvery;
  char target = 'a';  // matched letter (kEvery)
  char insert = 'b';  // replacement or added letter

  std::string apply(const std::string& input) const;
  Term program() const;
  std::vector<std::string> description() const;
};

class StringDomain : public Domain {
 public:
  static constexpr int kExamplesPerTask = 30;

  std::string name() const override { return "strings"; }
  const DomainExecutor& executor() const override { return executor_; }
  std::vector<std::pair<std::string, std::string>> primitives() const override;
  std::vector<double> task_features(const Task& task) const override;
  int feature_size() const override;
  nlohmann::json encode_value(const Value& v) const override;
  Value decode_value(const nlohmann::json& j) const override;
  std::vector<std::vector<Value>> sample_inputs(const TypePtr& request, int n, Rng& rng) const override;
  int examples_per_sample() const override { return 10; }
  std::vector<Task> generate(int n, std::uint64_t seed) const override;
  int default_iterations() const override { return 10; }

  static std::string sample_word(Rng& rng, char must_contain = 0);

 private:
  StringExecutor executor_;
};

}  // namespace lingo

#endif  // LINGO_DOMAINS_STRINGS_HPP_
