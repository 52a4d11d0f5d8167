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

#ifndef LINGO_EVAL_HPP_
#define LINGO_EVAL_HPP_

#include <exception>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "lingo/term.hpp"
#include "lingo/value.hpp"

namespace lingo {

struct EvalLimit {
  int max_steps = 10000;
  int max_depth = 512;

  bool valid() const { return max_steps > 0 && max_depth > 0; }
};

// Raised by primitive implementations (e.g. car of an empty list). The
// evaluator turns it into a failed outcome; it never escapes evaluate().
class RuntimeFault : public std::exception {
 public:
  explicit RuntimeFault(const char* what) : what_(what) {}
  const char* what() const noexcept override { return what_; }

 private:
  const char* what_;
};

// Lets primitives call back into the evaluator (higher-order primitives).
class Applier {
 public:
  virtual ~Applier() = default;
  virtual Value apply(const Value& fn, const Value& arg) = 0;
};

struct PrimitiveInfo {
  int id = -1;
  int arity = 0;
};

// Semantics of a domain's primitives.
class DomainExecutor {
 public:
  virtual ~DomainExecutor() = default;
  virtual std::optional<PrimitiveInfo> resolve(std::string_view name) const = 0;
  // Called once all `arity` arguments are available; nullary primitives
  // are called with an empty span.
  virtual Value call(int id, std::span<const Value> args, Applier& applier) const = 0;
  virtual bool output_equal(const Value& a, const Value& b) const { return a == b; }
};

enum class EvalStatus { kOk, kStepLimit, kDepthLimit, kRuntimeError, kUnknownPrimitive };

struct EvalOutcome {
  EvalStatus status = EvalStatus::kOk;
  Value value;
  std::string message;

  bool ok() const { return status == EvalStatus::kOk; }
};

// A term lowered against one executor: primitive names resolved and
// constants pre-evaluated. Reusable across argument lists.
class CompiledProgram {
 public:
  struct Impl;

  CompiledProgram(const Term& term, const DomainExecutor& executor);
  ~CompiledProgram();
  CompiledProgram(CompiledProgram&&) noexcept;
  CompiledProgram& operator=(CompiledProgram&&) noexcept;

  bool ok() const;
  const std::string& error() const;

  // Applies the program to `args` in order (call-by-value).
  EvalOutcome run(std::span<const Value> args, const EvalLimit& limit) const;

 private:
  std::shared_ptr<Impl> impl_;
};

EvalOutcome evaluate(const Term& term, std::span<const Value> args, const DomainExecutor& executor,
                     const EvalLimit& limit = {});

}  // namespace lingo

#endif  // LINGO_EVAL_HPP_
