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

#ifndef LINGO_VALUE_HPP_
#define LINGO_VALUE_HPP_

#include <cstdint>
#include <memory>
#include <string>
#include <variant>
#include <vector>

namespace lingo {

class Value;
using ValueList = std::vector<Value>;

// Runtime function value; defined by the evaluator.
struct FunctionValue;

// Domain-specific payload (e.g. turtle state). Immutable.
class DomainObject {
 public:
  virtual ~DomainObject() = default;
  virtual bool equals(const DomainObject& other) const = 0;
  virtual std::string describe() const = 0;
};

class Value {
 public:
  using ListPtr = std::shared_ptr<const ValueList>;
  using FunctionPtr = std::shared_ptr<const FunctionValue>;
  using ObjectPtr = std::shared_ptr<const DomainObject>;
  using Storage =
      std::variant<std::monostate, bool, std::int64_t, double, std::string, ListPtr, FunctionPtr, ObjectPtr>;

  Value() = default;
  Value(bool b) : v_(b) {}  // NOLINT(google-explicit-constructor)
  Value(std::int64_t i) : v_(i) {}  // NOLINT(google-explicit-constructor)
  Value(double d) : v_(d) {}  // NOLINT(google-explicit-constructor)
  Value(std::string s) : v_(std::move(s)) {}  // NOLINT(google-explicit-constructor)
  Value(const char* s) : v_(std::string(s)) {}  // NOLINT(google-explicit-constructor)
  Value(ValueList items) : v_(std::make_shared<const ValueList>(std::move(items))) {}  // NOLINT
  Value(FunctionPtr f) : v_(std::move(f)) {}  // NOLINT(google-explicit-constructor)
  Value(ObjectPtr o) : v_(std::move(o)) {}  // NOLINT(google-explicit-constructor)

  bool is_none() const { return std::holds_alternative<std::monostate>(v_); }
  bool is_bool() const { return std::holds_alternative<bool>(v_); }
  bool is_int() const { return std::holds_alternative<std::int64_t>(v_); }
  bool is_real() const { return std::holds_alternative<double>(v_); }
  bool is_string() const { return std::holds_alternative<std::string>(v_); }
  bool is_list() const { return std::holds_alternative<ListPtr>(v_); }
  bool is_function() const { return std::holds_alternative<FunctionPtr>(v_); }
  bool is_object() const { return std::holds_alternative<ObjectPtr>(v_); }

  bool as_bool() const { return std::get<bool>(v_); }
  std::int64_t as_int() const { return std::get<std::int64_t>(v_); }
  double as_real() const { return std::get<double>(v_); }
  const std::string& as_string() const { return std::get<std::string>(v_); }
  const ValueList& as_list() const { return *std::get<ListPtr>(v_); }
  const FunctionPtr& as_function() const { return std::get<FunctionPtr>(v_); }
  const ObjectPtr& as_object() const { return std::get<ObjectPtr>(v_); }

  const Storage& storage() const { return v_; }

  // Human-readable rendering, e.g. ["a", "b"].
  std::string str() const;

  friend bool operator==(const Value& a, const Value& b);
  friend bool operator!=(const Value& a, const Value& b) { return !(a == b); }

 private:
  Storage v_;
};

}  // namespace lingo

#endif  // LINGO_VALUE_HPP_
