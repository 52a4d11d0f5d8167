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

#ifndef LINGO_TYPE_HPP_
#define LINGO_TYPE_HPP_

#include <cstdint>
#include <memory>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace lingo {

class Type;
using TypePtr = std::shared_ptr<const Type>;

// Simple types: variables and named constructors. The arrow is the
// constructor "->" with two arguments.
class Type {
 public:
  enum class Kind { kVariable, kConstructor };

  static TypePtr variable(int id);
  static TypePtr constructor(std::string name, std::vector<TypePtr> args = {});
  static TypePtr arrow(TypePtr from, TypePtr to);
  // a -> b -> ... -> result
  static TypePtr arrows(const std::vector<TypePtr>& from, TypePtr result);

  Kind kind() const { return kind_; }
  bool is_variable() const { return kind_ == Kind::kVariable; }
  bool is_arrow() const;
  int id() const { return id_; }
  const std::string& name() const { return name_; }
  const std::vector<TypePtr>& args() const { return args_; }
  bool is_polymorphic() const { return polymorphic_; }

  // Only valid for arrows.
  const TypePtr& from() const { return args_[0]; }
  const TypePtr& to() const { return args_[1]; }

  // Argument types of an arrow chain, left to right.
  std::vector<TypePtr> arguments() const;
  // The final non-arrow codomain.
  TypePtr result(const TypePtr& self) const;

  std::string str() const;

  Type(Kind kind, int id, std::string name, std::vector<TypePtr> args);

 private:
  Kind kind_;
  int id_ = -1;
  std::string name_;
  std::vector<TypePtr> args_;
  bool polymorphic_ = false;
};

inline constexpr std::string_view kArrowName = "->";

bool types_equal(const TypePtr& a, const TypePtr& b);

// Type with its variables renumbered 0..n-1 in order of first appearance.
// Rendered with the same renaming; useful as a cache key.
std::string canonical_key(const TypePtr& t);
TypePtr canonicalize(const TypePtr& t);

class TypeError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Parses "(t0 → t1) → list(t0) → list(t1)"; "->" is accepted for "→".
// Variables are written t<N>.
TypePtr parse_type(std::string_view text);

// A polymorphic type scheme: variables t0..t(n-1) are universally
// quantified.
struct TypeScheme {
  TypePtr type;
  int quantified = 0;

  static TypeScheme generalize(const TypePtr& t);
  static TypeScheme parse(std::string_view text) { return generalize(parse_type(text)); }
  std::string str() const { return type->str(); }
};

// Substitution with a trail so tentative unifications can be undone.
class TypeContext {
 public:
  struct Mark {
    std::size_t trail = 0;
    int next = 0;
  };

  TypePtr fresh();
  TypePtr instantiate(const TypeScheme& scheme);
  TypePtr apply(const TypePtr& t) const;
  bool unify(const TypePtr& a, const TypePtr& b);

  Mark mark() const { return {trail_.size(), next_}; }
  void undo(const Mark& m);
  // Forget the trail; bindings made so far become permanent.
  void commit() { trail_.clear(); }

  int next_variable() const { return next_; }

 private:
  TypePtr resolve(const TypePtr& t) const;
  bool occurs(int id, const TypePtr& t) const;
  void bind(int id, TypePtr t);

  std::vector<TypePtr> bindings_;
  std::vector<int> trail_;
  int next_ = 0;
};

}  // namespace lingo

#endif  // LINGO_TYPE_HPP_
