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

#ifndef LINGO_TERM_HPP_
#define LINGO_TERM_HPP_

#include <cstddef>
#include <functional>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace lingo {

enum class TermKind {
  kPrimitive,    // named primitive or constant, resolved by the domain
  kVariable,     // de Bruijn index
  kAbstraction,  // (lambda BODY)
  kApplication,  // (f x)
  kInvented,     // learned abstraction, printed #BODY
};

// Immutable λ-calculus term with de Bruijn variables. Copying is cheap
// (shared structure); equality is structural, so α-equivalent terms
// compare equal.
class Term {
 public:
  Term() = default;

  static Term primitive(std::string name);
  static Term variable(int index);
  static Term abstraction(Term body);
  static Term application(Term fn, Term arg);
  static Term invented(Term body);
  // ((f a) b) ...
  static Term apply_all(Term fn, const std::vector<Term>& args);

  bool valid() const { return node_ != nullptr; }
  TermKind kind() const;
  bool is_primitive() const { return kind() == TermKind::kPrimitive; }
  bool is_variable() const { return kind() == TermKind::kVariable; }
  bool is_abstraction() const { return kind() == TermKind::kAbstraction; }
  bool is_application() const { return kind() == TermKind::kApplication; }
  bool is_invented() const { return kind() == TermKind::kInvented; }
  // Primitive or invented: something a grammar production can name.
  bool is_production_leaf() const { return is_primitive() || is_invented(); }

  const std::string& name() const;
  int index() const;
  // Abstraction body or invented body.
  const Term& body() const;
  const Term& fn() const;
  const Term& arg() const;

  std::size_t hash() const;
  // Number of symbol occurrences (primitives, invented, variables).
  int size() const;
  // Number of binders needed to close the term (0 when closed).
  int free_depth() const;
  bool closed() const { return free_depth() == 0; }

  // Application spine: head and arguments in order.
  Term head() const;
  std::vector<Term> arguments() const;

  std::string str() const;

  friend bool operator==(const Term& a, const Term& b);
  friend bool operator!=(const Term& a, const Term& b) { return !(a == b); }
  // Canonical order: by printed form.
  friend bool operator<(const Term& a, const Term& b) { return a.str() < b.str(); }

 private:
  struct Node;
  explicit Term(std::shared_ptr<const Node> n) : node_(std::move(n)) {}
  std::shared_ptr<const Node> node_;
};

struct Term::Node {
  TermKind kind;
  std::string name;
  int index = 0;
  Term left;
  Term right;
  std::size_t hash = 0;
  int leaves = 0;
  int free_depth = 0;
};

inline TermKind Term::kind() const { return node_->kind; }
inline const std::string& Term::name() const { return node_->name; }
inline int Term::index() const { return node_->index; }
inline const Term& Term::body() const { return node_->left; }
inline const Term& Term::fn() const { return node_->left; }
inline const Term& Term::arg() const { return node_->right; }
inline std::size_t Term::hash() const { return node_->hash; }
inline int Term::size() const { return node_->leaves; }
inline int Term::free_depth() const { return node_->free_depth; }

struct TermHash {
  std::size_t operator()(const Term& t) const { return t.hash(); }
};

class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& what, std::size_t position)
      : std::runtime_error(what + " at offset " + std::to_string(position)), position_(position) {}
  std::size_t position() const { return position_; }

 private:
  std::size_t position_;
};

class UnboundVariableError : public ParseError {
 public:
  using ParseError::ParseError;
};

// Parses the canonical s-expression form: "(lambda BODY)", "$N", "(f a b)",
// "#BODY" for invented abstractions, bare symbols for primitives.
Term parse(std::string_view text);

// Adds `amount` to every variable with index >= cutoff.
Term shift(const Term& t, int amount, int cutoff = 0);
// Replaces variable `index` by `value` and lowers higher free indices.
Term substitute(const Term& body, const Term& value, int index = 0);

struct BetaResult {
  Term term;
  bool normalized = true;
  int steps = 0;
};

// Normal-order reduction to β-normal form. Invented abstractions are
// opaque unless inlined first.
BetaResult beta_reduce(const Term& t, int max_steps = 10000);

// Replaces every invented node by its body.
Term inline_invented(const Term& t);

// Pre-order visit of every subterm with the number of enclosing binders.
void visit(const Term& t, const std::function<void(const Term&, int depth)>& fn, int depth = 0);

}  // namespace lingo

#endif  // LINGO_TERM_HPP_
