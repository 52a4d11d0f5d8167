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

#include "lingo/type.hpp"

#include <cctype>
#include <unordered_map>

namespace lingo {

Type::Type(Kind kind, int id, std::string name, std::vector<TypePtr> args)
    : kind_(kind), id_(id), name_(std::move(name)), args_(std::move(args)) {
  if (kind_ == Kind::kVariable) {
    polymorphic_ = true;
  } else {
    for (const auto& a : args_) polymorphic_ = polymorphic_ || a->is_polymorphic();
  }
}

TypePtr Type::variable(int id) {
  return std::make_shared<const Type>(Kind::kVariable, id, std::string{}, std::vector<TypePtr>{});
}

TypePtr Type::constructor(std::string name, std::vector<TypePtr> args) {
  return std::make_shared<const Type>(Kind::kConstructor, -1, std::move(name), std::move(args));
}

TypePtr Type::arrow(TypePtr from, TypePtr to) {
  return constructor(std::string(kArrowName), {std::move(from), std::move(to)});
}

TypePtr Type::arrows(const std::vector<TypePtr>& from, TypePtr result) {
  for (auto it = from.rbegin(); it != from.rend(); ++it) result = arrow(*it, result);
  return result;
}

bool Type::is_arrow() const {
  return kind_ == Kind::kConstructor && args_.size() == 2 && name_ == kArrowName;
}

std::vector<TypePtr> Type::arguments() const {
  std::vector<TypePtr> out;
  const Type* t = this;
  while (t->is_arrow()) {
    out.push_back(t->from());
    t = t->to().get();
  }
  return out;
}

TypePtr Type::result(const TypePtr& self) const {
  TypePtr t = self;
  while (t->is_arrow()) t = t->to();
  return t;
}

namespace {

void render(const Type& t, std::string& out, const std::unordered_map<int, int>* rename) {
  if (t.is_variable()) {
    int id = t.id();
    if (rename) id = rename->at(id);
    out += 't';
    out += std::to_string(id);
    return;
  }
  if (t.is_arrow()) {
    bool paren = t.from()->is_arrow();
    if (paren) out += '(';
    render(*t.from(), out, rename);
    if (paren) out += ')';
    out += " → ";
    render(*t.to(), out, rename);
    return;
  }
  out += t.name();
  if (!t.args().empty()) {
    out += '(';
    for (std::size_t i = 0; i < t.args().size(); ++i) {
      if (i) out += ", ";
      render(*t.args()[i], out, rename);
    }
    out += ')';
  }
}

void collect_order(const Type& t, std::unordered_map<int, int>& rename) {
  if (t.is_variable()) {
    rename.emplace(t.id(), static_cast<int>(rename.size()));
    return;
  }
  for (const auto& a : t.args()) collect_order(*a, rename);
}

TypePtr renumber(const TypePtr& t, const std::unordered_map<int, int>& rename) {
  if (!t->is_polymorphic()) return t;
  if (t->is_variable()) return Type::variable(rename.at(t->id()));
  std::vector<TypePtr> args;
  args.reserve(t->args().size());
  for (const auto& a : t->args()) args.push_back(renumber(a, rename));
  return Type::constructor(t->name(), std::move(args));
}

}  // namespace

std::string Type::str() const {
  std::string out;
  render(*this, out, nullptr);
  return out;
}

bool types_equal(const TypePtr& a, const TypePtr& b) {
  if (a.get() == b.get()) return true;
  if (a->kind() != b->kind()) return false;
  if (a->is_variable()) return a->id() == b->id();
  if (a->name() != b->name() || a->args().size() != b->args().size()) return false;
  for (std::size_t i = 0; i < a->args().size(); ++i)
    if (!types_equal(a->args()[i], b->args()[i])) return false;
  return true;
}

std::string canonical_key(const TypePtr& t) {
  std::string out;
  if (!t->is_polymorphic()) {
    render(*t, out, nullptr);
    return out;
  }
  std::unordered_map<int, int> rename;
  collect_order(*t, rename);
  render(*t, out, &rename);
  return out;
}

TypePtr canonicalize(const TypePtr& t) {
  if (!t->is_polymorphic()) return t;
  std::unordered_map<int, int> rename;
  collect_order(*t, rename);
  return renumber(t, rename);
}

// --- parsing -------------------------------------------------------------

namespace {

class TypeParser {
 public:
  explicit TypeParser(std::string_view s) : s_(s) {}

  TypePtr parse() {
    TypePtr t = parse_arrow();
    skip();
    if (pos_ != s_.size()) fail("trailing input");
    return t;
  }

 private:
  [[noreturn]] void fail(const std::string& what) const {
    throw TypeError("type parse error at " + std::to_string(pos_) + ": " + what + " in '" +
                    std::string(s_) + "'");
  }

  void skip() {
    while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
  }

  bool eat_arrow() {
    skip();
    if (s_.substr(pos_, 2) == "->") {
      pos_ += 2;
      return true;
    }
    if (s_.substr(pos_, 3) == "→") {
      pos_ += 3;
      return true;
    }
    return false;
  }

  TypePtr parse_arrow() {
    TypePtr lhs = parse_atom();
    if (eat_arrow()) return Type::arrow(lhs, parse_arrow());
    return lhs;
  }

  TypePtr parse_atom() {
    skip();
    if (pos_ >= s_.size()) fail("unexpected end");
    if (s_[pos_] == '(') {
      ++pos_;
      TypePtr t = parse_arrow();
      skip();
      if (pos_ >= s_.size() || s_[pos_] != ')') fail("expected ')'");
      ++pos_;
      return t;
    }
    std::size_t start = pos_;
    while (pos_ < s_.size() && (std::isalnum(static_cast<unsigned char>(s_[pos_])) || s_[pos_] == '_'))
      ++pos_;
    if (start == pos_) fail("expected a type name");
    std::string name(s_.substr(start, pos_ - start));
    if (name.size() > 1 && name[0] == 't' &&
        name.find_first_not_of("0123456789", 1) == std::string::npos) {
      return Type::variable(std::stoi(name.substr(1)));
    }
    std::vector<TypePtr> args;
    skip();
    if (pos_ < s_.size() && s_[pos_] == '(') {
      ++pos_;
      while (true) {
        args.push_back(parse_arrow());
        skip();
        if (pos_ < s_.size() && s_[pos_] == ',') {
          ++pos_;
          continue;
        }
        if (pos_ < s_.size() && s_[pos_] == ')') {
          ++pos_;
          break;
        }
        fail("expected ',' or ')'");
      }
    }
    return Type::constructor(std::move(name), std::move(args));
  }

  std::string_view s_;
  std::size_t pos_ = 0;
};

}  // namespace

TypePtr parse_type(std::string_view text) { return TypeParser(text).parse(); }

TypeScheme TypeScheme::generalize(const TypePtr& t) {
  std::unordered_map<int, int> rename;
  collect_order(*t, rename);
  return TypeScheme{renumber(t, rename), static_cast<int>(rename.size())};
}

// --- context -------------------------------------------------------------

TypePtr TypeContext::fresh() {
  bindings_.emplace_back();
  return Type::variable(next_++);
}

namespace {

TypePtr shift_vars(const TypePtr& t, int offset) {
  if (!t->is_polymorphic()) return t;
  if (t->is_variable()) return Type::variable(t->id() + offset);
  std::vector<TypePtr> args;
  args.reserve(t->args().size());
  for (const auto& a : t->args()) args.push_back(shift_vars(a, offset));
  return Type::constructor(t->name(), std::move(args));
}

}  // namespace

TypePtr TypeContext::instantiate(const TypeScheme& scheme) {
  if (scheme.quantified == 0) return scheme.type;
  int offset = next_;
  next_ += scheme.quantified;
  bindings_.resize(static_cast<std::size_t>(next_));
  return shift_vars(scheme.type, offset);
}

TypePtr TypeContext::resolve(const TypePtr& t) const {
  TypePtr cur = t;
  while (cur->is_variable()) {
    auto id = static_cast<std::size_t>(cur->id());
    if (id >= bindings_.size() || !bindings_[id]) break;
    cur = bindings_[id];
  }
  return cur;
}

TypePtr TypeContext::apply(const TypePtr& t) const {
  if (!t->is_polymorphic()) return t;
  TypePtr r = resolve(t);
  if (r->is_variable()) return r;
  if (!r->is_polymorphic()) return r;
  std::vector<TypePtr> args;
  args.reserve(r->args().size());
  bool changed = false;
  for (const auto& a : r->args()) {
    args.push_back(apply(a));
    changed = changed || args.back().get() != a.get();
  }
  if (!changed) return r;
  return Type::constructor(r->name(), std::move(args));
}

bool TypeContext::occurs(int id, const TypePtr& t) const {
  TypePtr r = resolve(t);
  if (r->is_variable()) return r->id() == id;
  for (const auto& a : r->args())
    if (a->is_polymorphic() && occurs(id, a)) return true;
  return false;
}

void TypeContext::bind(int id, TypePtr t) {
  auto idx = static_cast<std::size_t>(id);
  if (idx >= bindings_.size()) bindings_.resize(idx + 1);
  bindings_[idx] = std::move(t);
  trail_.push_back(id);
}

bool TypeContext::unify(const TypePtr& a, const TypePtr& b) {
  TypePtr x = resolve(a);
  TypePtr y = resolve(b);
  if (x->is_variable()) {
    if (y->is_variable() && y->id() == x->id()) return true;
    if (occurs(x->id(), y)) return false;
    bind(x->id(), y);
    return true;
  }
  if (y->is_variable()) {
    if (occurs(y->id(), x)) return false;
    bind(y->id(), x);
    return true;
  }
  if (x->name() != y->name() || x->args().size() != y->args().size()) return false;
  for (std::size_t i = 0; i < x->args().size(); ++i)
    if (!unify(x->args()[i], y->args()[i])) return false;
  return true;
}

void TypeContext::undo(const Mark& m) {
  while (trail_.size() > m.trail) {
    auto id = static_cast<std::size_t>(trail_.back());
    trail_.pop_back();
    if (id < bindings_.size()) bindings_[id].reset();
  }
  next_ = m.next;
  bindings_.resize(static_cast<std::size_t>(next_));
}

}  // namespace lingo
