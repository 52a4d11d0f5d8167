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

#include "lingo/term.hpp"

#include <algorithm>
#include <cctype>

namespace lingo {

namespace {

std::size_t mix(std::size_t h, std::size_t v) {
  return h ^ (v + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2));
}

}  // namespace

Term Term::primitive(std::string name) {
  auto n = std::make_shared<Node>();
  n->kind = TermKind::kPrimitive;
  n->hash = mix(0x51ed27, std::hash<std::string>{}(name));
  n->name = std::move(name);
  n->leaves = 1;
  return Term(std::move(n));
}

Term Term::variable(int index) {
  auto n = std::make_shared<Node>();
  n->kind = TermKind::kVariable;
  n->index = index;
  n->hash = mix(0xa11ce, static_cast<std::size_t>(index));
  n->leaves = 1;
  n->free_depth = index + 1;
  return Term(std::move(n));
}

Term Term::abstraction(Term body) {
  auto n = std::make_shared<Node>();
  n->kind = TermKind::kAbstraction;
  n->hash = mix(0x1a4bda, body.hash());
  n->leaves = body.size();
  n->free_depth = std::max(0, body.free_depth() - 1);
  n->left = std::move(body);
  return Term(std::move(n));
}

Term Term::application(Term fn, Term arg) {
  auto n = std::make_shared<Node>();
  n->kind = TermKind::kApplication;
  n->hash = mix(mix(0xa99, fn.hash()), arg.hash());
  n->leaves = fn.size() + arg.size();
  n->free_depth = std::max(fn.free_depth(), arg.free_depth());
  n->left = std::move(fn);
  n->right = std::move(arg);
  return Term(std::move(n));
}

Term Term::invented(Term body) {
  auto n = std::make_shared<Node>();
  n->kind = TermKind::kInvented;
  n->hash = mix(0x1f7e, body.hash());
  n->leaves = 1;
  n->left = std::move(body);
  return Term(std::move(n));
}

Term Term::apply_all(Term fn, const std::vector<Term>& args) {
  for (const auto& a : args) fn = application(std::move(fn), a);
  return fn;
}

Term Term::head() const {
  Term t = *this;
  while (t.is_application()) t = t.fn();
  return t;
}

std::vector<Term> Term::arguments() const {
  std::vector<Term> args;
  Term t = *this;
  while (t.is_application()) {
    args.push_back(t.arg());
    t = t.fn();
  }
  std::reverse(args.begin(), args.end());
  return args;
}

bool operator==(const Term& a, const Term& b) {
  if (a.node_ == b.node_) return true;
  if (!a.node_ || !b.node_) return false;
  if (a.hash() != b.hash() || a.kind() != b.kind()) return false;
  switch (a.kind()) {
    case TermKind::kPrimitive:
      return a.name() == b.name();
    case TermKind::kVariable:
      return a.index() == b.index();
    case TermKind::kAbstraction:
    case TermKind::kInvented:
      return a.body() == b.body();
    case TermKind::kApplication:
      return a.fn() == b.fn() && a.arg() == b.arg();
  }
  return false;
}

namespace {

void render(const Term& t, std::string& out) {
  switch (t.kind()) {
    case TermKind::kPrimitive:
      out += t.name();
      return;
    case TermKind::kVariable:
      out += '$';
      out += std::to_string(t.index());
      return;
    case TermKind::kAbstraction:
      out += "(lambda ";
      render(t.body(), out);
      out += ')';
      return;
    case TermKind::kInvented:
      out += '#';
      render(t.body(), out);
      return;
    case TermKind::kApplication: {
      out += '(';
      render(t.head(), out);
      for (const auto& a : t.arguments()) {
        out += ' ';
        render(a, out);
      }
      out += ')';
      return;
    }
  }
}

class TermParser {
 public:
  explicit TermParser(std::string_view s) : s_(s) {}

  Term parse() {
    Term t = parse_expr(0);
    skip();
    if (pos_ != s_.size()) throw ParseError("trailing input", pos_);
    return t;
  }

 private:
  void skip() {
    while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
  }

  static bool delimiter(char c) {
    return c == '(' || c == ')' || std::isspace(static_cast<unsigned char>(c));
  }

  std::string atom() {
    std::size_t start = pos_;
    while (pos_ < s_.size() && !delimiter(s_[pos_])) ++pos_;
    return std::string(s_.substr(start, pos_ - start));
  }

  Term parse_expr(int depth) {
    skip();
    if (pos_ >= s_.size()) throw ParseError("unexpected end of input", pos_);
    char c = s_[pos_];
    if (c == ')') throw ParseError("unexpected ')'", pos_);
    if (c == '#') {
      std::size_t at = pos_;
      ++pos_;
      Term body = parse_expr(0);
      if (!body.closed()) throw UnboundVariableError("invented abstraction is not closed", at);
      return Term::invented(std::move(body));
    }
    if (c == '(') {
      std::size_t open = pos_;
      ++pos_;
      skip();
      std::size_t save = pos_;
      std::string first = (pos_ < s_.size() && s_[pos_] != '(' && s_[pos_] != '#') ? atom() : "";
      if (first == "lambda" || first == "λ") {
        Term body = parse_expr(depth + 1);
        skip();
        if (pos_ >= s_.size() || s_[pos_] != ')') throw ParseError("expected ')' after lambda body", pos_);
        ++pos_;
        return Term::abstraction(std::move(body));
      }
      pos_ = save;
      std::vector<Term> items;
      while (true) {
        skip();
        if (pos_ >= s_.size()) throw ParseError("unterminated '('", open);
        if (s_[pos_] == ')') {
          ++pos_;
          break;
        }
        items.push_back(parse_expr(depth));
      }
      if (items.empty()) throw ParseError("empty application", open);
      if (items.size() == 1) throw ParseError("application needs an argument", open);
      Term fn = items.front();
      items.erase(items.begin());
      return Term::apply_all(std::move(fn), items);
    }
    std::size_t at = pos_;
    std::string name = atom();
    if (name.size() > 1 && name[0] == '$' &&
        name.find_first_not_of("0123456789", 1) == std::string::npos) {
      int index = std::stoi(name.substr(1));
      if (index >= depth) throw UnboundVariableError("unbound variable " + name, at);
      return Term::variable(index);
    }
    if (name == "lambda" || name == "λ") throw ParseError("lambda outside of parentheses", at);
    return Term::primitive(std::move(name));
  }

  std::string_view s_;
  std::size_t pos_ = 0;
};

}  // namespace

std::string Term::str() const {
  std::string out;
  render(*this, out);
  return out;
}

Term parse(std::string_view text) { return TermParser(text).parse(); }

Term shift(const Term& t, int amount, int cutoff) {
  if (amount == 0 || t.free_depth() <= cutoff) return t;
  switch (t.kind()) {
    case TermKind::kVariable:
      return t.index() >= cutoff ? Term::variable(t.index() + amount) : t;
    case TermKind::kAbstraction:
      return Term::abstraction(shift(t.body(), amount, cutoff + 1));
    case TermKind::kApplication:
      return Term::application(shift(t.fn(), amount, cutoff), shift(t.arg(), amount, cutoff));
    default:
      return t;
  }
}

namespace {

Term subst_rec(const Term& t, const Term& value, int index) {
  if (t.free_depth() <= index) return t;
  switch (t.kind()) {
    case TermKind::kVariable:
      if (t.index() == index) return shift(value, index);
      if (t.index() > index) return Term::variable(t.index() - 1);
      return t;
    case TermKind::kAbstraction:
      return Term::abstraction(subst_rec(t.body(), value, index + 1));
    case TermKind::kApplication:
      return Term::application(subst_rec(t.fn(), value, index), subst_rec(t.arg(), value, index));
    default:
      return t;
  }
}

// One leftmost-outermost step; returns nullopt when already normal.
std::optional<Term> step(const Term& t) {
  switch (t.kind()) {
    case TermKind::kApplication: {
      if (t.fn().is_abstraction()) return substitute(t.fn().body(), t.arg());
      if (auto f = step(t.fn())) return Term::application(*f, t.arg());
      if (auto a = step(t.arg())) return Term::application(t.fn(), *a);
      return std::nullopt;
    }
    case TermKind::kAbstraction:
      if (auto b = step(t.body())) return Term::abstraction(*b);
      return std::nullopt;
    default:
      return std::nullopt;
  }
}

}  // namespace

Term substitute(const Term& body, const Term& value, int index) {
  return subst_rec(body, value, index);
}

BetaResult beta_reduce(const Term& t, int max_steps) {
  BetaResult r{t, true, 0};
  Term cur = t;
  while (true) {
    auto next = step(cur);
    if (!next) {
      r.term = cur;
      return r;
    }
    if (r.steps >= max_steps) return BetaResult{t, false, r.steps};
    cur = *next;
    ++r.steps;
  }
}

Term inline_invented(const Term& t) {
  switch (t.kind()) {
    case TermKind::kInvented:
      return inline_invented(t.body());
    case TermKind::kAbstraction:
      return Term::abstraction(inline_invented(t.body()));
    case TermKind::kApplication:
      return Term::application(inline_invented(t.fn()), inline_invented(t.arg()));
    default:
      return t;
  }
}

void visit(const Term& t, const std::function<void(const Term&, int)>& fn, int depth) {
  fn(t, depth);
  switch (t.kind()) {
    case TermKind::kAbstraction:
      visit(t.body(), fn, depth + 1);
      break;
    case TermKind::kApplication:
      visit(t.fn(), fn, depth);
      visit(t.arg(), fn, depth);
      break;
    default:
      break;
  }
}

}  // namespace lingo
