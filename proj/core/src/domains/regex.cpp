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

#include "lingo/domains/regex.hpp"

#include <algorithm>

namespace lingo::regex {

struct Pattern::Node {
  enum class Kind { kLiteral, kAny, kNegatedClass, kSequence, kAlternation };
  Kind kind = Kind::kSequence;
  char ch = 0;
  std::string chars;
  std::vector<std::unique_ptr<Node>> children;
};

namespace {

using Node = Pattern::Node;

class Parser {
 public:
  explicit Parser(std::string_view s) : s_(s) {}

  std::unique_ptr<Node> parse() {
    auto n = alternation();
    if (i_ != s_.size()) throw PatternError("unbalanced ')' in pattern");
    return n;
  }

 private:
  std::unique_ptr<Node> alternation() {
    auto first = sequence();
    if (i_ >= s_.size() || s_[i_] != '|') return first;
    auto alt = std::make_unique<Node>();
    alt->kind = Node::Kind::kAlternation;
    alt->children.push_back(std::move(first));
    while (i_ < s_.size() && s_[i_] == '|') {
      ++i_;
      alt->children.push_back(sequence());
    }
    return alt;
  }

  std::unique_ptr<Node> sequence() {
    auto seq = std::make_unique<Node>();
    seq->kind = Node::Kind::kSequence;
    while (i_ < s_.size() && s_[i_] != '|' && s_[i_] != ')') seq->children.push_back(atom());
    return seq;
  }

  std::unique_ptr<Node> atom() {
    char c = s_[i_];
    auto n = std::make_unique<Node>();
    if (c == '(') {
      ++i_;
      n = alternation();
      if (i_ >= s_.size() || s_[i_] != ')') throw PatternError("unbalanced '(' in pattern");
      ++i_;
      return n;
    }
    if (c == '.') {
      ++i_;
      n->kind = Node::Kind::kAny;
      return n;
    }
    if (c == '[' && i_ + 1 < s_.size() && s_[i_ + 1] == '^') {
      std::size_t close = s_.find(']', i_ + 2);
      if (close == std::string_view::npos) throw PatternError("unterminated class in pattern");
      n->kind = Node::Kind::kNegatedClass;
      n->chars = std::string(s_.substr(i_ + 2, close - i_ - 2));
      i_ = close + 1;
      return n;
    }
    ++i_;
    n->kind = Node::Kind::kLiteral;
    n->ch = c;
    return n;
  }

  std::string_view s_;
  std::size_t i_ = 0;
};

// All end positions reachable by matching `n` from each start in `starts`.
std::vector<std::size_t> ends(const Node& n, std::string_view text, const std::vector<std::size_t>& starts) {
  std::vector<std::size_t> out;
  switch (n.kind) {
    case Node::Kind::kLiteral:
      for (auto p : starts)
        if (p < text.size() && text[p] == n.ch) out.push_back(p + 1);
      break;
    case Node::Kind::kAny:
      for (auto p : starts)
        if (p < text.size()) out.push_back(p + 1);
      break;
    case Node::Kind::kNegatedClass:
      for (auto p : starts)
        if (p < text.size() && n.chars.find(text[p]) == std::string::npos) out.push_back(p + 1);
      break;
    case Node::Kind::kSequence: {
      out = starts;
      for (const auto& c : n.children) {
        if (out.empty()) break;
        out = ends(*c, text, out);
      }
      break;
    }
    case Node::Kind::kAlternation:
      for (const auto& c : n.children) {
        auto e = ends(*c, text, starts);
        out.insert(out.end(), e.begin(), e.end());
      }
      break;
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

}  // namespace

Pattern::Pattern(std::string_view source) : root_(Parser(source).parse()) {}
Pattern::~Pattern() = default;
Pattern::Pattern(Pattern&&) noexcept = default;
Pattern& Pattern::operator=(Pattern&&) noexcept = default;

bool Pattern::full_match(std::string_view text) const {
  auto e = ends(*root_, text, {0});
  return std::binary_search(e.begin(), e.end(), text.size());
}

int Pattern::longest_at(std::string_view text, std::size_t pos) const {
  auto e = ends(*root_, text, {pos});
  if (e.empty()) return -1;
  return static_cast<int>(e.back() - pos);
}

std::vector<std::string> split(const Pattern& p, std::string_view text) {
  std::vector<std::string> out;
  std::size_t gap = 0;
  std::size_t i = 0;
  while (i < text.size()) {
    int len = p.longest_at(text, i);
    if (len > 0) {
      if (i > gap) out.emplace_back(text.substr(gap, i - gap));
      out.emplace_back(text.substr(i, static_cast<std::size_t>(len)));
      i += static_cast<std::size_t>(len);
      gap = i;
    } else {
      ++i;
    }
  }
  if (text.size() > gap) out.emplace_back(text.substr(gap));
  return out;
}

}  // namespace lingo::regex
