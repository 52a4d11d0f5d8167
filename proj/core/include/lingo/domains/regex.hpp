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

#ifndef LINGO_DOMAINS_REGEX_HPP_
#define LINGO_DOMAINS_REGEX_HPP_

#include <memory>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace lingo::regex {

class PatternError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Patterns built by the string primitives: literals, ".", "[^...]",
// groups "(...)" with "|" alternation, and concatenation.
class Pattern {
 public:
  explicit Pattern(std::string_view source);
  ~Pattern();
  Pattern(Pattern&&) noexcept;
  Pattern& operator=(Pattern&&) noexcept;

  // Whole-string match.
  bool full_match(std::string_view text) const;
  // Longest match starting at `pos`, or -1.
  int longest_at(std::string_view text, std::size_t pos) const;

  struct Node;

 private:
  std::unique_ptr<Node> root_;
};

// Splits `text` at non-empty leftmost-longest matches, keeping matched
// pieces and dropping empty gaps.
std::vector<std::string> split(const Pattern& p, std::string_view text);

}  // namespace lingo::regex

#endif  // LINGO_DOMAINS_REGEX_HPP_
