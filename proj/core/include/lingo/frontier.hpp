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

#ifndef LINGO_FRONTIER_HPP_
#define LINGO_FRONTIER_HPP_

#include <string>
#include <vector>

#include "lingo/term.hpp"
#include "lingo/type.hpp"

namespace lingo {

struct FrontierEntry {
  Term program;
  double log_prior = 0.0;
  double log_posterior = 0.0;
};

// Verified solutions for one task, best first.
struct Frontier {
  std::string task_id;
  TypePtr request;
  std::vector<FrontierEntry> entries;
  int beam_width = 5;

  bool empty() const { return entries.empty(); }
  const FrontierEntry& best() const { return entries.front(); }

  // Sorts by log-posterior (ties by printed program), drops duplicates and
  // truncates to the beam width.
  void normalize();
};

}  // namespace lingo

#endif  // LINGO_FRONTIER_HPP_
