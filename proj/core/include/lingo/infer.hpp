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

#ifndef LINGO_INFER_HPP_
#define LINGO_INFER_HPP_

#include <functional>
#include <string_view>
#include <vector>

#include "lingo/term.hpp"
#include "lingo/type.hpp"

namespace lingo {

// Maps a primitive name to its declared scheme, or nullptr when unknown.
using SchemeLookup = std::function<const TypeScheme*(std::string_view)>;

class UnknownPrimitiveError : public TypeError {
 public:
  using TypeError::TypeError;
};

// Hindley-Milner inference for a closed term. The result is the most
// general type with variables numbered t0, t1, ... in order of appearance.
// Throws TypeError when the term is ill-typed.
TypeScheme infer_type(const Term& term, const SchemeLookup& lookup);

// Inference inside an existing context; `env.back()` is the type of $0.
// Returns the (unapplied) type of `term`.
TypePtr infer_in_context(const Term& term, const SchemeLookup& lookup, TypeContext& ctx,
                         const std::vector<TypePtr>& env);

}  // namespace lingo

#endif  // LINGO_INFER_HPP_
