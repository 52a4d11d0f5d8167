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

#include "lingo/infer.hpp"

namespace lingo {

TypePtr infer_in_context(const Term& term, const SchemeLookup& lookup, TypeContext& ctx,
                         const std::vector<TypePtr>& env) {
  switch (term.kind()) {
    case TermKind::kPrimitive: {
      const TypeScheme* scheme = lookup(term.name());
      if (!scheme) throw UnknownPrimitiveError("unknown primitive '" + term.name() + "'");
      return ctx.instantiate(*scheme);
    }
    case TermKind::kInvented: {
      TypeScheme scheme = infer_type(term.body(), lookup);
      return ctx.instantiate(scheme);
    }
    case TermKind::kVariable: {
      auto i = static_cast<std::size_t>(term.index());
      if (i >= env.size()) throw TypeError("unbound variable $" + std::to_string(term.index()));
      return env[env.size() - 1 - i];
    }
    case TermKind::kAbstraction: {
      TypePtr arg = ctx.fresh();
      std::vector<TypePtr> inner = env;
      inner.push_back(arg);
      TypePtr body = infer_in_context(term.body(), lookup, ctx, inner);
      return Type::arrow(arg, body);
    }
    case TermKind::kApplication: {
      TypePtr f = infer_in_context(term.fn(), lookup, ctx, env);
      TypePtr x = infer_in_context(term.arg(), lookup, ctx, env);
      TypePtr r = ctx.fresh();
      if (!ctx.unify(f, Type::arrow(x, r))) {
        throw TypeError("cannot apply " + ctx.apply(f)->str() + " to " + ctx.apply(x)->str() + " in " +
                        term.str());
      }
      return r;
    }
  }
  throw TypeError("malformed term");
}

TypeScheme infer_type(const Term& term, const SchemeLookup& lookup) {
  TypeContext ctx;
  TypePtr t = infer_in_context(term, lookup, ctx, {});
  return TypeScheme::generalize(ctx.apply(t));
}

}  // namespace lingo
