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

#include "lingo/compression.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <set>
#include <unordered_map>

#include <fmt/format.h>

#include "lingo/search.hpp"

namespace lingo {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kImprovement = 1e-9;

// --- flattened programs ----------------------------------------------------

struct FlatNode {
  Term term;
  int end = 0;            // one past the last pre-order index of the subtree
  int depth = 0;          // binders above this node
  bool is_arg = false;    // argument child of an application
  int outside_max = -1;   // deepest binder level referenced from outside the node, -1 if none
};

// Binder levels are absolute: the root's first λ binds level 0.
void flatten(const Term& t, int depth, bool is_arg, std::vector<FlatNode>& out, std::vector<int>& levels) {
  std::size_t me = out.size();
  out.push_back({t, 0, depth, is_arg, -1});
  std::size_t first_level = levels.size();
  switch (t.kind()) {
    case TermKind::kVariable:
      levels.push_back(depth - 1 - t.index());
      break;
    case TermKind::kAbstraction:
      flatten(t.body(), depth + 1, false, out, levels);
      break;
    case TermKind::kApplication:
      flatten(t.fn(), depth, false, out, levels);
      flatten(t.arg(), depth, true, out, levels);
      break;
    default:
      break;
  }
  int best = -1;
  for (std::size_t i = first_level; i < levels.size(); ++i)
    if (levels[i] < depth) best = std::max(best, levels[i]);
  out[me].outside_max = best;
  out[me].end = static_cast<int>(out.size());
}

std::vector<FlatNode> flatten(const Term& t) {
  std::vector<FlatNode> out;
  std::vector<int> levels;
  flatten(t, 0, false, out, levels);
  return out;
}

// Builds the template body for root `s` with `holes` (pre-order indices,
// ascending) abstracted. Returns nullopt when the result would not be
// closed or is too small to be worth naming.
class TemplateBuilder {
 public:
  TemplateBuilder(const std::vector<FlatNode>& nodes, int root, const std::vector<int>& holes)
      : nodes_(nodes), root_(root), holes_(holes) {}

  std::optional<Term> build() {
    int k = static_cast<int>(holes_.size());
    auto body = walk(root_, 0, k);
    if (!body || leaves_ < 2) return std::nullopt;
    Term t = *body;
    for (int i = 0; i < k; ++i) t = Term::abstraction(t);
    return t;
  }

 private:
  // `inner`: binders between the root and this node.
  std::optional<Term> walk(int i, int inner, int k) {
    auto h = std::find(holes_.begin(), holes_.end(), i);
    if (h != holes_.end()) {
      int j = static_cast<int>(h - holes_.begin());
      return Term::variable(inner + (k - 1 - j));
    }
    const FlatNode& n = nodes_[static_cast<std::size_t>(i)];
    switch (n.term.kind()) {
      case TermKind::kVariable: {
        int level = n.depth - 1 - n.term.index();
        if (level < nodes_[static_cast<std::size_t>(root_)].depth) return std::nullopt;
        return n.term;
      }
      case TermKind::kPrimitive:
      case TermKind::kInvented:
        ++leaves_;
        return n.term;
      case TermKind::kAbstraction: {
        auto b = walk(i + 1, inner + 1, k);
        if (!b) return std::nullopt;
        return Term::abstraction(*b);
      }
      case TermKind::kApplication: {
        int fn = i + 1;
        int arg = nodes_[static_cast<std::size_t>(fn)].end;
        auto f = walk(fn, inner, k);
        if (!f) return std::nullopt;
        auto a = walk(arg, inner, k);
        if (!a) return std::nullopt;
        return Term::application(*f, *a);
      }
    }
    return std::nullopt;
  }

  const std::vector<FlatNode>& nodes_;
  int root_;
  const std::vector<int>& holes_;
  int leaves_ = 0;
};

template <typename Fn>
void for_each_template(const Term& program, const CompressionParams& params, Fn&& fn) {
  std::vector<FlatNode> nodes = flatten(program);
  int max_holes = std::max(0, std::min(params.max_arity, params.refactoring_depth));
  for (int s = 0; s < static_cast<int>(nodes.size()); ++s) {
    const FlatNode& root = nodes[static_cast<std::size_t>(s)];
    if (!root.term.is_application() && !root.term.is_abstraction()) continue;
    std::vector<int> eligible;
    for (int q = s + 1; q < root.end; ++q) {
      const FlatNode& n = nodes[static_cast<std::size_t>(q)];
      if (n.is_arg && n.outside_max < root.depth) eligible.push_back(q);
    }
    std::vector<int> holes;
    // Depth-first over ascending, non-nested hole sets.
    auto rec = [&](auto&& self, std::size_t from) -> void {
      if (auto t = TemplateBuilder(nodes, s, holes).build()) fn(*t, s);
      if (static_cast<int>(holes.size()) >= max_holes) return;
      for (std::size_t e = from; e < eligible.size(); ++e) {
        int q = eligible[e];
        if (!holes.empty() && q < nodes[static_cast<std::size_t>(holes.back())].end) continue;
        holes.push_back(q);
        self(self, e + 1);
        holes.pop_back();
      }
    };
    rec(rec, 0);
  }
}

// --- matching and rewriting ------------------------------------------------

int lowest_free(const Term& t, int depth = 0) {
  switch (t.kind()) {
    case TermKind::kVariable:
      return t.index() >= depth ? t.index() - depth : std::numeric_limits<int>::max();
    case TermKind::kAbstraction:
      return lowest_free(t.body(), depth + 1);
    case TermKind::kApplication:
      return std::min(lowest_free(t.fn(), depth), lowest_free(t.arg(), depth));
    default:
      return std::numeric_limits<int>::max();
  }
}

bool match(const Term& pattern, const Term& t, int inner, int arity, std::vector<std::optional<Term>>& bound) {
  switch (pattern.kind()) {
    case TermKind::kVariable: {
      int i = pattern.index();
      if (i < inner) return t.is_variable() && t.index() == i;
      int hole = i - inner;
      if (hole >= arity) return false;
      if (lowest_free(t) < inner) return false;
      Term v = inner == 0 ? t : shift(t, -inner);
      auto& slot = bound[static_cast<std::size_t>(hole)];
      if (slot) return *slot == v;
      slot = v;
      return true;
    }
    case TermKind::kPrimitive:
    case TermKind::kInvented:
      return t == pattern;
    case TermKind::kAbstraction:
      return t.is_abstraction() && match(pattern.body(), t.body(), inner + 1, arity, bound);
    case TermKind::kApplication:
      return t.is_application() && match(pattern.fn(), t.fn(), inner, arity, bound) &&
             match(pattern.arg(), t.arg(), inner, arity, bound);
  }
  return false;
}

struct Pattern {
  Term invented;
  Term inner;  // body under the argument λs
  int arity = 0;
  int eta = 0;  // leading λs of `inner`
};

Pattern make_pattern(const Candidate& c) {
  Pattern p;
  p.invented = c.body.is_invented() ? c.body : Term::invented(c.body);
  Term b = p.invented.body();
  for (int i = 0; i < c.arity; ++i) {
    if (!b.is_abstraction()) throw std::invalid_argument("candidate body has fewer λs than its arity");
    b = b.body();
  }
  p.inner = b;
  p.arity = c.arity;
  for (Term x = b; x.is_abstraction(); x = x.body()) ++p.eta;
  return p;
}

// Site decisions: sites are numbered in traversal order; `decide` says
// whether to rewrite a site.
class Rewriter {
 public:
  Rewriter(const Pattern& p, std::function<bool(int)> decide) : p_(p), decide_(std::move(decide)) {}

  Term run(const Term& t) { return walk(t); }
  int sites() const { return next_site_; }
  int applied() const { return applied_; }

 private:
  Term walk(const Term& t) {
    if (t.is_application() || t.is_abstraction()) {
      std::vector<std::optional<Term>> bound(static_cast<std::size_t>(p_.arity));
      if (match(p_.inner, t, 0, p_.arity, bound) &&
          std::all_of(bound.begin(), bound.end(), [](const auto& b) { return b.has_value(); })) {
        int site = next_site_++;
        if (decide_(site)) {
          ++applied_;
          std::vector<Term> args;
          for (int j = p_.arity - 1; j >= 0; --j) args.push_back(shift(walk(*bound[static_cast<std::size_t>(j)]), p_.eta));
          for (int v = p_.eta - 1; v >= 0; --v) args.push_back(Term::variable(v));
          Term r = Term::apply_all(p_.invented, args);
          for (int v = 0; v < p_.eta; ++v) r = Term::abstraction(r);
          return r;
        }
      }
    }
    switch (t.kind()) {
      case TermKind::kAbstraction:
        return Term::abstraction(walk(t.body()));
      case TermKind::kApplication:
        return Term::application(walk(t.fn()), walk(t.arg()));
      default:
        return t;
    }
  }

  const Pattern& p_;
  std::function<bool(int)> decide_;
  int next_site_ = 0;
  int applied_ = 0;
};

bool typeable(const Term& program, const TypePtr& request, const ChoiceSpace& space) {
  try {
    derive(program, request, space);
    return true;
  } catch (const std::exception&) {
    return false;
  }
}

Term rewrite_checked(const Term& program, const Pattern& p, const TypePtr& request, const ChoiceSpace& space) {
  Rewriter all(p, [](int) { return true; });
  Term full = all.run(program);
  if (all.applied() == 0 || typeable(full, request, space)) return full;
  // Decide sites one at a time in traversal order.
  std::vector<bool> keep;
  Term best = program;
  for (int j = 0;; ++j) {
    Rewriter probe(p, [&](int s) { return s < j ? static_cast<bool>(keep[static_cast<std::size_t>(s)]) : s == j; });
    Term t = probe.run(program);
    if (probe.sites() <= j) break;
    bool ok = typeable(t, request, space);
    keep.push_back(ok);
    if (ok) best = t;
  }
  return best;
}

std::vector<Frontier> rewrite_frontiers(const std::vector<Frontier>& frontiers, const Pattern& p,
                                        const ChoiceSpace& space, int* changed) {
  std::vector<Frontier> out = frontiers;
  int n = 0;
  for (auto& f : out) {
    for (auto& e : f.entries) {
      Term r = rewrite_checked(e.program, p, f.request, space);
      if (r != e.program) {
        ++n;
        e.program = r;
      }
    }
  }
  if (changed) *changed = n;
  return out;
}

double estimated_gain(const Candidate& c, double penalty) {
  int leaves = 0;
  visit(c.body, [&](const Term& t, int) {
    if (t.is_production_leaf()) ++leaves;
  });
  return static_cast<double>(c.uses.size()) * (leaves - 1) - penalty * c.body.size();
}

struct Scored {
  double total = kInf;
  Grammar grammar;
  std::vector<Frontier> frontiers;
  ObjectiveTerms terms;
  int changed = 0;
};

Scored score_full(const Candidate& c, const std::vector<Frontier>& frontiers, const Grammar& grammar,
                  const TranslationTable* translation, const Grammar& table_grammar,
                  std::vector<std::vector<std::string>> merges, const CompressionParams& params) {
  Scored s;
  try {
    Term inv = c.body.is_invented() ? c.body : Term::invented(c.body);
    if (grammar.index_of(inv)) return s;
    Grammar g = grammar.with_invented(c.body);
    ChoiceSpace space(g);
    Pattern p = make_pattern(c);
    s.frontiers = rewrite_frontiers(frontiers, p, space, &s.changed);
    if (s.changed > 0) merges.push_back(c.subcomponents());
    s.terms = objective(s.frontiers, g, translation, table_grammar, merges, params, &s.grammar);
    s.total = s.terms.total();
  } catch (const std::exception&) {
    s.total = kInf;
  }
  return s;
}

}  // namespace

// --- candidates ------------------------------------------------------------

std::vector<std::string> Candidate::subcomponents() const {
  std::vector<std::string> out;
  visit(inline_invented(body.is_invented() ? body.body() : body), [&](const Term& t, int) {
    if (t.is_primitive()) out.push_back(t.name());
  });
  std::sort(out.begin(), out.end());
  return out;
}

int Candidate::distinct_entries() const {
  std::set<std::pair<int, int>> s;
  for (const auto& u : uses) s.emplace(u.frontier, u.entry);
  return static_cast<int>(s.size());
}

std::vector<std::pair<Term, int>> refactorings(const Term& program, const CompressionParams& params) {
  std::vector<std::pair<Term, int>> out;
  for_each_template(program, params, [&](const Term& t, int node) { out.emplace_back(t, node); });
  return out;
}

std::vector<Candidate> propose(const std::vector<Frontier>& frontiers, const CompressionParams& params) {
  if (frontiers.empty()) throw std::invalid_argument("propose needs at least one frontier");
  std::unordered_map<Term, Candidate, TermHash> found;
  for (int fi = 0; fi < static_cast<int>(frontiers.size()); ++fi) {
    const auto& f = frontiers[static_cast<std::size_t>(fi)];
    for (int ei = 0; ei < static_cast<int>(f.entries.size()); ++ei) {
      for_each_template(f.entries[static_cast<std::size_t>(ei)].program, params, [&](const Term& t, int node) {
        auto [it, inserted] = found.try_emplace(t);
        if (inserted) {
          it->second.body = t;
        }
        it->second.uses.push_back({fi, ei, node});
      });
    }
  }
  std::vector<Candidate> out;
  for (auto& [t, c] : found) {
    if (c.distinct_entries() < 2) continue;
    out.push_back(std::move(c));
  }
  // The arity is the number of template λs; recover it from the first use.
  for (auto& c : out) {
    const auto& u = c.uses.front();
    const Term& program = frontiers[static_cast<std::size_t>(u.frontier)].entries[static_cast<std::size_t>(u.entry)].program;
    std::vector<FlatNode> nodes = flatten(program);
    int leading_site = 0;
    for (Term b = nodes[static_cast<std::size_t>(u.node)].term; b.is_abstraction(); b = b.body()) ++leading_site;
    int leading_body = 0;
    for (Term b = c.body; b.is_abstraction(); b = b.body()) ++leading_body;
    c.arity = leading_body - leading_site;
  }
  std::sort(out.begin(), out.end(), [](const Candidate& a, const Candidate& b) { return a.body < b.body; });
  return out;
}

Term rewrite(const Term& program, const Candidate& candidate) {
  Pattern p = make_pattern(candidate);
  return Rewriter(p, [](int) { return true; }).run(program);
}

Term rewrite_typed(const Term& program, const Candidate& candidate, const TypePtr& request, const Grammar& grammar) {
  ChoiceSpace space(grammar);
  return rewrite_checked(program, make_pattern(candidate), request, space);
}

// --- objective -------------------------------------------------------------

ObjectiveTerms objective(const std::vector<Frontier>& frontiers, const Grammar& grammar,
                         const TranslationTable* translation, const Grammar& table_grammar,
                         const std::vector<std::vector<std::string>>& merges, const CompressionParams& params,
                         Grammar* fitted) {
  if (!params.valid()) throw std::invalid_argument("invalid compression parameters");
  auto space = std::make_shared<ChoiceSpace>(grammar);
  std::vector<std::vector<Derivation>> groups;
  groups.reserve(frontiers.size());
  for (const auto& f : frontiers) {
    std::vector<Derivation> g;
    for (const auto& e : f.entries) g.push_back(derive(e.program, f.request, *space));
    groups.push_back(std::move(g));
  }
  double vw = 0.0;
  auto theta = fit_weights_from(grammar, *space, groups, params.pseudocounts, &vw);
  Grammar g = grammar.with_weights(theta, vw);
  PriorView view(g, space);
  ObjectiveTerms out;
  out.program = program_description_length(groups, view);
  out.grammar = grammar_description_length(grammar, params.structure_penalty);
  out.parameters = static_cast<double>(grammar.size());
  if (translation && params.translation_weight != 0.0)
    out.translation = params.translation_weight * refactored_description_length(*translation, table_grammar, merges);
  if (fitted) *fitted = g;
  return out;
}

double score(const Candidate& candidate, const std::vector<Frontier>& frontiers, const Grammar& grammar,
             const TranslationTable* translation, const CompressionParams& params) {
  return score_full(candidate, frontiers, grammar, translation, grammar, {}, params).total;
}

CompressionResult compress(const std::vector<Frontier>& frontiers, const Grammar& grammar,
                           const TranslationTable* translation, const CompressionParams& params) {
  CompressionResult result;
  result.grammar = grammar;
  result.frontiers = frontiers;
  ObjectiveTerms current = objective(frontiers, grammar, translation, grammar, {}, params);
  result.objective_before = result.objective_after = current.total();

  bool any = false;
  for (const auto& f : frontiers) any = any || !f.entries.empty();
  if (!any) return result;

  Grammar g = grammar;
  std::vector<Frontier> fs = frontiers;
  std::vector<std::vector<std::string>> merges;
  Grammar fitted = grammar;
  while (static_cast<int>(result.accepted.size()) < params.max_new_abstractions) {
    std::vector<Candidate> cands = propose(fs, params);
    if (cands.empty()) break;
    std::stable_sort(cands.begin(), cands.end(), [&](const Candidate& a, const Candidate& b) {
      return estimated_gain(a, params.structure_penalty) > estimated_gain(b, params.structure_penalty);
    });
    if (static_cast<int>(cands.size()) > params.candidates_to_score)
      cands.resize(static_cast<std::size_t>(params.candidates_to_score));

    std::vector<Scored> scored(cands.size());
    parallel_for(static_cast<int>(cands.size()), default_workers(), [&](int i) {
      scored[static_cast<std::size_t>(i)] =
          score_full(cands[static_cast<std::size_t>(i)], fs, g, translation, grammar, merges, params);
    });
    std::size_t best = 0;
    for (std::size_t i = 1; i < scored.size(); ++i) {
      if (scored[i].total < scored[best].total ||
          (scored[i].total == scored[best].total && cands[i].body < cands[best].body))
        best = i;
    }
    if (!(scored[best].total < current.total() - kImprovement)) break;

    Scored& s = scored[best];
    CompressionStep step{cands[best], current, s.terms, s.changed};
    merges.push_back(cands[best].subcomponents());
    if (s.changed == 0) merges.pop_back();
    g = g.with_invented(cands[best].body);
    fs = std::move(s.frontiers);
    fitted = s.grammar;
    current = s.terms;
    result.accepted.push_back(cands[best]);
    result.steps.push_back(std::move(step));
  }

  if (result.accepted.empty()) return result;
  PriorView view(fitted);
  for (auto& f : fs) {
    for (auto& e : f.entries) {
      e.log_prior = log_prior(e.program, f.request, view);
      e.log_posterior = e.log_prior;
    }
    f.normalize();
  }
  result.grammar = fitted.with_version(g.version());
  result.frontiers = std::move(fs);
  result.objective_after = current.total();
  return result;
}

std::string compression_report(const CompressionResult& result) {
  std::string out = fmt::format("objective {:.6f} -> {:.6f}, {} abstraction(s)\n", result.objective_before,
                                result.objective_after, result.accepted.size());
  for (const auto& s : result.steps) {
    out += fmt::format(
        "accepted {} arity={} rewritten={} d_program={:.6f} d_grammar={:.6f} d_parameters={:.6f} "
        "d_translation={:.6f} objective={:.6f}\n",
        (s.candidate.body.is_invented() ? s.candidate.body : Term::invented(s.candidate.body)).str(), s.candidate.arity,
        s.rewritten_entries, s.after.program - s.before.program, s.after.grammar - s.before.grammar,
        s.after.parameters - s.before.parameters, s.after.translation - s.before.translation, s.after.total());
  }
  return out;
}

}  // namespace lingo
