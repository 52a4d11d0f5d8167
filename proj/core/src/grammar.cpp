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

#include "lingo/grammar.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <mutex>

#include <nlohmann/json.hpp>

#include "lingo/mathutil.hpp"

namespace lingo {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

std::vector<std::string> collect_primitives(const Term& body) {
  std::vector<std::string> out;
  visit(inline_invented(body), [&](const Term& t, int) {
    if (t.is_primitive()) out.push_back(t.name());
  });
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace

// --- frontier --------------------------------------------------------------

void Frontier::normalize() {
  std::vector<std::pair<std::string, FrontierEntry>> keyed;
  keyed.reserve(entries.size());
  for (auto& e : entries) keyed.emplace_back(e.program.str(), std::move(e));
  std::stable_sort(keyed.begin(), keyed.end(), [](const auto& a, const auto& b) {
    if (a.second.log_posterior != b.second.log_posterior) return a.second.log_posterior > b.second.log_posterior;
    return a.first < b.first;
  });
  entries.clear();
  std::vector<std::string> seen;
  for (auto& [k, e] : keyed) {
    if (std::find(seen.begin(), seen.end(), k) != seen.end()) continue;
    if (static_cast<int>(entries.size()) >= beam_width) break;
    seen.push_back(k);
    entries.push_back(std::move(e));
  }
}

// --- productions and grammar -----------------------------------------------

Production::Production(Term t, TypeScheme s, double w, std::vector<std::string> subs)
    : term(std::move(t)), scheme(std::move(s)), log_weight(w), subcomponents(std::move(subs)) {
  key_ = term.str();
  arity_ = static_cast<int>(scheme.type->arguments().size());
}

Grammar::Grammar(std::vector<Production> productions, double variable_log_weight, int version)
    : productions_(std::move(productions)), variable_log_weight_(variable_log_weight), version_(version) {
  std::stable_sort(productions_.begin(), productions_.end(),
                   [](const Production& a, const Production& b) { return a.key() < b.key(); });
  for (std::size_t i = 0; i < productions_.size(); ++i) {
    auto [it, inserted] = by_key_.emplace(productions_[i].key(), static_cast<int>(i));
    if (!inserted) throw std::invalid_argument("duplicate production " + productions_[i].key());
  }
}

Grammar Grammar::uniform(const std::vector<std::pair<std::string, std::string>>& primitives) {
  std::vector<Production> ps;
  ps.reserve(primitives.size());
  for (const auto& [name, type] : primitives) ps.emplace_back(Term::primitive(name), TypeScheme::parse(type));
  return Grammar(std::move(ps));
}

int Grammar::max_arity() const {
  int m = 0;
  for (const auto& p : productions_) m = std::max(m, p.arity());
  return m;
}

std::optional<int> Grammar::index_of(const Term& leaf) const { return index_of(leaf.str()); }

std::optional<int> Grammar::index_of(const std::string& key) const {
  auto it = by_key_.find(key);
  if (it == by_key_.end()) return std::nullopt;
  return it->second;
}

const TypeScheme* Grammar::primitive_scheme(std::string_view name) const {
  auto it = by_key_.find(std::string(name));
  if (it == by_key_.end()) return nullptr;
  const Production& p = productions_[static_cast<std::size_t>(it->second)];
  return p.term.is_primitive() ? &p.scheme : nullptr;
}

SchemeLookup Grammar::lookup() const {
  return [this](std::string_view name) { return primitive_scheme(name); };
}

Grammar Grammar::with_invented(const Term& body) const {
  Term inv = body.is_invented() ? body : Term::invented(body);
  if (index_of(inv)) return with_version(version_ + 1);
  TypeScheme scheme = infer_type(inv.body(), lookup());
  std::vector<Production> ps = productions_;
  ps.emplace_back(inv, scheme, 0.0, collect_primitives(inv.body()));
  return Grammar(std::move(ps), variable_log_weight_, version_ + 1);
}

Grammar Grammar::with_weights(const std::vector<double>& weights, double variable_weight) const {
  if (weights.size() != productions_.size()) throw std::invalid_argument("weight count mismatch");
  Grammar g = *this;
  for (std::size_t i = 0; i < weights.size(); ++i) g.productions_[i].log_weight = weights[i];
  g.variable_log_weight_ = variable_weight;
  return g;
}

Grammar Grammar::with_version(int version) const {
  Grammar g = *this;
  g.version_ = version;
  return g;
}

std::vector<std::string> Grammar::primitive_names() const {
  std::vector<std::string> out;
  for (const auto& p : productions_)
    if (p.term.is_primitive()) out.push_back(p.key());
  return out;
}

nlohmann::json Grammar::to_json() const {
  nlohmann::json ps = nlohmann::json::array();
  for (const auto& p : productions_) {
    ps.push_back({{"term", p.key()}, {"type", p.scheme.str()}, {"log_weight", p.log_weight}});
  }
  return {{"version", version_}, {"variable_log_weight", variable_log_weight_}, {"productions", ps}};
}

Grammar Grammar::from_json(const nlohmann::json& j) {
  std::vector<Production> ps;
  for (const auto& p : j.at("productions")) {
    Term t = parse(p.at("term").get<std::string>());
    TypeScheme s = TypeScheme::parse(p.at("type").get<std::string>());
    std::vector<std::string> subs;
    if (t.is_invented()) subs = collect_primitives(t.body());
    ps.emplace_back(t, s, p.at("log_weight").get<double>(), std::move(subs));
  }
  return Grammar(std::move(ps), j.at("variable_log_weight").get<double>(), j.at("version").get<int>());
}

double grammar_description_length(const Grammar& grammar, double structure_penalty) {
  double total = 0.0;
  for (const auto& p : grammar.productions()) total += p.term.is_invented() ? p.term.body().size() : 1;
  return structure_penalty * total;
}

// --- choice space ----------------------------------------------------------

ChoiceSpace::ChoiceSpace(const Grammar& grammar) : grammar_(&grammar) {}

int ChoiceSpace::request_id(const TypePtr& applied_request) const {
  std::string key = canonical_key(applied_request);
  {
    std::shared_lock lock(mu_);
    auto it = ids_.find(key);
    if (it != ids_.end()) return it->second;
  }
  Entry e;
  e.request = canonicalize(applied_request);
  TypeScheme rs = TypeScheme::generalize(e.request);
  const auto& ps = grammar_->productions();
  for (std::size_t i = 0; i < ps.size(); ++i) {
    TypeContext ctx;
    TypePtr r = ctx.instantiate(rs);
    TypePtr t = ctx.instantiate(ps[i].scheme);
    if (ctx.unify(t->result(t), r)) e.legal.push_back(static_cast<int>(i));
  }
  std::unique_lock lock(mu_);
  auto it = ids_.find(key);
  if (it != ids_.end()) return it->second;
  int id = static_cast<int>(entries_.size());
  entries_.push_back(std::move(e));
  ids_.emplace(std::move(key), id);
  return id;
}

const std::vector<int>& ChoiceSpace::legal(int request_id) const {
  std::shared_lock lock(mu_);
  return entries_[static_cast<std::size_t>(request_id)].legal;
}

std::size_t ChoiceSpace::request_count() const {
  std::shared_lock lock(mu_);
  return entries_.size();
}

std::vector<int> ChoiceSpace::legal_variables(TypeContext& ctx, const TypePtr& request,
                                              const std::vector<TypePtr>& env) const {
  std::vector<int> out;
  for (std::size_t i = 0; i < env.size(); ++i) {
    auto m = ctx.mark();
    TypePtr t = ctx.apply(env[env.size() - 1 - i]);
    if (ctx.unify(t->result(t), request)) out.push_back(static_cast<int>(i));
    ctx.undo(m);
  }
  return out;
}

std::optional<std::vector<TypePtr>> ChoiceSpace::commit(TypeContext& ctx, const TypePtr& request, int choice,
                                                        int var_index, const std::vector<TypePtr>& env) const {
  auto m = ctx.mark();
  TypePtr t;
  if (choice == kVariableChoice) {
    if (var_index < 0 || static_cast<std::size_t>(var_index) >= env.size()) return std::nullopt;
    t = ctx.apply(env[env.size() - 1 - static_cast<std::size_t>(var_index)]);
  } else {
    t = ctx.instantiate((*grammar_)[static_cast<std::size_t>(choice)].scheme);
  }
  if (!ctx.unify(t->result(t), request)) {
    ctx.undo(m);
    return std::nullopt;
  }
  return t->arguments();
}

// --- distributions ---------------------------------------------------------

GrammarLike::Summary GrammarLike::summary(int parent, int slot, int request_id) const {
  if (!contextual()) parent = slot = 0;
  std::uint64_t key = (static_cast<std::uint64_t>(parent + 1) << 44) | (static_cast<std::uint64_t>(slot) << 32) |
                      static_cast<std::uint32_t>(request_id);
  {
    std::shared_lock lock(mu_);
    auto it = cache_.find(key);
    if (it != cache_.end()) return it->second;
  }
  Summary s{kNegInf, kNegInf};
  for (int p : space().legal(request_id)) {
    double w = log_weight(parent, slot, p);
    s.lse = log_add_exp(s.lse, w);
    s.max_weight = std::max(s.max_weight, w);
  }
  std::unique_lock lock(mu_);
  cache_.emplace(key, s);
  return s;
}

double GrammarLike::log_normalizer(int parent, int slot, int request_id, int variables) const {
  double z = summary(parent, slot, request_id).lse;
  if (variables > 0)
    z = log_add_exp(z, std::log(static_cast<double>(variables)) + log_weight(parent, slot, kVariableChoice));
  return z;
}

double GrammarLike::best_log_prob(int parent, int slot, int request_id, int variables) const {
  double best = summary(parent, slot, request_id).max_weight;
  if (variables > 0) best = std::max(best, log_weight(parent, slot, kVariableChoice));
  if (best == kNegInf) return kNegInf;
  return best - log_normalizer(parent, slot, request_id, variables);
}

double GrammarLike::log_prob(int parent, int slot, int request_id, int variables, int chosen) const {
  return log_weight(parent, slot, chosen) - log_normalizer(parent, slot, request_id, variables);
}

PriorView::PriorView(const Grammar& grammar)
    : grammar_(&grammar), space_(std::make_shared<ChoiceSpace>(grammar)) {}

PriorView::PriorView(const Grammar& grammar, std::shared_ptr<const ChoiceSpace> space)
    : grammar_(&grammar), space_(std::move(space)) {}

double PriorView::log_weight(int, int, int child) const {
  if (child == kVariableChoice) return grammar_->variable_log_weight();
  return (*grammar_)[static_cast<std::size_t>(child)].log_weight;
}

// --- derivations -----------------------------------------------------------

namespace {

class Deriver {
 public:
  Deriver(const ChoiceSpace& space, Derivation& out) : space_(space), out_(out) {}

  void walk(const Term& t, const TypePtr& request, int parent, int slot) {
    TypePtr r = ctx_.apply(request);
    if (r->is_arrow()) {
      if (!t.is_abstraction()) throw TypeError("not in η-long form: " + t.str() + " for " + r->str());
      env_.push_back(r->from());
      walk(t.body(), r->to(), parent, slot);
      env_.pop_back();
      return;
    }
    if (t.is_abstraction()) throw TypeError("abstraction " + t.str() + " where " + r->str() + " is requested");
    Term head = t.head();
    std::vector<Term> args = t.arguments();
    int rid = space_.request_id(r);
    std::vector<int> vars = space_.legal_variables(ctx_, r, env_);
    ChoiceRecord rec{parent, slot, rid, kVariableChoice, static_cast<int>(vars.size())};
    int var_index = -1;
    if (head.is_variable()) {
      var_index = head.index();
      if (std::find(vars.begin(), vars.end(), var_index) == vars.end())
        throw TypeError("variable " + head.str() + " cannot produce " + r->str());
    } else if (head.is_production_leaf()) {
      auto idx = space_.grammar().index_of(head);
      if (!idx) throw TypeError("not in the library: " + head.str());
      const auto& legal = space_.legal(rid);
      if (!std::binary_search(legal.begin(), legal.end(), *idx))
        throw TypeError(head.str() + " cannot produce " + r->str());
      rec.chosen = *idx;
    } else {
      throw TypeError("β-redex in program: " + t.str());
    }
    out_.choices.push_back(rec);
    auto arg_types = space_.commit(ctx_, r, rec.chosen, var_index, env_);
    if (!arg_types) throw TypeError("type mismatch at " + t.str());
    if (arg_types->size() != args.size()) throw TypeError("not fully applied: " + t.str());
    int child_parent = rec.chosen == kVariableChoice ? kRootParent : rec.chosen;
    for (std::size_t i = 0; i < args.size(); ++i) walk(args[i], (*arg_types)[i], child_parent, static_cast<int>(i));
  }

  TypeContext& context() { return ctx_; }

 private:
  const ChoiceSpace& space_;
  Derivation& out_;
  TypeContext ctx_;
  std::vector<TypePtr> env_;
};

}  // namespace

Derivation derive(const Term& program, const TypePtr& request, const ChoiceSpace& space) {
  Derivation d;
  Deriver w(space, d);
  TypePtr r = w.context().instantiate(TypeScheme::generalize(request));
  w.walk(program, r, kRootParent, 0);
  return d;
}

double log_prior(const Derivation& d, const GrammarLike& dist) {
  double lp = 0.0;
  for (const auto& c : d.choices) lp += dist.log_prob(c.parent, c.slot, c.request, c.variables, c.chosen);
  return lp;
}

double log_prior(const Term& program, const TypePtr& request, const GrammarLike& dist) {
  return log_prior(derive(program, request, dist.space()), dist);
}

double log_prior(const Term& program, const TypePtr& request, const Grammar& grammar) {
  PriorView view(grammar);
  return log_prior(program, request, view);
}

namespace {

class Sampler {
 public:
  Sampler(const GrammarLike& dist, std::mt19937_64& rng, int max_depth)
      : dist_(dist), space_(dist.space()), rng_(rng), max_depth_(max_depth) {}

  std::optional<Term> run(const TypePtr& request) {
    TypePtr r = ctx_.instantiate(TypeScheme::generalize(request));
    return walk(r, kRootParent, 0, 0);
  }

 private:
  std::optional<Term> walk(const TypePtr& request, int parent, int slot, int depth) {
    TypePtr r = ctx_.apply(request);
    if (r->is_arrow()) {
      env_.push_back(r->from());
      auto body = walk(r->to(), parent, slot, depth);
      env_.pop_back();
      if (!body) return std::nullopt;
      return Term::abstraction(*body);
    }
    if (depth >= max_depth_) return std::nullopt;
    int rid = space_.request_id(r);
    std::vector<int> vars = space_.legal_variables(ctx_, r, env_);
    const auto& legal = space_.legal(rid);
    int nv = static_cast<int>(vars.size());
    std::vector<double> lp;
    lp.reserve(legal.size() + vars.size());
    for (int p : legal) lp.push_back(dist_.log_prob(parent, slot, rid, nv, p));
    for (std::size_t i = 0; i < vars.size(); ++i) lp.push_back(dist_.log_prob(parent, slot, rid, nv, kVariableChoice));
    if (lp.empty()) return std::nullopt;
    std::vector<double> p = softmax(lp);
    double u = static_cast<double>(rng_() >> 11) * 0x1.0p-53;
    std::size_t pick = 0;
    for (double acc = p[0]; pick + 1 < p.size() && u >= acc; acc += p[++pick]) {
    }
    int choice = kVariableChoice, var_index = -1;
    Term head;
    if (pick < legal.size()) {
      choice = legal[pick];
      head = space_.grammar()[static_cast<std::size_t>(choice)].term;
    } else {
      var_index = vars[pick - legal.size()];
      head = Term::variable(var_index);
    }
    auto arg_types = space_.commit(ctx_, r, choice, var_index, env_);
    if (!arg_types) return std::nullopt;
    int child_parent = choice == kVariableChoice ? kRootParent : choice;
    std::vector<Term> args;
    for (std::size_t i = 0; i < arg_types->size(); ++i) {
      auto a = walk((*arg_types)[i], child_parent, static_cast<int>(i), depth + 1);
      if (!a) return std::nullopt;
      args.push_back(std::move(*a));
    }
    return Term::apply_all(head, args);
  }

  const GrammarLike& dist_;
  const ChoiceSpace& space_;
  std::mt19937_64& rng_;
  int max_depth_;
  TypeContext ctx_;
  std::vector<TypePtr> env_;
};

}  // namespace

std::optional<Term> sample_program(const GrammarLike& dist, const TypePtr& request, std::mt19937_64& rng,
                                   int max_depth) {
  return Sampler(dist, rng, max_depth).run(request);
}

std::vector<LegalProduction> legal_productions(const Grammar& grammar, const TypePtr& request,
                                               const std::vector<TypePtr>& env) {
  // Instantiate request and environment together so they share variables.
  TypeContext ctx;
  TypePtr joint = ctx.instantiate(TypeScheme::generalize(Type::arrows(env, request)));
  std::vector<TypePtr> local = joint->arguments();
  local.resize(env.size());
  TypePtr r = joint;
  for (std::size_t i = 0; i < env.size(); ++i) r = r->to();
  while (r->is_arrow()) {
    local.push_back(r->from());
    r = r->to();
  }
  PriorView view(grammar);
  const ChoiceSpace& space = view.space();
  int rid = space.request_id(ctx.apply(r));
  std::vector<int> vars = space.legal_variables(ctx, r, local);
  int nv = static_cast<int>(vars.size());
  std::vector<LegalProduction> out;
  for (int p : space.legal(rid)) {
    LegalProduction lp;
    lp.production = p;
    auto m = ctx.mark();
    TypePtr t = ctx.instantiate(grammar[static_cast<std::size_t>(p)].scheme);
    ctx.unify(t->result(t), r);
    lp.type = ctx.apply(t);
    ctx.undo(m);
    lp.probability = std::exp(view.log_prob(kRootParent, 0, rid, nv, p));
    out.push_back(std::move(lp));
  }
  for (int v : vars) {
    LegalProduction lp;
    lp.var_index = v;
    auto m = ctx.mark();
    TypePtr t = ctx.apply(local[local.size() - 1 - static_cast<std::size_t>(v)]);
    ctx.unify(t->result(t), r);
    lp.type = ctx.apply(t);
    ctx.undo(m);
    lp.probability = std::exp(view.log_prob(kRootParent, 0, rid, nv, kVariableChoice));
    out.push_back(std::move(lp));
  }
  return out;
}

// --- weight fitting --------------------------------------------------------

std::vector<double> fit_weights_from(const Grammar& grammar, const ChoiceSpace& space,
                                     const std::vector<std::vector<Derivation>>& groups, double pseudocounts,
                                     double* variable_weight) {
  const std::size_t n = grammar.size();
  std::vector<double> theta(n);
  for (std::size_t i = 0; i < n; ++i) theta[i] = grammar[i].log_weight;
  double var_theta = grammar.variable_log_weight();
  std::shared_ptr<const ChoiceSpace> shared(&space, [](const ChoiceSpace*) {});

  bool any = false;
  for (const auto& g : groups) any = any || !g.empty();
  if (!any) {
    std::fill(theta.begin(), theta.end(), 0.0);
    if (variable_weight) *variable_weight = 0.0;
    return theta;
  }

  constexpr int kMaxIterations = 200;
  constexpr double kTolerance = 1e-12;
  for (int iter = 0; iter < kMaxIterations; ++iter) {
    Grammar current = grammar.with_weights(theta, var_theta);
    PriorView view(current, shared);
    std::vector<double> uses(n, 0.0), possible(n, 0.0);
    double var_uses = 0.0, var_possible = 0.0;
    for (const auto& group : groups) {
      if (group.empty()) continue;
      std::vector<double> lp;
      lp.reserve(group.size());
      for (const auto& d : group) lp.push_back(log_prior(d, view));
      double z = log_sum_exp(lp);
      for (std::size_t e = 0; e < group.size(); ++e) {
        double share = std::exp(lp[e] - z);
        for (const auto& c : group[e].choices) {
          if (c.chosen == kVariableChoice)
            var_uses += share;
          else
            uses[static_cast<std::size_t>(c.chosen)] += share;
          for (int p : space.legal(c.request)) possible[static_cast<std::size_t>(p)] += share;
          if (c.variables > 0) var_possible += share;
        }
      }
    }
    double delta = 0.0;
    std::vector<double> next(n);
    for (std::size_t i = 0; i < n; ++i) {
      next[i] = std::log(uses[i] + pseudocounts) - std::log(possible[i] + pseudocounts);
      delta = std::max(delta, std::abs(next[i] - theta[i]));
    }
    double next_var = std::log(var_uses + pseudocounts) - std::log(var_possible + pseudocounts);
    delta = std::max(delta, std::abs(next_var - var_theta));
    theta = std::move(next);
    var_theta = next_var;
    if (delta < kTolerance) break;
  }
  if (variable_weight) *variable_weight = var_theta;
  return theta;
}

Grammar fit_weights(const Grammar& grammar, const std::vector<Frontier>& frontiers, double pseudocounts) {
  ChoiceSpace space(grammar);
  std::vector<std::vector<Derivation>> groups;
  groups.reserve(frontiers.size());
  for (const auto& f : frontiers) {
    std::vector<Derivation> g;
    for (const auto& e : f.entries) g.push_back(derive(e.program, f.request, space));
    groups.push_back(std::move(g));
  }
  double vw = 0.0;
  auto theta = fit_weights_from(grammar, space, groups, pseudocounts, &vw);
  return grammar.with_weights(theta, vw).with_version(grammar.version() + 1);
}

double program_description_length(const std::vector<std::vector<Derivation>>& groups, const GrammarLike& dist) {
  double total = 0.0;
  for (const auto& group : groups) {
    if (group.empty()) continue;
    std::vector<double> lp;
    lp.reserve(group.size());
    for (const auto& d : group) lp.push_back(log_prior(d, dist));
    total -= log_sum_exp(lp);
  }
  return total;
}

}  // namespace lingo
