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

#include "lingo/search.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <map>
#include <mutex>
#include <queue>
#include <thread>
#include <tuple>

#include "lingo/mathutil.hpp"

namespace lingo {

namespace {

// Scores this close are ties: equal products summed in different orders
// differ in the last bits.
constexpr double kTieTolerance = 1e-9;

struct EnvNode {
  TypePtr type;
  std::shared_ptr<const EnvNode> next;
};
using Env = std::shared_ptr<const EnvNode>;

std::vector<TypePtr> env_vector(const Env& env) {
  std::vector<TypePtr> out;
  for (const EnvNode* e = env.get(); e; e = e->next.get()) out.push_back(e->type);
  std::reverse(out.begin(), out.end());  // back() is $0
  return out;
}

struct Hole {
  TypePtr request;
  Env env;
  int parent = kRootParent;
  int slot = 0;
};

struct HoleNode {
  Hole hole;
  double bound = 0.0;  // upper bound on the log-probability of any filler
  bool exact = false;  // bound computed from a fully resolved type
  std::shared_ptr<const HoleNode> next;
};
using Holes = std::shared_ptr<const HoleNode>;

struct TraceNode {
  int lambdas = 0;
  int choice = kVariableChoice;
  int var = -1;
  int arity = 0;
  std::shared_ptr<const TraceNode> prev;
};
using Trace = std::shared_ptr<const TraceNode>;

struct State {
  double logp = 0.0;
  double bound = 0.0;  // sum of hole bounds
  TypeContext ctx;
  Holes holes;
  Trace trace;
};

struct Option {
  int choice = kVariableChoice;
  int var = -1;
  int arity = 0;
  double lp = 0.0;
};

// A popped hole with its candidate fillers, best first.
struct Expansion {
  State base;  // hole removed
  Hole hole;   // env after λ-wrapping
  TypePtr request;
  int lambdas = 0;
  std::vector<Option> options;
};

struct Item {
  double score;
  bool complete;
  std::uint64_t seq;
  std::shared_ptr<const Expansion> exp;
  int index;
  std::shared_ptr<const State> state;  // set for re-queued partial states
};

struct ItemOrder {
  bool operator()(const Item& a, const Item& b) const {
    if (a.score != b.score) return a.score < b.score;
    if (a.complete != b.complete) return a.complete;
    return a.seq > b.seq;
  }
};

Term build(const std::vector<const TraceNode*>& nodes, std::size_t& i, const Grammar& g) {
  const TraceNode& n = *nodes[i++];
  Term head = n.choice == kVariableChoice ? Term::variable(n.var) : g[static_cast<std::size_t>(n.choice)].term;
  std::vector<Term> args;
  args.reserve(static_cast<std::size_t>(n.arity));
  for (int k = 0; k < n.arity; ++k) args.push_back(build(nodes, i, g));
  Term t = Term::apply_all(head, args);
  for (int k = 0; k < n.lambdas; ++k) t = Term::abstraction(t);
  return t;
}

Term reconstruct(const Trace& trace, const Grammar& g) {
  std::vector<const TraceNode*> nodes;
  for (const TraceNode* n = trace.get(); n; n = n->prev.get()) nodes.push_back(n);
  std::reverse(nodes.begin(), nodes.end());
  std::size_t i = 0;
  return build(nodes, i, g);
}

class Enumerator {
 public:
  explicit Enumerator(const GrammarLike& dist) : dist_(dist), space_(dist.space()), grammar_(dist.grammar()) {
    for (const auto& p : grammar_.productions()) {
      const TypePtr& t = p.scheme.type;
      always_legal_.push_back(t->result(t)->is_variable());
    }
  }

  std::shared_ptr<Expansion> expand(State state) {
    auto exp = std::make_shared<Expansion>();
    Hole h = state.holes->hole;
    state.bound -= state.holes->bound;
    state.holes = state.holes->next;
    TypePtr r = state.ctx.apply(h.request);
    Env env = h.env;
    int lambdas = 0;
    while (r->is_arrow()) {
      env = std::make_shared<const EnvNode>(EnvNode{r->from(), env});
      r = state.ctx.apply(r->to());
      ++lambdas;
    }
    int rid = space_.request_id(r);
    std::vector<TypePtr> envv = env_vector(env);
    std::vector<int> vars = space_.legal_variables(state.ctx, r, envv);
    int nv = static_cast<int>(vars.size());
    double z = dist_.log_normalizer(h.parent, h.slot, rid, nv);
    for (int p : space_.legal(rid)) {
      double lp = dist_.log_weight(h.parent, h.slot, p) - z;
      if (lp == -INFINITY || std::isnan(lp)) continue;
      exp->options.push_back({p, -1, grammar_[static_cast<std::size_t>(p)].arity(), lp});
    }
    if (nv > 0) {
      double lp = dist_.log_weight(h.parent, h.slot, kVariableChoice) - z;
      if (lp != -INFINITY && !std::isnan(lp)) {
        for (int v : vars) {
          TypePtr t = state.ctx.apply(envv[envv.size() - 1 - static_cast<std::size_t>(v)]);
          exp->options.push_back({kVariableChoice, v, static_cast<int>(t->arguments().size()), lp});
        }
      }
    }
    std::stable_sort(exp->options.begin(), exp->options.end(),
                     [](const Option& a, const Option& b) { return a.lp > b.lp; });
    h.env = env;
    exp->hole = std::move(h);
    exp->request = r;
    exp->lambdas = lambdas;
    exp->base = std::move(state);
    return exp;
  }

  State materialize(const Expansion& exp, int index) {
    const Option& o = exp.options[static_cast<std::size_t>(index)];
    State s = exp.base;
    auto args = space_.commit(s.ctx, exp.request, o.choice, o.var, env_vector(exp.hole.env));
    s.ctx.commit();
    s.logp = exp.base.logp + o.lp;
    refresh_bounds(s);
    int child_parent = o.choice == kVariableChoice ? kRootParent : o.choice;
    for (int j = static_cast<int>(args->size()) - 1; j >= 0; --j) {
      Hole h{(*args)[static_cast<std::size_t>(j)], exp.hole.env, child_parent, j};
      auto [bound, exact] = hole_bound(s.ctx, h);
      s.bound += bound;
      s.holes = std::make_shared<const HoleNode>(HoleNode{std::move(h), bound, exact, s.holes});
    }
    s.trace = std::make_shared<const TraceNode>(TraceNode{exp.lambdas, o.choice, o.var, o.arity, s.trace});
    return s;
  }

  // Exact best choice probability when the hole's type and scope are fully
  // resolved. Otherwise later unification can only shrink the legal set, so
  // the normalizer is bounded below by the always-legal productions (those
  // returning a bare type variable), or by the whole legal set when only the
  // scope is unresolved.
  std::pair<double, bool> hole_bound(const TypeContext& ctx, const Hole& h) {
    TypePtr r = ctx.apply(h.request);
    Env env = h.env;
    while (r->is_arrow()) {
      env = std::make_shared<const EnvNode>(EnvNode{r->from(), env});
      r = ctx.apply(r->to());
    }
    bool ground_env = true;
    for (const EnvNode* e = env.get(); e && ground_env; e = e->next.get())
      ground_env = !ctx.apply(e->type)->is_polymorphic();
    int rid = space_.request_id(r);
    TypeContext scratch = ctx;
    int nv = static_cast<int>(space_.legal_variables(scratch, r, env_vector(env)).size());
    if (!r->is_polymorphic() && ground_env) return {dist_.best_log_prob(h.parent, h.slot, rid, nv), true};

    BoundKey key{h.parent, h.slot, rid, nv > 0};
    if (auto it = loose_.find(key); it != loose_.end()) return {it->second, false};
    const auto& legal = space_.legal(rid);
    auto in_floor = [&](int p) { return !r->is_polymorphic() || always_legal_[static_cast<std::size_t>(p)]; };
    double floor = -INFINITY;
    for (int p : legal)
      if (in_floor(p)) floor = log_add_exp(floor, dist_.log_weight(h.parent, h.slot, p));
    double best = -INFINITY;
    for (int p : legal) {
      double w = dist_.log_weight(h.parent, h.slot, p);
      best = std::max(best, w - (in_floor(p) ? floor : log_add_exp(floor, w)));
    }
    if (nv > 0) {
      double w = dist_.log_weight(h.parent, h.slot, kVariableChoice);
      best = std::max(best, w - log_add_exp(floor, w));
    }
    if (std::isnan(best)) best = 0.0;
    loose_.emplace(key, best);
    return {best, false};
  }

  // Tightens bounds of holes whose types were resolved by the last commit.
  void refresh_bounds(State& s) {
    std::vector<const HoleNode*> nodes;
    bool stale = false;
    for (const HoleNode* n = s.holes.get(); n; n = n->next.get()) {
      nodes.push_back(n);
      if (!n->exact) stale = true;
    }
    if (!stale) return;
    Holes rebuilt;
    double total = 0.0;
    for (auto it = nodes.rbegin(); it != nodes.rend(); ++it) {
      const HoleNode* n = *it;
      auto [bound, exact] = n->exact ? std::pair{n->bound, true} : hole_bound(s.ctx, n->hole);
      total += bound;
      rebuilt = std::make_shared<const HoleNode>(HoleNode{n->hole, bound, exact, rebuilt});
    }
    s.holes = std::move(rebuilt);
    s.bound = total;
  }

  static bool complete_child(const Expansion& exp, int index) {
    return !exp.base.holes && exp.options[static_cast<std::size_t>(index)].arity == 0;
  }

  const Grammar& grammar() const { return grammar_; }

 private:
  struct BoundKey {
    int parent, slot, request, has_variables;
    bool operator<(const BoundKey& o) const {
      return std::tie(parent, slot, request, has_variables) < std::tie(o.parent, o.slot, o.request, o.has_variables);
    }
  };

  const GrammarLike& dist_;
  const ChoiceSpace& space_;
  const Grammar& grammar_;
  std::vector<bool> always_legal_;
  std::map<BoundKey, double> loose_;
};

}  // namespace

SearchStats enumerate(const GrammarLike& dist, const TypePtr& request, const SearchBudget& budget,
                      const EmitFn& emit) {
  SearchStats stats;
  Enumerator en(dist);
  std::priority_queue<Item, std::vector<Item>, ItemOrder> queue;
  std::uint64_t seq = 0;

  // Budget units: complete programs reached and partial states expanded
  // (the root excluded). Re-scoring a lazily queued state is free.
  bool exhausted = false;
  auto charge = [&] {
    if (stats.expansions >= budget.max_expansions) {
      exhausted = true;
      return false;
    }
    ++stats.expansions;
    return true;
  };
  auto push_first = [&](std::shared_ptr<const Expansion> exp) {
    if (exp->options.empty()) return;
    double score = exp->base.logp + exp->base.bound + exp->options[0].lp;
    if (score == -INFINITY) return;
    queue.push(Item{score, Enumerator::complete_child(*exp, 0), seq++, std::move(exp), 0, nullptr});
  };

  State root;
  TypePtr r = root.ctx.instantiate(TypeScheme::generalize(request));
  root.holes = std::make_shared<const HoleNode>(HoleNode{Hole{r, nullptr, kRootParent, 0}, 0.0, false, nullptr});
  push_first(en.expand(std::move(root)));

  struct Pending {
    std::string key;
    Term program;
    double score;
  };
  std::vector<Pending> buffer;
  double buffer_score = 0.0;
  bool stopped = false;
  auto flush = [&]() {
    std::sort(buffer.begin(), buffer.end(), [](const Pending& a, const Pending& b) { return a.key < b.key; });
    for (auto& p : buffer) {
      if (stopped) break;
      ++stats.emitted;
      if (!emit(p.program, p.score)) stopped = true;
    }
    buffer.clear();
  };

  auto start = std::chrono::steady_clock::now();
  std::uint64_t pops = 0;
  while (!queue.empty() && !stopped && !exhausted) {
    if (budget.max_seconds && (++pops & 1023) == 0) {
      std::chrono::duration<double> dt = std::chrono::steady_clock::now() - start;
      if (dt.count() > *budget.max_seconds) break;
    }
    Item item = queue.top();
    queue.pop();
    if (!buffer.empty() && item.score < buffer_score - kTieTolerance) {
      flush();
      if (stopped) break;
    }
    if (item.state) {
      if (!charge()) break;
      push_first(en.expand(*item.state));
      continue;
    }
    const Expansion& exp = *item.exp;
    int next = item.index + 1;
    if (next < static_cast<int>(exp.options.size())) {
      double score = exp.base.logp + exp.base.bound + exp.options[static_cast<std::size_t>(next)].lp;
      if (score != -INFINITY)
        queue.push(Item{score, Enumerator::complete_child(exp, next), seq++, item.exp, next, nullptr});
    }
    State child = en.materialize(exp, item.index);
    if (item.complete) {
      if (!charge()) break;
      if (buffer.empty()) buffer_score = item.score;
      Term program = reconstruct(child.trace, en.grammar());
      std::string key = program.str();
      buffer.push_back({std::move(key), std::move(program), item.score});
      continue;
    }
    double f = child.logp + child.bound;
    if (f == -INFINITY) continue;
    if (f >= item.score) {
      if (!charge()) break;
      push_first(en.expand(std::move(child)));
    } else {
      queue.push(Item{f, false, seq++, nullptr, -1, std::make_shared<const State>(std::move(child))});
    }
  }
  if (!stopped && !buffer.empty()) flush();
  return stats;
}

std::vector<Enumerated> enumerate(const GrammarLike& dist, const TypePtr& request, const SearchBudget& budget) {
  std::vector<Enumerated> out;
  enumerate(dist, request, budget, [&](const Term& t, double lp) {
    out.push_back({t, lp});
    return true;
  });
  return out;
}

bool check_task(const Term& program, const Task& task, const DomainExecutor& executor, const EvalLimit& limit) {
  CompiledProgram prog(program, executor);
  if (!prog.ok()) return false;
  for (const auto& ex : task.examples) {
    EvalOutcome out = prog.run(ex.inputs, limit);
    if (!out.ok() || !executor.output_equal(out.value, ex.output)) return false;
  }
  return true;
}

int default_workers() {
  if (const char* env = std::getenv("LINGO_WORKERS")) {
    int n = std::atoi(env);
    if (n > 0) return n;
  }
  return static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
}

void parallel_for(int n, int workers, const std::function<void(int)>& fn) {
  if (workers <= 0) workers = default_workers();
  workers = std::min(workers, n);
  if (workers <= 1) {
    for (int i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<int> next{0};
  std::mutex mu;
  std::exception_ptr error;
  int error_index = n;
  std::vector<std::thread> pool;
  for (int w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (int i = next++; i < n; i = next++) {
        try {
          fn(i);
        } catch (...) {
          std::lock_guard lock(mu);
          if (i < error_index) {
            error_index = i;
            error = std::current_exception();
          }
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
}

std::vector<Frontier> solve_tasks(const std::vector<Task>& tasks,
                                  const std::vector<std::shared_ptr<const GrammarLike>>& dists,
                                  const DomainExecutor& executor, const SolveOptions& options,
                                  std::vector<SearchStats>* stats) {
  if (dists.size() != tasks.size()) throw std::invalid_argument("one distribution per task is required");
  std::vector<Frontier> frontiers(tasks.size());
  std::vector<SearchStats> local(tasks.size());
  parallel_for(static_cast<int>(tasks.size()), options.workers, [&](int i) {
    const Task& task = tasks[static_cast<std::size_t>(i)];
    const GrammarLike& dist = *dists[static_cast<std::size_t>(i)];
    std::shared_ptr<const ChoiceSpace> space(&dist.space(), [](const ChoiceSpace*) {});
    PriorView prior(dist.grammar(), space);
    Frontier f;
    f.task_id = task.id;
    f.request = task.request;
    f.beam_width = options.beam_width;
    local[static_cast<std::size_t>(i)] = enumerate(dist, task.request, options.budget, [&](const Term& p, double) {
      if (!check_task(p, task, executor, options.limit)) return true;
      double lp = log_prior(p, task.request, prior);
      f.entries.push_back({p, lp, lp});
      return static_cast<int>(f.entries.size()) < options.beam_width;
    });
    f.normalize();
    frontiers[static_cast<std::size_t>(i)] = std::move(f);
  });
  if (stats) *stats = std::move(local);
  return frontiers;
}

}  // namespace lingo
