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

#include <set>

#include <gtest/gtest.h>

#include "../support/toy.hpp"
#include "lingo/domains/strings.hpp"
#include "lingo/infer.hpp"
#include "lingo/search.hpp"

namespace lingo {
namespace {

using testing::BruteForce;
using testing::ToyGrammar;

constexpr long kUnlimited = 1L << 40;

std::vector<Enumerated> run(const Grammar& g, const std::string& request, long budget) {
  PriorView view(g);
  return enumerate(view, parse_type(request), SearchBudget{budget});
}

TEST(EnumerateTest, FiniteSpaceMatchesBruteForceExactly) {
  ToyGrammar toy = testing::finite_toy();
  auto oracle = BruteForce(toy, 100).programs({"A", "A", "A"}, "C");
  BruteForce::sort(oracle);
  ASSERT_EQ(oracle.size(), 4096u);
  auto got = run(toy.build(), "A → A → A → C", kUnlimited);
  ASSERT_EQ(got.size(), oracle.size());
  for (std::size_t i = 0; i < got.size(); ++i) {
    ASSERT_EQ(got[i].program.str(), oracle[i].text) << "position " << i;
    EXPECT_NEAR(got[i].log_prob, oracle[i].log_prob, 1e-9);
  }
}

TEST(EnumerateTest, TwoPrimitiveOrderMatchesOracle) {
  // x: A, p: A → A; the programs with at most five symbols are x .. p⁴x.
  ToyGrammar toy{{{"x", {}, "A", 0.4}, {"p", {"A"}, "A", 0.0}}, 0.0};
  auto oracle = BruteForce(toy, 5).programs({}, "A");
  BruteForce::sort(oracle);
  ASSERT_EQ(oracle.size(), 5u);
  auto got = run(toy.build(), "A", 200);
  std::vector<std::string> small;
  for (const auto& e : got)
    if (e.program.size() <= 5) small.push_back(e.program.str());
  ASSERT_GE(small.size(), 5u);
  for (std::size_t i = 0; i < 5; ++i) EXPECT_EQ(small[i], oracle[i].text);
}

TEST(EnumerateTest, FirstProgramIsMostProbable) {
  ToyGrammar toy = testing::arithmetic_toy();
  auto oracle = BruteForce(toy, 4).programs({"int"}, "int");
  BruteForce::sort(oracle);
  auto got = run(toy.build(), "int → int", 1000);
  ASSERT_FALSE(got.empty());
  EXPECT_EQ(got.front().program.str(), oracle.front().text);
  EXPECT_NEAR(got.front().log_prob, oracle.front().log_prob, 1e-12);
}

TEST(EnumerateTest, BudgetOfOneYieldsAtMostTheBestProgram) {
  ToyGrammar toy = testing::arithmetic_toy();
  auto oracle = BruteForce(toy, 3).programs({"int"}, "int");
  BruteForce::sort(oracle);
  auto got = run(toy.build(), "int → int", 1);
  ASSERT_LE(got.size(), 1u);
  if (!got.empty()) EXPECT_EQ(got.front().program.str(), oracle.front().text);

  Grammar strings = StringDomain().initial_grammar();
  EXPECT_LE(run(strings, "fullstr → fullstr", 1).size(), 1u);
}

TEST(EnumerateTest, BudgetBoundsExpansions) {
  Grammar g = StringDomain().initial_grammar();
  PriorView view(g);
  for (long b : {1L, 10L, 1000L}) {
    SearchStats st = enumerate(view, parse_type("fullstr → fullstr"), SearchBudget{b}, [](const Term&, double) {
      return true;
    });
    EXPECT_LE(st.expansions, b);
  }
}

TEST(EnumerateTest, StopsWhenCallbackDeclines) {
  Grammar g = StringDomain().initial_grammar();
  PriorView view(g);
  int seen = 0;
  SearchStats st = enumerate(view, parse_type("fullstr → fullstr"), SearchBudget{100000}, [&](const Term&, double) {
    return ++seen < 7;
  });
  EXPECT_EQ(seen, 7);
  EXPECT_EQ(st.emitted, 7);
}

TEST(EnumerateTest, EmptyWhenRequestIsUninhabited) {
  ToyGrammar toy = testing::finite_toy();
  EXPECT_TRUE(run(toy.build(), "D", 1000).empty());
}

class StringEnumerationTest : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    grammar_ = new Grammar(StringDomain().initial_grammar());
    programs_ = new std::vector<Enumerated>(run(*grammar_, "fullstr → fullstr", 20000));
  }
  static void TearDownTestSuite() {
    delete programs_;
    delete grammar_;
  }
  static Grammar* grammar_;
  static std::vector<Enumerated>* programs_;
};

Grammar* StringEnumerationTest::grammar_ = nullptr;
std::vector<Enumerated>* StringEnumerationTest::programs_ = nullptr;

TEST_F(StringEnumerationTest, OrderIsNonIncreasingWithLexicographicTies) {
  const auto& ps = *programs_;
  ASSERT_GT(ps.size(), 1000u);
  for (std::size_t i = 1; i < ps.size(); ++i) {
    ASSERT_LE(ps[i].log_prob, ps[i - 1].log_prob + 1e-9) << i;
    if (std::abs(ps[i].log_prob - ps[i - 1].log_prob) <= 1e-9)
      ASSERT_LT(ps[i - 1].program.str(), ps[i].program.str()) << i;
  }
}

TEST_F(StringEnumerationTest, ScoresAreLogPriorsOfWellTypedDistinctPrograms) {
  TypePtr request = parse_type("fullstr → fullstr");
  std::set<std::string> seen;
  for (const auto& e : *programs_) {
    ASSERT_TRUE(seen.insert(e.program.str()).second) << e.program.str();
    EXPECT_NEAR(e.log_prob, log_prior(e.program, request, *grammar_), 1e-9);
    TypeContext ctx;
    EXPECT_TRUE(ctx.unify(ctx.instantiate(infer_type(e.program, grammar_->lookup())), request));
  }
}

TEST_F(StringEnumerationTest, IsDeterministic) {
  auto again = run(*grammar_, "fullstr → fullstr", 20000);
  ASSERT_EQ(again.size(), programs_->size());
  for (std::size_t i = 0; i < again.size(); ++i) {
    EXPECT_EQ(again[i].program, (*programs_)[i].program);
    EXPECT_EQ(again[i].log_prob, (*programs_)[i].log_prob);
  }
}

TEST(EnumerateTest, WeightedGrammarOrderStillSound) {
  Grammar g = StringDomain().initial_grammar();
  std::vector<double> w(g.size());
  for (std::size_t i = 0; i < w.size(); ++i) w[i] = std::cos(3.0 * static_cast<double>(i));
  auto ps = run(g.with_weights(w, 1.5), "fullstr → fullstr", 5000);
  ASSERT_GT(ps.size(), 100u);
  for (std::size_t i = 1; i < ps.size(); ++i) ASSERT_LE(ps[i].log_prob, ps[i - 1].log_prob + 1e-9);
}

Task int_task(const std::vector<std::pair<std::int64_t, std::int64_t>>& pairs) {
  Task t;
  t.id = "t";
  t.request = parse_type("int → int");
  for (auto [x, y] : pairs) t.examples.push_back({{Value(x)}, Value(y)});
  return t;
}

TEST(CheckTaskTest, IdentityOnIdentityTask) {
  testing::ToyExecutor ex;
  EXPECT_TRUE(check_task(parse("(lambda $0)"), int_task({{1, 1}, {5, 5}}), ex));
}

TEST(CheckTaskTest, OneDifferingPairFails) {
  testing::ToyExecutor ex;
  EXPECT_FALSE(check_task(parse("(lambda $0)"), int_task({{1, 1}, {5, 6}, {7, 7}}), ex));
}

TEST(CheckTaskTest, ErrorOnOneExampleIsFailure) {
  testing::ToyExecutor ex;
  std::vector<std::pair<std::int64_t, std::int64_t>> pairs;
  for (int i = 0; i < 30; ++i) pairs.emplace_back(i == 6 ? 0 : i + 1, i == 6 ? 0 : i);
  // dec faults on input 0 (example 7 of 30).
  EXPECT_FALSE(check_task(parse("(lambda (dec $0))"), int_task(pairs), ex));
  pairs[6] = {1, 0};
  EXPECT_TRUE(check_task(parse("(lambda (dec $0))"), int_task(pairs), ex));
}

std::vector<std::shared_ptr<const GrammarLike>> same_dist(const std::shared_ptr<const GrammarLike>& d, std::size_t n) {
  return std::vector<std::shared_ptr<const GrammarLike>>(n, d);
}

TEST(SolveTasksTest, FindsSixSymbolSolutionWhenBudgetCoversSmallPrograms) {
  ToyGrammar toy = testing::arithmetic_toy();
  Grammar g = toy.build();
  // 2x + 3 needs add, inc three times and $0 twice.
  Task task = int_task({{0, 3}, {1, 5}, {4, 11}, {10, 23}});
  auto small = BruteForce(toy, 6).programs({"int"}, "int");
  long budget = 300000;
  auto got = run(g, "int → int", budget);
  std::set<std::string> emitted;
  for (const auto& e : got) emitted.insert(e.program.str());
  for (const auto& p : small) ASSERT_TRUE(emitted.count(p.text)) << "budget does not cover " << p.text;

  testing::ToyExecutor ex;
  int solutions = 0;
  for (const auto& p : small) solutions += check_task(parse(p.text), task, ex);
  ASSERT_GT(solutions, 0);
  for (const auto& p : small)
    if (p.leaves < 6) EXPECT_FALSE(check_task(parse(p.text), task, ex)) << p.text;

  auto view = std::make_shared<PriorView>(g);
  SolveOptions opts;
  opts.budget.max_expansions = budget;
  opts.workers = 1;
  auto fs = solve_tasks({task}, same_dist(view, 1), ex, opts);
  ASSERT_EQ(fs.size(), 1u);
  ASSERT_FALSE(fs[0].empty());
  EXPECT_EQ(fs[0].best().program.size(), 6);
  for (const auto& e : fs[0].entries) {
    EXPECT_TRUE(check_task(e.program, task, ex));
    EXPECT_NEAR(e.log_prior, log_prior(e.program, task.request, g), 1e-9);
    EXPECT_EQ(e.log_posterior, e.log_prior);
  }
}

TEST(SolveTasksTest, BeamWidthOneKeepsTheBestSolution) {
  ToyGrammar toy = testing::arithmetic_toy();
  Grammar g = toy.build();
  Task task = int_task({{0, 2}, {3, 5}});
  auto view = std::make_shared<PriorView>(g);
  testing::ToyExecutor ex;
  SolveOptions wide;
  wide.budget.max_expansions = 20000;
  wide.beam_width = 5;
  SolveOptions narrow = wide;
  narrow.beam_width = 1;
  auto a = solve_tasks({task}, same_dist(view, 1), ex, wide);
  auto b = solve_tasks({task}, same_dist(view, 1), ex, narrow);
  ASSERT_EQ(a[0].entries.size(), 5u);
  ASSERT_EQ(b[0].entries.size(), 1u);
  EXPECT_EQ(b[0].best().program, a[0].best().program);
  for (std::size_t i = 1; i < a[0].entries.size(); ++i)
    EXPECT_LE(a[0].entries[i].log_posterior, a[0].entries[i - 1].log_posterior);
}

TEST(SolveTasksTest, InconsistentExamplesGiveEmptyFrontier) {
  Grammar g = testing::arithmetic_toy().build();
  Task task = int_task({{1, 2}, {1, 3}});
  testing::ToyExecutor ex;
  SolveOptions opts;
  opts.budget.max_expansions = 5000;
  auto fs = solve_tasks({task}, same_dist(std::make_shared<PriorView>(g), 1), ex, opts);
  EXPECT_TRUE(fs[0].empty());
}

TEST(SolveTasksTest, ResultsIndependentOfWorkerCount) {
  StringDomain domain;
  Grammar g = domain.initial_grammar();
  auto tasks = domain.generate(6, 3);
  auto view = std::make_shared<PriorView>(g);
  SolveOptions opts;
  opts.budget.max_expansions = 3000;
  opts.workers = 1;
  auto serial = solve_tasks(tasks, same_dist(view, tasks.size()), domain.executor(), opts);
  opts.workers = 3;
  auto parallel = solve_tasks(tasks, same_dist(std::make_shared<PriorView>(g), tasks.size()), domain.executor(), opts);
  ASSERT_EQ(serial.size(), parallel.size());
  for (std::size_t i = 0; i < serial.size(); ++i) {
    EXPECT_EQ(serial[i].task_id, tasks[i].id);
    ASSERT_EQ(serial[i].entries.size(), parallel[i].entries.size());
    for (std::size_t k = 0; k < serial[i].entries.size(); ++k)
      EXPECT_EQ(serial[i].entries[k].program, parallel[i].entries[k].program);
  }
}

TEST(SolveTasksTest, RejectsMismatchedDistributions) {
  testing::ToyExecutor ex;
  EXPECT_THROW(solve_tasks({int_task({{1, 1}})}, {}, ex, SolveOptions{}), std::invalid_argument);
}

TEST(ParallelForTest, PropagatesTheFirstFailure) {
  EXPECT_THROW(parallel_for(8, 3,
                            [](int i) {
                              if (i == 5) throw std::runtime_error("boom");
                            }),
               std::runtime_error);
  std::vector<int> hits(20, 0);
  parallel_for(20, 4, [&](int i) { hits[static_cast<std::size_t>(i)] += 1; });
  for (int h : hits) EXPECT_EQ(h, 1);
}

}  // namespace
}  // namespace lingo
