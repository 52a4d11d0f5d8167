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

#include <algorithm>
#include <cmath>
#include <set>

#include <fmt/format.h>
#include <gtest/gtest.h>

#include "lingo/compression.hpp"
#include "lingo/domains/graphics.hpp"
#include "lingo/search.hpp"

namespace lingo {
namespace {

Grammar toy_grammar() {
  return Grammar::uniform({{"f", "int -> int"},
                           {"g", "int -> int"},
                           {"h", "int -> int -> int"},
                           {"a", "int"},
                           {"b", "int"},
                           {"c", "int"}});
}

std::vector<Frontier> frontiers_of(const std::vector<std::string>& programs, const std::string& request = "int") {
  std::vector<Frontier> out;
  for (std::size_t i = 0; i < programs.size(); ++i) {
    Frontier f;
    f.task_id = "t" + std::to_string(i);
    f.request = parse_type(request);
    f.entries.push_back({parse(programs[i])});
    out.push_back(std::move(f));
  }
  return out;
}

const Candidate* find(const std::vector<Candidate>& cs, const std::string& body) {
  Term t = parse(body);
  for (const auto& c : cs)
    if (c.body == t) return &c;
  return nullptr;
}

CompressionParams no_language() {
  CompressionParams p;
  p.translation_weight = 0.0;
  return p;
}

// Objective recomputed through the frontier-level weight fitting path.
double oracle_objective(const std::vector<Frontier>& frontiers, const Grammar& grammar, const CompressionParams& p) {
  Grammar fitted = fit_weights(grammar, frontiers, p.pseudocounts);
  double pdl = 0.0;
  for (const auto& f : frontiers) {
    double m = -INFINITY;
    std::vector<double> lps;
    for (const auto& e : f.entries) lps.push_back(log_prior(e.program, f.request, fitted));
    for (double x : lps) m = std::max(m, x);
    double z = 0.0;
    for (double x : lps) z += std::exp(x - m);
    pdl -= m + std::log(z);
  }
  double gdl = 0.0;
  for (const auto& prod : grammar.productions())
    gdl += prod.term.is_invented() ? prod.term.body().size() : 1;
  return pdl + p.structure_penalty * gdl + static_cast<double>(grammar.size());
}

TEST(Propose, SharedSubtreeBecomesOneArgumentTemplate) {
  auto fs = frontiers_of({"(f (g a))", "(f (g b))"});
  auto cs = propose(fs, no_language());
  const Candidate* c = find(cs, "(lambda (f (g $0)))");
  ASSERT_NE(c, nullptr);
  EXPECT_EQ(c->arity, 1);
  EXPECT_EQ(c->uses.size(), 2u);
  EXPECT_EQ(c->distinct_entries(), 2);
  EXPECT_EQ(c->subcomponents(), (std::vector<std::string>{"f", "g"}));
}

TEST(Propose, SingleProgramYieldsNothing) {
  auto fs = frontiers_of({"(f (g (h a b)))"});
  EXPECT_TRUE(propose(fs, no_language()).empty());
}

TEST(Propose, EmptyInputRejected) { EXPECT_THROW(propose({}, no_language()), std::invalid_argument); }

TEST(Propose, TemplatesAreClosedAndWithinArity) {
  CompressionParams p = no_language();
  auto fs = frontiers_of({"(h (f (g a)) (h b c))", "(h (f (g c)) (h a c))", "(f (h (g a) c))"});
  for (const auto& c : propose(fs, p)) {
    EXPECT_TRUE(c.body.closed()) << c.body.str();
    EXPECT_LE(c.arity, std::min(p.max_arity, p.refactoring_depth));
    EXPECT_GE(c.distinct_entries(), 2);
  }
}

TEST(Refactorings, HexagonLoopExposesSideCount) {
  Term hex = parse("(lambda (for ∞ (lambda (move unit_line (/ 2π 6) $0)) $0))");
  auto rs = refactorings(hex, no_language());
  Term polygon = parse("(lambda (for ∞ (lambda (move unit_line (/ 2π $1) $0))))");
  Term step = parse("(lambda (lambda (move unit_line (/ 2π $1) $0)))");
  bool has_polygon = false, has_step = false;
  for (const auto& [t, node] : rs) {
    has_polygon = has_polygon || t == polygon;
    has_step = has_step || t == step;
    EXPECT_TRUE(t.closed());
  }
  EXPECT_TRUE(has_polygon);
  EXPECT_TRUE(has_step);
}

TEST(Rewrite, NoMatchLeavesProgramUnchanged) {
  Candidate c{parse("(lambda (f (g $0)))"), 1, {}};
  Term p = parse("(g (f a))");
  EXPECT_EQ(rewrite(p, c), p);
}

TEST(Rewrite, LeafCountDropsByTemplateLeavesMinusOne) {
  Candidate c{parse("(lambda (f (g $0)))"), 1, {}};
  Term p = parse("(h (f (g (f (g a)))) (f (g b)))");
  Term r = rewrite(p, c);
  // Three sites, each trading two template leaves for one invented leaf.
  EXPECT_EQ(p.size() - r.size(), 3);
  Term inv = Term::invented(c.body);
  Term expect = Term::apply_all(parse("h"), {Term::application(inv, Term::application(inv, parse("a"))),
                                             Term::application(inv, parse("b"))});
  EXPECT_EQ(r, expect);
}

TEST(Rewrite, RepeatedHoleMustBindEqualTerms) {
  Candidate c{parse("(lambda (h $0 $0))"), 1, {}};
  EXPECT_EQ(rewrite(parse("(h a b)"), c), parse("(h a b)"));
  EXPECT_EQ(rewrite(parse("(h a a)"), c), Term::application(Term::invented(c.body), parse("a")));
}

TEST(Rewrite, AbstractionSiteStaysEtaLong) {
  Grammar g = GraphicsDomain().initial_grammar();
  Candidate c{parse("(lambda (lambda (move unit_line (/ 2π $1) $0)))"), 1, {}};
  Term p = parse("(lambda (for ∞ (lambda (move unit_line (/ 2π 6) $0)) $0))");
  Grammar g2 = g.with_invented(c.body);
  Term r = rewrite_typed(p, c, parse_type("turtle -> turtle"), g2);
  Term inv = Term::invented(c.body);
  Term site = Term::abstraction(Term::apply_all(inv, {parse("6"), Term::variable(0)}));
  EXPECT_EQ(r, Term::abstraction(Term::apply_all(parse("for"), {parse("∞"), site, Term::variable(0)})));
  ChoiceSpace space(g2);
  EXPECT_NO_THROW(derive(r, parse_type("turtle -> turtle"), space));
  EXPECT_EQ(GraphicsDomain::render(r).value, GraphicsDomain::render(p).value);
}

TEST(Rewrite, VariablesBoundInsideTheMatchAreNotHoles) {
  // The argument of move references the loop binder, so it cannot be
  // abstracted from a template rooted outside that binder.
  Candidate c{parse("(lambda (lambda (for ∞ (lambda (move $2 2π $0)) $0)))"), 1, {}};
  Term p = parse("(lambda (for ∞ (lambda (move unit_line 2π $0)) $0))");
  Term r = rewrite(p, c);
  EXPECT_NE(r, p);
  Term q = parse("(lambda (for ∞ (lambda (move $0 2π $0)) $0))");
  EXPECT_EQ(rewrite(q, c), q);
}

TEST(Objective, MatchesIndependentComputation) {
  CompressionParams p = no_language();
  auto fs = frontiers_of({"(f (g a))", "(f (g b))", "(h a (g c))"});
  Grammar g = toy_grammar();
  auto terms = objective(fs, g, nullptr, g, {}, p);
  EXPECT_NEAR(terms.total(), oracle_objective(fs, g, p), 1e-6);
  EXPECT_DOUBLE_EQ(terms.translation, 0.0);
  EXPECT_DOUBLE_EQ(terms.parameters, 6.0);
  EXPECT_DOUBLE_EQ(terms.grammar, 1.5 * 6);

  Grammar g2 = g.with_invented(parse("(lambda (f (g $0)))"));
  Candidate c{parse("(lambda (f (g $0)))"), 1, {}};
  std::vector<Frontier> rewritten = fs;
  for (auto& f : rewritten)
    for (auto& e : f.entries) e.program = rewrite(e.program, c);
  EXPECT_NEAR(score(c, fs, g, nullptr, p), oracle_objective(rewritten, g2, p), 1e-6);
}

TEST(Score, UnusedCandidateCostsAtLeastItsDescription) {
  CompressionParams p = no_language();
  auto fs = frontiers_of({"(f (g a))", "(f (g b))"});
  Grammar g = toy_grammar();
  double base = objective(fs, g, nullptr, g, {}, p).total();
  Candidate unused{parse("(lambda (h (h $0 c) c))"), 1, {}};
  double s = score(unused, fs, g, nullptr, p);
  EXPECT_GE(s - base, p.structure_penalty * unused.body.size());
}

TEST(Score, FrequentSubtreeLowersObjective) {
  CompressionParams p = no_language();
  auto fs = frontiers_of({"(f (h (f a) (g b)))", "(g (h (f a) (g b)))", "(h (h (f a) (g b)) c)",
                          "(f (f (h (f a) (g b))))"});
  Grammar g = toy_grammar();
  double base = objective(fs, g, nullptr, g, {}, p).total();
  Candidate c{parse("(h (f a) (g b))"), 0, {}};
  EXPECT_LT(score(c, fs, g, nullptr, p), base);
}

TEST(Score, AlreadyPresentCandidateIsInfinite) {
  CompressionParams p = no_language();
  Grammar g = toy_grammar().with_invented(parse("(lambda (f (g $0)))"));
  auto fs = frontiers_of({"(f (g a))", "(f (g b))"});
  Candidate c{parse("(lambda (f (g $0)))"), 1, {}};
  EXPECT_TRUE(std::isinf(score(c, fs, g, nullptr, p)));
}

std::vector<Frontier> polygon_frontiers() {
  std::vector<std::string> programs;
  for (int sides : {3, 4, 5, 6, 7, 8})
    for (const char* len : {"unit_line", "(* unit_line 2)"})
      programs.push_back(fmt::format("(lambda (for ∞ (lambda (move {} (/ 2π {}) $0)) $0))", len, sides));
  return frontiers_of(programs, "turtle -> turtle");
}

TEST(Compress, RecoversPlantedPolygonAbstraction) {
  CompressionParams p = no_language();
  Grammar g = GraphicsDomain().initial_grammar();
  auto fs = polygon_frontiers();
  CompressionResult r = compress(fs, g, nullptr, p);
  ASSERT_FALSE(r.accepted.empty());
  auto subs = r.accepted.front().subcomponents();
  for (const char* name : {"for", "move", "/", "2π"})
    EXPECT_TRUE(std::find(subs.begin(), subs.end(), name) != subs.end()) << name;
  EXPECT_LT(r.objective_after, r.objective_before);
  EXPECT_EQ(r.grammar.size(), g.size() + r.accepted.size());
  EXPECT_GT(r.grammar.version(), g.version());
}

TEST(Compress, ObjectiveDecreasesAtEveryStep) {
  CompressionParams p = no_language();
  CompressionResult r = compress(polygon_frontiers(), GraphicsDomain().initial_grammar(), nullptr, p);
  double prev = r.objective_before;
  for (const auto& s : r.steps) {
    EXPECT_NEAR(s.before.total(), prev, 1e-9);
    EXPECT_LT(s.after.total(), s.before.total());
    EXPECT_GT(s.rewritten_entries, 0);
    prev = s.after.total();
  }
  EXPECT_NEAR(prev, r.objective_after, 1e-9);
  EXPECT_LE(static_cast<int>(r.accepted.size()), p.max_new_abstractions);
}

TEST(Compress, PreservesSemanticsOfEveryEntry) {
  GraphicsDomain domain;
  std::vector<Task> tasks = domain.generate(24, 11);
  std::vector<Frontier> fs;
  for (const auto& t : tasks) {
    Frontier f;
    f.task_id = t.id;
    f.request = t.request;
    f.entries.push_back({*t.ground_truth});
    fs.push_back(std::move(f));
  }
  CompressionResult r = compress(fs, domain.initial_grammar(), nullptr, no_language());
  ASSERT_EQ(r.frontiers.size(), fs.size());
  ChoiceSpace space(r.grammar);
  for (std::size_t i = 0; i < tasks.size(); ++i) {
    ASSERT_EQ(r.frontiers[i].entries.size(), 1u);
    const Term& prog = r.frontiers[i].entries[0].program;
    EXPECT_TRUE(check_task(prog, tasks[i], domain.executor())) << prog.str();
    EXPECT_NO_THROW(derive(prog, tasks[i].request, space));
    EXPECT_NEAR(r.frontiers[i].entries[0].log_prior, log_prior(prog, tasks[i].request, r.grammar), 1e-9);
  }
}

TEST(Compress, SubcomponentsAreInitialPrimitives) {
  Grammar g = GraphicsDomain().initial_grammar();
  auto names = g.primitive_names();
  std::set<std::string> initial(names.begin(), names.end());
  CompressionResult r = compress(polygon_frontiers(), g, nullptr, no_language());
  for (const auto& prod : r.grammar.productions()) {
    if (!prod.term.is_invented()) continue;
    for (const auto& s : prod.subcomponents) EXPECT_TRUE(initial.count(s)) << s;
  }
  for (const auto& c : r.accepted)
    for (const auto& s : c.subcomponents()) EXPECT_TRUE(initial.count(s)) << s;
}

TEST(Compress, NothingToShareKeepsGrammar) {
  Grammar g = toy_grammar();
  auto fs = frontiers_of({"(f a)", "(g b)"});
  CompressionResult r = compress(fs, g, nullptr, no_language());
  EXPECT_TRUE(r.accepted.empty());
  EXPECT_EQ(r.grammar.size(), g.size());
  EXPECT_EQ(r.grammar.version(), g.version());
  EXPECT_DOUBLE_EQ(r.objective_before, r.objective_after);
}

TEST(Compress, ReportListsAcceptedAbstractions) {
  CompressionResult r = compress(polygon_frontiers(), GraphicsDomain().initial_grammar(), nullptr, no_language());
  std::string rep = compression_report(r);
  EXPECT_NE(rep.find("objective"), std::string::npos);
  std::size_t lines = std::count(rep.begin(), rep.end(), '\n');
  EXPECT_EQ(lines, r.steps.size() + 1);
}

TEST(Compress, TranslationTermRewardsCoveringAbstraction) {
  // "gon" aligns evenly to every primitive of the polygon abstraction.
  Grammar g = GraphicsDomain().initial_grammar();
  auto fs = polygon_frontiers();
  CompressionResult plain = compress(fs, g, nullptr, no_language());
  ASSERT_FALSE(plain.accepted.empty());
  auto subs = plain.accepted.front().subcomponents();
  subs.erase(std::unique(subs.begin(), subs.end()), subs.end());
  std::string rows;
  for (const auto& l : subs) rows += fmt::format("{}\tgon\t0.500000000\t{:.9f}\t10.000000000\n", l, 1.0 / subs.size());
  rows += "known\tgon\n";
  TranslationTable table = TranslationTable::from_text(rows);
  CompressionParams with = no_language();
  with.translation_weight = 1.0;
  auto base = objective(fs, g, &table, g, {}, with);
  EXPECT_NEAR(base.translation, 10.0 * subs.size() * std::log(2.0), 1e-6);
  CompressionResult r = compress(fs, g, &table, with);
  ASSERT_FALSE(r.steps.empty());
  EXPECT_LT(r.steps.back().after.translation, base.translation);
  EXPECT_EQ(r.accepted.front().body, plain.accepted.front().body);
}

}  // namespace
}  // namespace lingo
