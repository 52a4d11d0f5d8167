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

#include <cmath>
#include <set>

#include <gtest/gtest.h>
#include <nlohmann/json.hpp>

#include "../support/toy.hpp"
#include "lingo/domains/graphics.hpp"
#include "lingo/domains/strings.hpp"
#include "lingo/grammar.hpp"
#include "lingo/search.hpp"

namespace lingo {
namespace {

using testing::BruteForce;
using testing::ToyGrammar;

Grammar strings_grammar() { return StringDomain().initial_grammar(); }

std::set<std::string> legal_names(const std::vector<LegalProduction>& legal, const Grammar& g) {
  std::set<std::string> out;
  for (const auto& l : legal) out.insert(l.production == kVariableChoice ? "$" : g[l.production].key());
  return out;
}

TEST(LegalProductionsTest, BoolRequestIncludesMatchExcludesCons) {
  Grammar g = strings_grammar();
  auto names = legal_names(legal_productions(g, parse_type("bool")), g);
  EXPECT_TRUE(names.count("match"));
  EXPECT_FALSE(names.count("cons"));
  EXPECT_FALSE(names.count("flatten"));
  // Polymorphic returns unify with anything.
  EXPECT_TRUE(names.count("if"));
  EXPECT_TRUE(names.count("car"));
}

TEST(LegalProductionsTest, PolymorphicRequestAdmitsEverything) {
  Grammar g = strings_grammar();
  TypeContext ctx;
  auto legal = legal_productions(g, ctx.fresh());
  EXPECT_EQ(legal.size(), g.size());
}

TEST(LegalProductionsTest, VariablesInScopeAreCandidates) {
  Grammar g = strings_grammar();
  auto legal = legal_productions(g, parse_type("fullstr"), {parse_type("fullstr"), parse_type("substr")});
  int vars = 0;
  for (const auto& l : legal) {
    if (l.production == kVariableChoice) {
      ++vars;
      EXPECT_EQ(l.var_index, 1);  // only the fullstr binder
    }
  }
  EXPECT_EQ(vars, 1);
}

TEST(LegalProductionsTest, EmptyWhenNothingUnifies) {
  ToyGrammar toy = testing::finite_toy();
  EXPECT_TRUE(legal_productions(toy.build(), parse_type("D")).empty());
}

TEST(LegalProductionsTest, ProbabilitiesSumToOneInEveryContext) {
  Grammar g = strings_grammar();
  std::vector<double> w(g.size());
  for (std::size_t i = 0; i < w.size(); ++i) w[i] = std::sin(static_cast<double>(i));
  Grammar weighted = g.with_weights(w, -0.4);
  for (const char* req : {"bool", "substr", "fullstr", "list(substr)", "list(t0)", "t0", "list(list(fullstr))"}) {
    for (const Grammar* gr : {&g, &weighted}) {
      double total = 0.0;
      for (const auto& l : legal_productions(*gr, parse_type(req), {parse_type("substr"), parse_type("t1")}))
        total += l.probability;
      EXPECT_NEAR(total, 1.0, 1e-9) << req;
    }
  }
}

TEST(LogPriorTest, UniformFourWayContext) {
  ToyGrammar toy{{{"w", {}, "X"}, {"x", {}, "X"}, {"y", {}, "X"}, {"z", {}, "X"}}, 0.0};
  Grammar g = toy.build();
  EXPECT_NEAR(log_prior(parse("y"), parse_type("X"), g), std::log(0.25), 1e-12);
}

TEST(LogPriorTest, IllTypedProgramThrows) {
  Grammar g = strings_grammar();
  EXPECT_THROW(log_prior(parse("(lambda (flatten $0))"), parse_type("fullstr → fullstr"), g), TypeError);
  // Not η-long: a partially applied primitive.
  EXPECT_THROW(log_prior(parse("(lambda (regexsplit a))"), parse_type("fullstr → fullstr → list(substr)"), g),
               TypeError);
}

TEST(LogPriorTest, GrowthStrictlyDecreasesPrior) {
  Grammar g = strings_grammar();
  TypePtr req = parse_type("fullstr → fullstr");
  const char* chain[] = {
      "(lambda $0)",
      "(lambda (flatten (regexsplit a $0)))",
      "(lambda (flatten (cdr (regexsplit a $0))))",
      "(lambda (flatten (cdr (cdr (regexsplit a $0)))))",
      "(lambda (flatten (cons b (cdr (cdr (regexsplit a $0))))))",
      "(lambda (flatten (cons (rnot b) (cdr (cdr (regexsplit a $0))))))",
  };
  double prev = 0.0;
  for (const char* p : chain) {
    double lp = log_prior(parse(p), req, g);
    EXPECT_LT(lp, prev) << p;
    prev = lp;
  }
}

TEST(LogPriorTest, MatchesBruteForceToDepthFour) {
  ToyGrammar toy = testing::arithmetic_toy();
  Grammar g = toy.build();
  BruteForce oracle(toy, 1 << 20, 4);
  auto programs = oracle.programs({}, "int");
  ASSERT_GT(programs.size(), 100u);
  double oracle_mass = 0.0;
  double library_mass = 0.0;
  for (const auto& p : programs) {
    double lp = log_prior(parse(p.text), parse_type("int"), g);
    EXPECT_NEAR(lp, p.log_prob, 1e-9) << p.text;
    oracle_mass += std::exp(p.log_prob);
    library_mass += std::exp(lp);
  }
  EXPECT_NEAR(library_mass, oracle_mass, 1e-9);
}

TEST(LogPriorTest, VariablesEachTakeTheVariableWeight) {
  ToyGrammar toy = testing::arithmetic_toy();
  Grammar g = toy.build();
  BruteForce oracle(toy, 5);
  for (const auto& p : oracle.programs({"int", "int"}, "int"))
    EXPECT_NEAR(log_prior(parse(p.text), parse_type("int → int → int"), g), p.log_prob, 1e-9) << p.text;
}

TEST(DescriptionLengthTest, InitialLibraryCostsOnePerPrimitive) {
  Grammar g = strings_grammar();
  EXPECT_DOUBLE_EQ(grammar_description_length(g, 1.5), 1.5 * static_cast<double>(g.size()));
}

TEST(DescriptionLengthTest, InventedAbstractionAddsItsSize) {
  Grammar g = strings_grammar();
  Term body = parse("(lambda (flatten (cons a (cdr (regexsplit dot $0)))))");
  ASSERT_EQ(body.size(), 7);
  Grammar g2 = g.with_invented(body);
  EXPECT_NEAR(grammar_description_length(g2, 1.5) - grammar_description_length(g, 1.5), 7 * 1.5, 1e-12);
  EXPECT_EQ(g2.version(), g.version() + 1);
}

TEST(GrammarTest, InventedProductionRecordsSubcomponents) {
  Grammar g = strings_grammar().with_invented(parse("(lambda (flatten (cons a (cdr (regexsplit dot $0)))))"));
  auto idx = g.index_of(Term::invented(parse("(lambda (flatten (cons a (cdr (regexsplit dot $0)))))")));
  ASSERT_TRUE(idx.has_value());
  const Production& p = g[static_cast<std::size_t>(*idx)];
  EXPECT_EQ(p.scheme.str(), "fullstr → fullstr");
  EXPECT_EQ(p.subcomponents, (std::vector<std::string>{"a", "cdr", "cons", "dot", "flatten", "regexsplit"}));
}

TEST(GrammarTest, InventedOfInventedInlinesSubcomponents) {
  Grammar g = strings_grammar().with_invented(parse("(lambda (cdr (regexsplit dot $0)))"));
  Term inner = Term::invented(parse("(lambda (cdr (regexsplit dot $0)))"));
  Term outer = Term::abstraction(Term::application(Term::primitive("flatten"), Term::application(inner, Term::variable(0))));
  Grammar g2 = g.with_invented(outer);
  auto idx = g2.index_of(Term::invented(outer));
  ASSERT_TRUE(idx.has_value());
  EXPECT_EQ(g2[static_cast<std::size_t>(*idx)].subcomponents,
            (std::vector<std::string>{"cdr", "dot", "flatten", "regexsplit"}));
}

TEST(GrammarTest, JsonRoundTripIsByteStable) {
  Grammar g = strings_grammar().with_invented(parse("(lambda (cdr (regexsplit dot $0)))"));
  std::vector<double> w(g.size());
  for (std::size_t i = 0; i < w.size(); ++i) w[i] = 0.125 * static_cast<double>(i % 5) - 0.3;
  g = g.with_weights(w, -1.25);
  nlohmann::json j = g.to_json();
  Grammar back = Grammar::from_json(j);
  EXPECT_EQ(back.to_json().dump(), j.dump());
  ASSERT_EQ(back.size(), g.size());
  for (std::size_t i = 0; i < g.size(); ++i) {
    EXPECT_EQ(back[i].key(), g[i].key());
    EXPECT_EQ(back[i].log_weight, g[i].log_weight);
  }
  EXPECT_EQ(back.variable_log_weight(), -1.25);
  EXPECT_EQ(back.version(), g.version());
}

TEST(GrammarTest, GraphicsLibraryTypes) {
  Grammar g = GraphicsDomain().initial_grammar();
  EXPECT_EQ(g.primitive_scheme("for")->str(), "int → (turtle → turtle) → turtle → turtle");
  EXPECT_EQ(g.primitive_scheme("move")->str(), "length → angle → turtle → turtle");
}

// p: A → A, q: A. The program (p (p q)) makes three choices in the {p, q}
// context: p twice and q once.
ToyGrammar pq_grammar() { return ToyGrammar{{{"p", {"A"}, "A"}, {"q", {}, "A"}}, 0.0}; }

double prob_of(const Grammar& g, const std::string& name) {
  for (const auto& l : legal_productions(g, parse_type("A")))
    if (g[l.production].key() == name) return l.probability;
  return 0.0;
}

Frontier single(const std::string& program, const std::string& request) {
  Frontier f;
  f.task_id = "t";
  f.request = parse_type(request);
  f.entries.push_back({parse(program), 0.0, 0.0});
  return f;
}

TEST(FitWeightsTest, CountRatioAtVanishingPseudocount) {
  Grammar g = pq_grammar().build();
  Grammar fit = fit_weights(g, {single("(p (p q))", "A")}, 1e-9);
  EXPECT_NEAR(prob_of(fit, "p"), 2.0 / 3.0, 1e-6);
  EXPECT_NEAR(prob_of(fit, "q"), 1.0 / 3.0, 1e-6);
  EXPECT_EQ(fit.version(), g.version() + 1);
}

TEST(FitWeightsTest, HugePseudocountIsNearlyUniform) {
  Grammar g = pq_grammar().build();
  Grammar fit = fit_weights(g, {single("(p (p q))", "A")}, 1e9);
  EXPECT_NEAR(prob_of(fit, "p"), 0.5, 1e-6);
}

TEST(FitWeightsTest, EmptyFrontiersGiveUniformContexts) {
  Grammar g = strings_grammar();
  std::vector<double> w(g.size());
  for (std::size_t i = 0; i < w.size(); ++i) w[i] = static_cast<double>(i) * 0.1;
  Grammar fit = fit_weights(g.with_weights(w, 2.0), {}, 30.0);
  for (const char* req : {"bool", "substr", "list(substr)"}) {
    auto legal = legal_productions(fit, parse_type(req));
    for (const auto& l : legal) EXPECT_NEAR(l.probability, 1.0 / static_cast<double>(legal.size()), 1e-12);
  }
}

std::vector<Frontier> string_frontiers() {
  std::vector<Frontier> fs;
  Frontier a = single("(lambda (flatten (cdr (regexsplit dot $0))))", "fullstr → fullstr");
  a.entries.push_back({parse("(lambda (flatten (cdr (regexsplit (rnot a) $0))))"), 0.0, 0.0});
  fs.push_back(a);
  Frontier b = single("(lambda (flatten (revcdr (regexsplit dot $0))))", "fullstr → fullstr");
  b.entries.push_back({parse("(lambda (flatten (revcdr (regexsplit (ror a dot) $0))))"), 0.0, 0.0});
  b.entries.push_back({parse("(lambda (flatten (cdr (cons a (revcdr (regexsplit dot $0))))))"), 0.0, 0.0});
  fs.push_back(b);
  fs.push_back(single("(lambda (flatten (map (lambda (rconcat $0 $0)) (regexsplit dot $0))))", "fullstr → fullstr"));
  return fs;
}

TEST(FitWeightsTest, IsIdempotent) {
  Grammar g = strings_grammar();
  auto fs = string_frontiers();
  Grammar once = fit_weights(g, fs, 1.0);
  Grammar twice = fit_weights(once, fs, 1.0);
  for (std::size_t i = 0; i < g.size(); ++i) EXPECT_NEAR(once[i].log_weight, twice[i].log_weight, 1e-8);
  EXPECT_NEAR(once.variable_log_weight(), twice.variable_log_weight(), 1e-8);
}

TEST(FitWeightsTest, FavoursUsedProductionsAndStaysNormalized) {
  Grammar g = strings_grammar();
  Grammar fit = fit_weights(g, string_frontiers(), 1.0);
  auto legal = legal_productions(fit, parse_type("list(substr)"));
  double total = 0.0, regexsplit = 0.0, append = 0.0;
  for (const auto& l : legal) {
    total += l.probability;
    if (l.production != kVariableChoice && fit[l.production].key() == "regexsplit") regexsplit = l.probability;
    if (l.production != kVariableChoice && fit[l.production].key() == "append") append = l.probability;
  }
  EXPECT_NEAR(total, 1.0, 1e-9);
  EXPECT_GT(regexsplit, append);
}

TEST(FitWeightsTest, RaisesTheFrontierLikelihood) {
  Grammar g = strings_grammar();
  auto fs = string_frontiers();
  Grammar fit = fit_weights(g, fs, 1.0);
  auto s0 = std::make_shared<const ChoiceSpace>(g);
  auto s1 = std::make_shared<const ChoiceSpace>(fit);
  std::vector<std::vector<Derivation>> d0, d1;
  for (const auto& f : fs) {
    d0.emplace_back();
    d1.emplace_back();
    for (const auto& e : f.entries) {
      d0.back().push_back(derive(e.program, f.request, *s0));
      d1.back().push_back(derive(e.program, f.request, *s1));
    }
  }
  PriorView v0(g, s0), v1(fit, s1);
  EXPECT_LT(program_description_length(d1, v1), program_description_length(d0, v0));
}

}  // namespace
}  // namespace lingo
