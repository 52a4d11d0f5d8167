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
#include <random>

#include <gtest/gtest.h>

#include "lingo/domains/strings.hpp"
#include "lingo/recognition.hpp"
#include "lingo/search.hpp"

namespace lingo {
namespace {

Grammar toy_grammar() { return Grammar::uniform({{"double", "s -> s"}, {"rev", "s -> s"}, {"x", "s"}}); }

RecognitionParams tiny_params() {
  RecognitionParams p;
  p.embedding = 3;
  p.hidden = 4;
  p.hash_buckets = 8;
  return p;
}

RecognitionExample toy_example(const std::string& program, std::vector<std::string> words) {
  return {{1.0, 0.5}, std::move(words), parse(program), parse_type("s -> s")};
}

double dot(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

TEST(LanguageFeatures, EmptyDescriptionIsZero) {
  auto f = language_features({}, {"a"}, 16);
  EXPECT_EQ(f.size(), 16u);
  EXPECT_EQ(dot(f, f), 0.0);
}

TEST(LanguageFeatures, PermutationOnlyMovesBigrams) {
  std::set<std::string> vocab{"make", "the", "word", "double"};
  auto a = language_features({"make", "the", "word", "double"}, vocab, 64);
  auto b = language_features({"double", "word", "the", "make"}, vocab, 64);
  for (int i = 0; i < 32; ++i) EXPECT_EQ(a[i], b[i]) << i;
  double bigram_diff = 0;
  for (int i = 32; i < 64; ++i) bigram_diff += std::abs(a[i] - b[i]);
  EXPECT_GT(bigram_diff, 0.0);
}

TEST(LanguageFeatures, DisjointDescriptionsAreOrthogonal) {
  std::set<std::string> vocab{"red", "blue", "big", "small"};
  auto a = language_features({"red", "big"}, vocab, 512);
  auto b = language_features({"blue", "small"}, vocab, 512);
  EXPECT_EQ(dot(a, b), 0.0);
  EXPECT_GT(dot(a, a), 0.0);
}

TEST(LanguageFeatures, UnknownTokensShareOneBucket) {
  std::set<std::string> vocab{"known"};
  EXPECT_EQ(language_features({"zebra"}, vocab, 32), language_features({"walrus"}, vocab, 32));
  EXPECT_NE(language_features({"zebra"}, vocab, 32), language_features({"known"}, vocab, 32));
}

TEST(Encoders, TaskEncodingIsDeterministicAndSensitive) {
  StringDomain domain;
  Task t = domain.generate(1, 5).front();
  Task u = t;
  std::string out = u.examples[0].output.as_string();
  out.push_back(out.empty() || out.back() != 'q' ? 'q' : 'z');
  u.examples[0].output = Value(out);
  RecognitionModel m(domain.initial_grammar(), domain.feature_size(), {}, RecognitionParams{}, 3);
  auto a = m.encode_task(domain.task_features(t));
  EXPECT_EQ(a.size(), static_cast<std::size_t>(kEmbeddingSize));
  EXPECT_EQ(a, m.encode_task(domain.task_features(t)));
  EXPECT_NE(a, m.encode_task(domain.task_features(u)));
}

TEST(Encoders, ZeroFeaturesProjectToZeroAtInitialization) {
  RecognitionModel m(toy_grammar(), 5, {"w"}, RecognitionParams{}, 1);
  for (double x : m.encode_task(std::vector<double>(5, 0.0))) EXPECT_EQ(x, 0.0);
  for (double x : m.encode_language({})) EXPECT_EQ(x, 0.0);
}

TEST(Tensor, ShapeTracksTheLibrary) {
  StringDomain domain;
  Grammar g = domain.initial_grammar();
  for (int round = 0; round < 3; ++round) {
    RecognitionModel m(g, domain.feature_size(), {}, RecognitionParams{}, 7);
    BigramTensor t = m.predict(g, std::vector<double>(static_cast<std::size_t>(domain.feature_size()), 0.0), {});
    int L = static_cast<int>(g.size());
    int A = g.max_arity();
    EXPECT_EQ(t.parents(), L + 1);
    EXPECT_EQ(t.children(), L + 2);
    EXPECT_EQ(t.arity(), A);
    EXPECT_EQ(t.size(), static_cast<std::size_t>((L + 1) * (L + 2) * A));
    Grammar next = g.with_invented(parse(round == 0   ? "(lambda (cdr (cdr $0)))"
                                         : round == 1 ? "(lambda (lambda (if $0 $1 $1)))"
                                                      : "(lambda (map (lambda (rconcat $0 $0)) $0))"));
    EXPECT_THROW(m.predict(next, std::vector<double>(static_cast<std::size_t>(domain.feature_size()), 0.0), {}),
                 std::invalid_argument);
    g = next;
  }
}

TEST(Tensor, UntrainedModelMatchesUniformPrior) {
  StringDomain domain;
  Grammar g = domain.initial_grammar();
  RecognitionModel m(g, domain.feature_size(), {}, RecognitionParams{}, 7);
  Task t = domain.generate(1, 9).front();
  RecognitionView view(g, m.predict(g, domain.task_features(t), t.description));
  PriorView prior(g);
  SearchBudget budget;
  budget.max_expansions = 3000;
  auto a = enumerate(view, t.request, budget);
  auto b = enumerate(prior, t.request, budget);
  ASSERT_EQ(a.size(), b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_EQ(a[i].program, b[i].program);
    EXPECT_NEAR(a[i].log_prob, b[i].log_prob, 1e-9);
  }
}

TEST(Tensor, IllegalChildrenGetNoMass) {
  Grammar g = toy_grammar();
  RecognitionModel m(g, 2, {}, tiny_params(), 1);
  auto& out = *m.blocks().back();
  for (double& b : out.b) b = 3.0;
  RecognitionView view(g, m.predict(g, {1.0, 0.5}, {}));
  // Under a `s -> s` request with $0 in scope every production is legal;
  // the distribution over them plus the variable sums to one.
  int req = view.space().request_id(parse_type("s"));
  double z = 0;
  for (int p : view.space().legal(req)) z += std::exp(view.log_prob(kRootParent, 0, req, 1, p));
  z += std::exp(view.log_prob(kRootParent, 0, req, 1, kVariableChoice));
  EXPECT_NEAR(z, 1.0, 1e-12);
  // A request no production returns has an empty legal set.
  EXPECT_TRUE(view.space().legal(view.space().request_id(parse_type("bool"))).empty());
}

// Central differences on every parameter of a miniature model.
void check_gradients(bool with_language) {
  Grammar g = toy_grammar();
  RecognitionModel m(g, 2, {"double", "rev"}, tiny_params(), 11);
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> u(-0.5, 0.5);
  for (Layer* l : m.blocks()) {
    for (double& x : l->w) x = u(rng);
    for (double& x : l->b) x = u(rng);
  }
  RecognitionExample ex = toy_example("(lambda (double (rev (double $0))))", {"double", "it", "rev"});
  std::vector<Layer> grad;
  example_loss(m, g, ex, with_language, &grad);
  auto blocks = m.blocks();
  ASSERT_EQ(grad.size(), blocks.size());
  const double h = 1e-5;
  int checked = 0;
  for (std::size_t bi = 0; bi < blocks.size(); ++bi) {
    for (int part = 0; part < 2; ++part) {
      auto& params = part == 0 ? blocks[bi]->w : blocks[bi]->b;
      const auto& analytic = part == 0 ? grad[bi].w : grad[bi].b;
      ASSERT_EQ(params.size(), analytic.size());
      for (std::size_t i = 0; i < params.size(); ++i) {
        double keep = params[i];
        params[i] = keep + h;
        double up = example_loss(m, g, ex, with_language);
        params[i] = keep - h;
        double down = example_loss(m, g, ex, with_language);
        params[i] = keep;
        double numeric = (up - down) / (2 * h);
        double denom = std::max(std::abs(numeric) + std::abs(analytic[i]), 1e-6);
        EXPECT_LE(std::abs(numeric - analytic[i]) / denom, 1e-4) << "block " << bi << " part " << part << " i " << i;
        ++checked;
      }
    }
  }
  EXPECT_EQ(checked, static_cast<int>(m.parameter_count()));
}

TEST(Training, GradientsMatchFiniteDifferencesWithLanguage) { check_gradients(true); }
TEST(Training, GradientsMatchFiniteDifferencesWithoutLanguage) { check_gradients(false); }

TEST(Training, OverfitsASingleExample) {
  Grammar g = toy_grammar();
  RecognitionModel m(g, 2, {"double"}, RecognitionParams{}, 2);
  std::vector<RecognitionExample> xs{toy_example("(lambda (double (rev $0)))", {"double"})};
  TrainingReport rep;
  RecognitionModel t = train(m, g, xs, {}, 2000, 5, &rep);
  EXPECT_LT(example_loss(t, g, xs[0], true), 0.01);
  EXPECT_LT(rep.mean_loss_last, rep.mean_loss_first);
  EXPECT_EQ(rep.steps, 2000);
}

TEST(Training, DescriptionCueRaisesRootProbability) {
  Grammar g = toy_grammar();
  std::vector<RecognitionExample> xs;
  for (int i = 0; i < 5; ++i) {
    xs.push_back(toy_example("(lambda (double $0))", {"make", "it", "double"}));
    xs.push_back(toy_example("(lambda (rev $0))", {"make", "it", "reversed"}));
    xs.push_back(toy_example("(lambda (rev (rev $0)))", {"keep", "it"}));
  }
  RecognitionModel m(g, 2, {"make", "it", "double", "reversed", "keep"}, RecognitionParams{}, 8);
  RecognitionModel t = train(m, g, xs, {}, 3000, 9);
  int dbl = *g.index_of(std::string("double"));
  auto root_prob = [&](const std::optional<std::vector<std::string>>& d) {
    RecognitionView v(g, t.predict(g, {1.0, 0.5}, d));
    int req = v.space().request_id(parse_type("s"));
    return std::exp(v.log_prob(kRootParent, 0, req, 1, dbl));
  };
  double with = root_prob(std::vector<std::string>{"make", "it", "double"});
  double without = root_prob(std::nullopt);
  EXPECT_GT(with, without);
  EXPECT_GT(with, 0.5);
}

TEST(Training, FixedSeedIsDeterministic) {
  Grammar g = toy_grammar();
  RecognitionModel m(g, 2, {"double"}, RecognitionParams{}, 2);
  std::vector<RecognitionExample> a{toy_example("(lambda (double $0))", {"double"})};
  std::vector<RecognitionExample> b{toy_example("(lambda (rev x))", {})};
  EXPECT_EQ(train(m, g, a, b, 300, 1).to_text(), train(m, g, a, b, 300, 1).to_text());
  EXPECT_NE(train(m, g, a, b, 300, 1).to_text(), train(m, g, a, b, 300, 2).to_text());
}

TEST(Training, VersionMismatchIsRejected) {
  Grammar g = toy_grammar();
  RecognitionModel m(g, 2, {}, RecognitionParams{}, 2);
  Grammar g2 = g.with_invented(parse("(lambda (double (rev $0)))"));
  EXPECT_THROW(train(m, g2, {}, {}, 10, 1), std::invalid_argument);
}

TEST(Checkpoint, TextRoundTripIsExact) {
  Grammar g = toy_grammar();
  RecognitionModel m(g, 2, {"double", "it"}, tiny_params(), 21);
  std::vector<RecognitionExample> xs{toy_example("(lambda (double $0))", {"double", "it"})};
  RecognitionModel t = train(m, g, xs, {}, 50, 3);
  std::string text = t.to_text();
  RecognitionModel back = RecognitionModel::from_text(text);
  EXPECT_EQ(back.to_text(), text);
  EXPECT_EQ(back.grammar_version(), t.grammar_version());
  EXPECT_EQ(back.seed(), 21u);
  EXPECT_EQ(back.predict(g, {1.0, 0.5}, xs[0].description).logits(),
            t.predict(g, {1.0, 0.5}, xs[0].description).logits());
}

TEST(Checkpoint, RejectsOtherFormats) {
  Grammar g = toy_grammar();
  std::string text = RecognitionModel(g, 2, {}, tiny_params(), 1).to_text();
  std::string bumped = text;
  bumped.replace(bumped.find(" 1\n"), 3, " 9\n");
  EXPECT_THROW(RecognitionModel::from_text(bumped), std::runtime_error);
  EXPECT_THROW(RecognitionModel::from_text("not a model"), std::runtime_error);
  EXPECT_THROW(RecognitionModel::from_text(text.substr(0, text.size() / 2)), std::runtime_error);
}

Grammar fitted_strings_grammar(const StringDomain& domain, const std::vector<Task>& tasks) {
  std::vector<Frontier> fs;
  for (const auto& t : tasks) fs.push_back({t.id, t.request, {{*t.ground_truth}}});
  return fit_weights(domain.initial_grammar(), fs, 30.0);
}

TEST(JointSamples, AreSelfConsistentAndSeeded) {
  StringDomain domain;
  Grammar g = fitted_strings_grammar(domain, domain.generate(60, 2));
  std::vector<TypePtr> requests{parse_type("fullstr -> fullstr")};
  bool exhausted = true;
  auto a = sample_joint(g, nullptr, nullptr, domain, requests, 30, 17, &exhausted);
  EXPECT_FALSE(exhausted);
  ASSERT_EQ(a.size(), 30u);
  for (const auto& s : a) {
    EXPECT_TRUE(check_task(s.program, s.task, domain.executor())) << s.program.str();
    EXPECT_TRUE(s.description.empty());
  }
  auto b = sample_joint(g, nullptr, nullptr, domain, requests, 30, 17);
  for (std::size_t i = 0; i < a.size(); ++i) EXPECT_EQ(a[i].program, b[i].program);
}

TEST(JointSamples, ShortBatchIsFlagged) {
  // Only the identity program is expressible, and copies are redrawn.
  StringDomain domain;
  Grammar g = Grammar::uniform({{"dot", "substr"}});
  bool exhausted = false;
  auto s = sample_joint(g, nullptr, nullptr, domain, {parse_type("fullstr -> fullstr")}, 5, 1, &exhausted);
  EXPECT_TRUE(s.empty());
  EXPECT_TRUE(exhausted);
}

TEST(JointSamples, DescriptionsUseTrainedVocabulary) {
  StringDomain domain;
  Grammar g = domain.initial_grammar();
  std::vector<Task> tasks = domain.generate(120, 4);
  std::vector<TranslationPair> pairs;
  std::vector<std::vector<std::string>> corpus;
  for (const auto& t : tasks) {
    pairs.push_back({linearize(*t.ground_truth), t.description});
    corpus.push_back(t.description);
  }
  TranslationTable table = train_em(pairs, TranslationParams{});
  SmoothedLM lm(corpus, 0.1);
  g = fitted_strings_grammar(domain, tasks);
  auto samples = sample_joint(g, &table, &lm, domain, {tasks[0].request}, 60, 3);
  ASSERT_FALSE(samples.empty());
  int with_known = 0;
  for (const auto& s : samples) {
    bool any = false;
    for (const auto& w : s.description) any = any || table.vocab_known().count(w);
    with_known += any;
  }
  EXPECT_GE(2 * with_known, static_cast<int>(samples.size()));
}

}  // namespace
}  // namespace lingo
