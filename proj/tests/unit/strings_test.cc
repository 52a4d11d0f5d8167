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

#include <cstdio>
#include <filesystem>

#include <gtest/gtest.h>

#include "lingo/domains/regex.hpp"
#include "lingo/domains/strings.hpp"
#include "lingo/search.hpp"

namespace lingo {
namespace {

Value run1(const std::string& program, std::vector<Value> args) {
  StringExecutor ex;
  EvalOutcome out = evaluate(parse(program), args, ex);
  if (!out.ok()) throw std::runtime_error(out.message);
  return out.value;
}

TEST(RegexTest, LiteralsWildcardNegationAlternation) {
  EXPECT_TRUE(regex::Pattern("a").full_match("a"));
  EXPECT_FALSE(regex::Pattern("a").full_match("b"));
  EXPECT_TRUE(regex::Pattern(".").full_match("x"));
  EXPECT_FALSE(regex::Pattern(".").full_match("xy"));
  EXPECT_TRUE(regex::Pattern("[^a]").full_match("b"));
  EXPECT_FALSE(regex::Pattern("[^a]").full_match("a"));
  EXPECT_TRUE(regex::Pattern("((a)|(bc))").full_match("bc"));
  EXPECT_TRUE(regex::Pattern("ab.").full_match("abz"));
  EXPECT_TRUE(regex::Pattern("").full_match(""));
  EXPECT_THROW(regex::Pattern("(a"), regex::PatternError);
}

TEST(RegexTest, LongestMatch) {
  regex::Pattern p("((a)|(aa))");
  EXPECT_EQ(p.longest_at("aaa", 0), 2);
  EXPECT_EQ(p.longest_at("baa", 0), -1);
}

TEST(RegexTest, SplitKeepsDelimitersAndDropsEmptyGaps) {
  using V = std::vector<std::string>;
  EXPECT_EQ(regex::split(regex::Pattern("b"), "abc"), (V{"a", "b", "c"}));
  EXPECT_EQ(regex::split(regex::Pattern("."), "abc"), (V{"a", "b", "c"}));
  EXPECT_EQ(regex::split(regex::Pattern("b"), "bab"), (V{"b", "a", "b"}));
  EXPECT_EQ(regex::split(regex::Pattern("z"), "abc"), (V{"abc"}));
  EXPECT_EQ(regex::split(regex::Pattern(""), "abc"), (V{"abc"}));
  EXPECT_EQ(regex::split(regex::Pattern("b"), ""), (V{}));
}

TEST(StringPrimitivesTest, Rconcat) {
  EXPECT_EQ(run1("(rconcat a b)", {}), Value("ab"));
}

TEST(StringPrimitivesTest, RegexsplitAndFlatten) {
  EXPECT_EQ(run1("(lambda (regexsplit b $0))", {Value("abc")}), Value(ValueList{"a", "b", "c"}));
  EXPECT_EQ(run1("(lambda (flatten (regexsplit b $0)))", {Value("abc")}), Value("abc"));
}

TEST(StringPrimitivesTest, MatchWithWildcard) {
  EXPECT_EQ(run1("(lambda (match dot $0))", {Value("x")}), Value(true));
  EXPECT_EQ(run1("(lambda (match dot $0))", {Value("xy")}), Value(false));
  EXPECT_EQ(run1("(lambda (match (rnot a) $0))", {Value("a")}), Value(false));
  EXPECT_EQ(run1("(lambda (match (ror a b) $0))", {Value("b")}), Value(true));
}

TEST(StringPrimitivesTest, ListOperations) {
  Value xs(ValueList{"a", "b", "c"});
  EXPECT_EQ(run1("(lambda (car $0))", {xs}), Value("a"));
  EXPECT_EQ(run1("(lambda (tail $0))", {xs}), Value("c"));
  EXPECT_EQ(run1("(lambda (cdr $0))", {xs}), Value(ValueList{"b", "c"}));
  EXPECT_EQ(run1("(lambda (revcdr $0))", {xs}), Value(ValueList{"a", "b"}));
  EXPECT_EQ(run1("(lambda (cons d $0))", {xs}), Value(ValueList{"d", "a", "b", "c"}));
  EXPECT_EQ(run1("(lambda (append d $0))", {xs}), Value(ValueList{"a", "b", "c", "d"}));
  EXPECT_EQ(run1("(lambda (map (lambda (rconcat $0 $0)) $0))", {xs}), Value(ValueList{"aa", "bb", "cc"}));
  EXPECT_EQ(run1("(lambda (if (match a (car $0)) x y))", {xs}), Value("x"));
}

TEST(StringPrimitivesTest, EmptyListAccessIsARuntimeError) {
  StringExecutor ex;
  for (const char* p : {"(lambda (car $0))", "(lambda (cdr $0))", "(lambda (tail $0))", "(lambda (revcdr $0))"}) {
    EvalOutcome out = evaluate(parse(p), std::vector<Value>{Value(ValueList{})}, ex);
    EXPECT_EQ(out.status, EvalStatus::kRuntimeError) << p;
  }
}

TEST(StringPrimitivesTest, ConstantsArePatterns) {
  EXPECT_EQ(run1("dot", {}), Value("."));
  EXPECT_EQ(run1("empty", {}), Value(""));
  EXPECT_EQ(run1("(rnot q)", {}), Value("[^q]"));
}

TEST(StringTransducerTest, RemoveEveryTarget) {
  StringTransducer tr{StringOp::kRemove, StringSite::kEvery, 'c', 'b'};
  EXPECT_EQ(tr.apply("abc"), "ab");
  EXPECT_EQ(tr.apply("cat"), "at");
  EXPECT_EQ(join_tokens(tr.description()), "remove every c");
}

TEST(StringTransducerTest, Families) {
  EXPECT_EQ((StringTransducer{StringOp::kReplace, StringSite::kFirst, 'a', 'd'}.apply("bob")), "dob");
  EXPECT_EQ((StringTransducer{StringOp::kDouble, StringSite::kLast, 'a', 'd'}.apply("bob")), "bobb");
  EXPECT_EQ((StringTransducer{StringOp::kAdd, StringSite::kEvery, 'o', 'x'}.apply("bobo")), "bxobxo");
  EXPECT_EQ((StringTransducer{StringOp::kAdd, StringSite::kLast, 'o', 'x'}.apply("bob")), "bobx");
  EXPECT_EQ((StringTransducer{StringOp::kDouble, StringSite::kEvery, 'o', 'x'}.apply("boo")), "boooo");
  EXPECT_EQ(join_tokens(StringTransducer{StringOp::kReplace, StringSite::kFirst, 'a', 'd'}.description()),
            "replace the first letter with d");
  EXPECT_EQ(join_tokens(StringTransducer{StringOp::kAdd, StringSite::kLast, 'a', 'd'}.description()),
            "add d after the last letter");
}

TEST(StringTransducerTest, ProgramsAgreeWithTheTransducer) {
  StringExecutor ex;
  Rng rng(5);
  for (int op = 0; op < 4; ++op) {
    for (int site = 0; site < 3; ++site) {
      StringTransducer tr{static_cast<StringOp>(op), static_cast<StringSite>(site), 'e', 'k'};
      CompiledProgram prog(tr.program(), ex);
      ASSERT_TRUE(prog.ok()) << prog.error();
      for (int i = 0; i < 40; ++i) {
        std::string w = StringDomain::sample_word(rng, i % 2 ? 'e' : 0);
        EvalOutcome out = prog.run(std::vector<Value>{Value(w)}, {});
        ASSERT_TRUE(out.ok()) << tr.program().str() << " on " << w;
        EXPECT_EQ(out.value, Value(tr.apply(w))) << tr.program().str() << " on " << w;
      }
    }
  }
}

TEST(StringDomainTest, GeneratedTasksAreSelfConsistentAndSeeded) {
  StringDomain d;
  auto a = d.generate(40, 17);
  auto b = d.generate(40, 17);
  ASSERT_EQ(a.size(), 40u);
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_EQ(a[i].examples.size(), 30u);
    EXPECT_TRUE(a[i].has_description());
    ASSERT_TRUE(a[i].ground_truth.has_value());
    EXPECT_TRUE(check_task(*a[i].ground_truth, a[i], d.executor()));
    EXPECT_EQ(a[i].description, b[i].description);
    EXPECT_EQ(*a[i].ground_truth, *b[i].ground_truth);
    for (std::size_t k = 0; k < a[i].examples.size(); ++k) EXPECT_EQ(a[i].examples[k].output, b[i].examples[k].output);
  }
  EXPECT_NE(d.generate(5, 18)[0].examples[0].inputs[0], a[0].examples[0].inputs[0]);
}

TEST(StringDomainTest, ScalesToLargeDatasets) {
  StringDomain d;
  EXPECT_EQ(d.generate(1500, 1).size(), 1500u);
}

TEST(StringDomainTest, FeaturesShowAddedLetters) {
  StringDomain d;
  Task t;
  t.request = parse_type("fullstr → fullstr");
  StringTransducer tr{StringOp::kAdd, StringSite::kEvery, 'a', 'x'};
  for (const char* w : {"banana", "tapa", "pal"}) t.examples.push_back({{Value(w)}, Value(tr.apply(w))});
  auto f = d.task_features(t);
  ASSERT_EQ(static_cast<int>(f.size()), d.feature_size());
  EXPECT_GT(f['x' - 'a'], 0.0);
  EXPECT_EQ(f['b' - 'a'], 0.0);
  EXPECT_EQ(d.task_features(t), f);
}

TEST(StringDomainTest, DatasetRoundTrip) {
  StringDomain d;
  auto tasks = d.generate(5, 2);
  tasks[1].split = Split::kTest;
  auto path = std::filesystem::temp_directory_path() / "lingo_strings_dataset.json";
  save_dataset(path.string(), tasks, d);
  auto back = load_dataset(path.string(), d);
  std::filesystem::remove(path);
  ASSERT_EQ(back.size(), tasks.size());
  for (std::size_t i = 0; i < tasks.size(); ++i) {
    EXPECT_EQ(back[i].id, tasks[i].id);
    EXPECT_EQ(back[i].split, tasks[i].split);
    EXPECT_EQ(back[i].description, tasks[i].description);
    EXPECT_EQ(*back[i].ground_truth, *tasks[i].ground_truth);
    EXPECT_EQ(back[i].request->str(), tasks[i].request->str());
    ASSERT_EQ(back[i].examples.size(), tasks[i].examples.size());
    EXPECT_EQ(back[i].examples[3].output, tasks[i].examples[3].output);
  }
}

TEST(StringDomainTest, OutputEquality) {
  StringDomain d;
  EXPECT_TRUE(d.output_equal(Value("ab"), Value("ab")));
  EXPECT_FALSE(d.output_equal(Value("ab"), Value("abc")));
  EXPECT_FALSE(d.output_equal(Value("ab"), Value(ValueList{"ab"})));
}

}  // namespace
}  // namespace lingo
