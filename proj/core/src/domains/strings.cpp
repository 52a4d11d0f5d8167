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

#include "lingo/domains/strings.hpp"

#include <algorithm>
#include <stdexcept>
#include <unordered_map>

#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "lingo/domains/regex.hpp"

namespace lingo {

namespace {

enum Prim {
  kIf,
  kCons,
  kCar,
  kCdr,
  kMap,
  kTail,
  kAppend,
  kRevcdr,
  kMatch,
  kRegexsplit,
  kFlatten,
  kRconcat,
  kRnot,
  kRor,
  kDot,
  kEmpty,
  kLetter,  // kLetter + i for 'a' + i
};

const std::vector<std::pair<std::string, std::string>>& signatures() {
  static const auto* sigs = [] {
    auto* v = new std::vector<std::pair<std::string, std::string>>{
        {"if", "bool -> t0 -> t0 -> t0"},
        {"cons", "t0 -> list(t0) -> list(t0)"},
        {"car", "list(t0) -> t0"},
        {"cdr", "list(t0) -> list(t0)"},
        {"map", "(t0 -> t1) -> list(t0) -> list(t1)"},
        {"tail", "list(t0) -> t0"},
        {"append", "t0 -> list(t0) -> list(t0)"},
        {"revcdr", "list(t0) -> list(t0)"},
        {"match", "substr -> substr -> bool"},
        {"regexsplit", "substr -> fullstr -> list(substr)"},
        {"flatten", "list(substr) -> fullstr"},
        {"rconcat", "substr -> substr -> substr"},
        {"rnot", "substr -> substr"},
        {"ror", "substr -> substr -> substr"},
        {"dot", "substr"},
        {"empty", "substr"},
    };
    for (char c = 'a'; c <= 'z'; ++c) v->emplace_back(std::string(1, c), "substr");
    return v;
  }();
  return *sigs;
}

const regex::Pattern& compiled(const std::string& source) {
  thread_local std::unordered_map<std::string, regex::Pattern> cache;
  auto it = cache.find(source);
  if (it != cache.end()) return it->second;
  if (cache.size() > 4096) cache.clear();
  try {
    return cache.emplace(source, regex::Pattern(source)).first->second;
  } catch (const regex::PatternError&) {
    throw RuntimeFault("malformed pattern");
  }
}

const ValueList& list_arg(const Value& v) {
  if (!v.is_list()) throw RuntimeFault("expected a list");
  return v.as_list();
}

const std::string& string_arg(const Value& v) {
  if (!v.is_string()) throw RuntimeFault("expected a string");
  return v.as_string();
}

}  // namespace

StringExecutor::StringExecutor() {
  const auto& sigs = signatures();
  for (std::size_t i = 0; i < sigs.size(); ++i) {
    int arity = static_cast<int>(TypeScheme::parse(sigs[i].second).type->arguments().size());
    table_.emplace_back(sigs[i].first, arity);
  }
}

std::optional<PrimitiveInfo> StringExecutor::resolve(std::string_view name) const {
  for (std::size_t i = 0; i < table_.size(); ++i)
    if (table_[i].first == name) return PrimitiveInfo{static_cast<int>(i), table_[i].second};
  return std::nullopt;
}

Value StringExecutor::call(int id, std::span<const Value> a, Applier& applier) const {
  switch (id) {
    case kIf:
      if (!a[0].is_bool()) throw RuntimeFault("if expects a bool");
      return a[0].as_bool() ? a[1] : a[2];
    case kCons: {
      ValueList out;
      const auto& xs = list_arg(a[1]);
      out.reserve(xs.size() + 1);
      out.push_back(a[0]);
      out.insert(out.end(), xs.begin(), xs.end());
      return Value(std::move(out));
    }
    case kCar: {
      const auto& xs = list_arg(a[0]);
      if (xs.empty()) throw RuntimeFault("car of empty list");
      return xs.front();
    }
    case kCdr: {
      const auto& xs = list_arg(a[0]);
      if (xs.empty()) throw RuntimeFault("cdr of empty list");
      return Value(ValueList(xs.begin() + 1, xs.end()));
    }
    case kMap: {
      const auto& xs = list_arg(a[1]);
      ValueList out;
      out.reserve(xs.size());
      for (const auto& x : xs) out.push_back(applier.apply(a[0], x));
      return Value(std::move(out));
    }
    case kTail: {
      const auto& xs = list_arg(a[0]);
      if (xs.empty()) throw RuntimeFault("tail of empty list");
      return xs.back();
    }
    case kAppend: {
      ValueList out = list_arg(a[1]);
      out.push_back(a[0]);
      return Value(std::move(out));
    }
    case kRevcdr: {
      const auto& xs = list_arg(a[0]);
      if (xs.empty()) throw RuntimeFault("revcdr of empty list");
      return Value(ValueList(xs.begin(), xs.end() - 1));
    }
    case kMatch:
      return Value(compiled(string_arg(a[0])).full_match(string_arg(a[1])));
    case kRegexsplit: {
      const auto& pieces = regex::split(compiled(string_arg(a[0])), string_arg(a[1]));
      ValueList out;
      out.reserve(pieces.size());
      for (const auto& p : pieces) out.emplace_back(p);
      return Value(std::move(out));
    }
    case kFlatten: {
      std::string out;
      for (const auto& x : list_arg(a[0])) out += string_arg(x);
      return Value(std::move(out));
    }
    case kRconcat:
      return Value(string_arg(a[0]) + string_arg(a[1]));
    case kRnot:
      return Value("[^" + string_arg(a[0]) + "]");
    case kRor:
      return Value("((" + string_arg(a[0]) + ")|(" + string_arg(a[1]) + "))");
    case kDot:
      return Value(".");
    case kEmpty:
      return Value("");
    default:
      if (id >= kLetter && id < kLetter + 26) return Value(std::string(1, static_cast<char>('a' + id - kLetter)));
      throw RuntimeFault("unknown string primitive");
  }
}

// --- transducers -----------------------------------------------------------

std::string StringTransducer::apply(const std::string& s) const {
  if (s.empty()) return s;
  std::string out;
  auto edit = [&](char c) -> std::string {
    switch (op) {
      case StringOp::kRemove:
        return "";
      case StringOp::kReplace:
        return std::string(1, insert);
      case StringOp::kDouble:
        return std::string(2, c);
      case StringOp::kAdd:
        return site == StringSite::kLast ? std::string{c, insert} : std::string{insert, c};
    }
    return std::string(1, c);
  };
  switch (site) {
    case StringSite::kEvery:
      for (char c : s) out += c == target ? edit(c) : std::string(1, c);
      return out;
    case StringSite::kFirst:
      return edit(s.front()) + s.substr(1);
    case StringSite::kLast:
      return s.substr(0, s.size() - 1) + edit(s.back());
  }
  return s;
}

Term StringTransducer::program() const {
  const std::string ins(1, insert);
  if (site == StringSite::kEvery) {
    std::string edit;
    switch (op) {
      case StringOp::kRemove:
        edit = "empty";
        break;
      case StringOp::kReplace:
        edit = ins;
        break;
      case StringOp::kDouble:
        edit = "(rconcat $0 $0)";
        break;
      case StringOp::kAdd:
        edit = "(rconcat " + ins + " $0)";
        break;
    }
    return parse(fmt::format("(lambda (flatten (map (lambda (if (match {} $0) {} $0)) (regexsplit dot $0))))",
                             std::string(1, target), edit));
  }
  const std::string xs = "(regexsplit dot $0)";
  std::string body;
  if (site == StringSite::kFirst) {
    switch (op) {
      case StringOp::kRemove:
        body = "(cdr " + xs + ")";
        break;
      case StringOp::kReplace:
        body = "(cons " + ins + " (cdr " + xs + "))";
        break;
      case StringOp::kDouble:
        body = "(cons (car " + xs + ") " + xs + ")";
        break;
      case StringOp::kAdd:
        body = "(cons " + ins + " " + xs + ")";
        break;
    }
  } else {
    switch (op) {
      case StringOp::kRemove:
        body = "(revcdr " + xs + ")";
        break;
      case StringOp::kReplace:
        body = "(append " + ins + " (revcdr " + xs + "))";
        break;
      case StringOp::kDouble:
        body = "(append (tail " + xs + ") " + xs + ")";
        break;
      case StringOp::kAdd:
        body = "(append " + ins + " " + xs + ")";
        break;
    }
  }
  return parse("(lambda (flatten " + body + "))");
}

std::vector<std::string> StringTransducer::description() const {
  const std::string ins(1, insert);
  std::vector<std::string> where;
  if (site == StringSite::kEvery)
    where = {"every", std::string(1, target)};
  else
    where = {"the", site == StringSite::kFirst ? "first" : "last", "letter"};
  std::vector<std::string> out;
  switch (op) {
    case StringOp::kRemove:
      out = {"remove"};
      out.insert(out.end(), where.begin(), where.end());
      break;
    case StringOp::kReplace:
      out = {"replace"};
      out.insert(out.end(), where.begin(), where.end());
      out.insert(out.end(), {"with", ins});
      break;
    case StringOp::kDouble:
      out = {"double"};
      out.insert(out.end(), where.begin(), where.end());
      break;
    case StringOp::kAdd:
      out = {"add", ins, site == StringSite::kLast ? "after" : "before"};
      out.insert(out.end(), where.begin(), where.end());
      break;
  }
  return out;
}

// --- domain ----------------------------------------------------------------

std::vector<std::pair<std::string, std::string>> StringDomain::primitives() const { return signatures(); }

std::string StringDomain::sample_word(Rng& rng, char must_contain) {
  static constexpr std::string_view kConsonants = "bcdfghjklmnpqrstvwxyz";
  static constexpr std::string_view kVowels = "aeiou";
  std::uniform_int_distribution<int> len_dist(3, 8);
  std::bernoulli_distribution coin(0.5);
  int len = len_dist(rng);
  bool vowel = coin(rng);
  std::string w;
  for (int i = 0; i < len; ++i) {
    std::string_view pool = vowel ? kVowels : kConsonants;
    std::uniform_int_distribution<std::size_t> pick(0, pool.size() - 1);
    w += pool[pick(rng)];
    vowel = coin(rng) ? !vowel : vowel;
  }
  if (must_contain) {
    std::uniform_int_distribution<std::size_t> pos(0, w.size() - 1);
    w[pos(rng)] = must_contain;
    if (coin(rng)) w[pos(rng)] = must_contain;
  }
  return w;
}

std::vector<Task> StringDomain::generate(int n, std::uint64_t seed) const {
  Rng rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::uniform_int_distribution<int> letter(0, 25);
  std::uniform_int_distribution<int> op_dist(0, 3);
  TypePtr request = parse_type("fullstr -> fullstr");
  std::vector<Task> tasks;
  tasks.reserve(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    StringTransducer tr;
    double u = unit(rng);
    tr.site = u < 0.5 ? StringSite::kEvery : (u < 0.75 ? StringSite::kFirst : StringSite::kLast);
    tr.op = static_cast<StringOp>(op_dist(rng));
    tr.target = static_cast<char>('a' + letter(rng));
    do {
      tr.insert = static_cast<char>('a' + letter(rng));
    } while (tr.insert == tr.target);

    Task t;
    t.id = fmt::format("strings-{:04d}", i);
    t.request = request;
    t.ground_truth = tr.program();
    t.description = tr.description();
    std::bernoulli_distribution contain(0.8);
    for (int k = 0; k < kExamplesPerTask; ++k) {
      char must = tr.site == StringSite::kEvery && contain(rng) ? tr.target : 0;
      std::string in = sample_word(rng, must);
      t.examples.push_back({{Value(in)}, Value(tr.apply(in))});
    }
    CompiledProgram prog(*t.ground_truth, executor_);
    for (const auto& ex : t.examples) {
      auto out = prog.run(ex.inputs, {});
      if (!out.ok() || !output_equal(out.value, ex.output))
        throw std::logic_error("generated task " + t.id + " is not solved by its program");
    }
    tasks.push_back(std::move(t));
  }
  return tasks;
}

std::vector<std::vector<Value>> StringDomain::sample_inputs(const TypePtr& request, int n, Rng& rng) const {
  auto args = request->arguments();
  std::vector<std::vector<Value>> out;
  for (int i = 0; i < n; ++i) {
    std::vector<Value> row;
    for (const auto& a : args) {
      if (!a->is_variable() && (a->name() == "fullstr" || a->name() == "substr"))
        row.emplace_back(sample_word(rng));
      else
        throw std::invalid_argument("cannot sample inputs of type " + a->str());
    }
    out.push_back(std::move(row));
  }
  return out;
}

namespace {

constexpr int kBigramBuckets = 32;
constexpr int kStringFeatures = 26 + kBigramBuckets + 8;

int bigram_bucket(char a, char b) {
  auto h = static_cast<unsigned>(static_cast<unsigned char>(a)) * 131u + static_cast<unsigned char>(b);
  return static_cast<int>((h * 2654435761u) % kBigramBuckets);
}

void count(const std::string& s, double sign, std::vector<double>& f) {
  for (std::size_t i = 0; i < s.size(); ++i) {
    char c = s[i];
    if (c >= 'a' && c <= 'z') f[static_cast<std::size_t>(c - 'a')] += sign;
    if (i + 1 < s.size()) f[static_cast<std::size_t>(26 + bigram_bucket(c, s[i + 1]))] += sign;
  }
}

}  // namespace

int StringDomain::feature_size() const { return kStringFeatures; }

std::vector<double> StringDomain::task_features(const Task& task) const {
  std::vector<double> f(kStringFeatures, 0.0);
  if (task.examples.empty()) return f;
  double n = 0.0;
  double in_len = 0, out_len = 0, changed = 0, first_kept = 0, last_kept = 0, grew = 0, shrank = 0, prefix = 0;
  for (const auto& ex : task.examples) {
    if (ex.inputs.empty() || !ex.inputs[0].is_string() || !ex.output.is_string()) continue;
    const std::string& in = ex.inputs[0].as_string();
    const std::string& out = ex.output.as_string();
    n += 1.0;
    count(out, 1.0, f);
    count(in, -1.0, f);
    in_len += static_cast<double>(in.size());
    out_len += static_cast<double>(out.size());
    changed += in != out;
    grew += out.size() > in.size();
    shrank += out.size() < in.size();
    if (!in.empty() && !out.empty()) {
      first_kept += in.front() == out.front();
      last_kept += in.back() == out.back();
      prefix += out.compare(0, std::min(in.size(), out.size()) - 1, in, 0, std::min(in.size(), out.size()) - 1) == 0;
    }
  }
  if (n == 0.0) return f;
  for (int i = 0; i < 26 + kBigramBuckets; ++i) f[static_cast<std::size_t>(i)] /= n;
  double* s = &f[26 + kBigramBuckets];
  s[0] = in_len / n / 8.0;
  s[1] = out_len / n / 8.0;
  s[2] = (out_len - in_len) / n;
  s[3] = changed / n;
  s[4] = first_kept / n;
  s[5] = last_kept / n;
  s[6] = (grew - shrank) / n;
  s[7] = prefix / n;
  return f;
}

nlohmann::json StringDomain::encode_value(const Value& v) const {
  if (v.is_string()) return v.as_string();
  if (v.is_bool()) return v.as_bool();
  if (v.is_list()) {
    nlohmann::json a = nlohmann::json::array();
    for (const auto& x : v.as_list()) a.push_back(encode_value(x));
    return a;
  }
  throw std::invalid_argument("cannot encode string-domain value " + v.str());
}

Value StringDomain::decode_value(const nlohmann::json& j) const {
  if (j.is_string()) return Value(j.get<std::string>());
  if (j.is_boolean()) return Value(j.get<bool>());
  if (j.is_array()) {
    ValueList xs;
    for (const auto& x : j) xs.push_back(decode_value(x));
    return Value(std::move(xs));
  }
  throw std::invalid_argument("cannot decode string-domain value " + j.dump());
}

}  // namespace lingo
