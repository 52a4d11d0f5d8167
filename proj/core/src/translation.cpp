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

#include "lingo/translation.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <random>
#include <sstream>
#include <stdexcept>
#include <unordered_map>

#include <fmt/format.h>

#include "lingo/mathutil.hpp"

namespace lingo {

// --- linearization ---------------------------------------------------------

namespace {

void linearize_into(const Term& t, std::vector<std::string>& out) {
  switch (t.kind()) {
    case TermKind::kAbstraction:
      out.emplace_back(kLambdaToken);
      linearize_into(t.body(), out);
      return;
    case TermKind::kApplication: {
      linearize_into(t.head(), out);
      for (const auto& a : t.arguments()) linearize_into(a, out);
      return;
    }
    case TermKind::kVariable:
      out.push_back("$" + std::to_string(t.index()));
      return;
    case TermKind::kPrimitive:
      out.push_back(t.name());
      return;
    case TermKind::kInvented:
      out.push_back(t.str());
      return;
  }
}

bool is_production_token(const std::string& tok) {
  return tok != kLambdaToken && tok != kNullToken && !(tok.size() > 1 && tok[0] == '$');
}

class Delinearizer {
 public:
  Delinearizer(const std::vector<std::string>& tokens, const Grammar& grammar)
      : tokens_(tokens), grammar_(grammar), space_(grammar) {}

  Term run(const TypePtr& request) {
    TypePtr r = ctx_.instantiate(TypeScheme::generalize(request));
    Term t = walk(r);
    if (pos_ != tokens_.size()) throw std::invalid_argument("trailing program tokens");
    return t;
  }

 private:
  const std::string& next() {
    if (pos_ >= tokens_.size()) throw std::invalid_argument("program tokens end early");
    return tokens_[pos_++];
  }

  Term walk(const TypePtr& request) {
    TypePtr r = ctx_.apply(request);
    if (r->is_arrow()) {
      if (next() != kLambdaToken) throw std::invalid_argument("expected λ for " + r->str());
      env_.push_back(r->from());
      Term body = walk(r->to());
      env_.pop_back();
      return Term::abstraction(body);
    }
    const std::string& tok = next();
    Term head;
    int choice = kVariableChoice;
    int var_index = -1;
    if (tok.size() > 1 && tok[0] == '$') {
      var_index = std::stoi(tok.substr(1));
      if (var_index < 0 || var_index >= static_cast<int>(env_.size()))
        throw std::invalid_argument("unbound variable token " + tok);
      head = Term::variable(var_index);
    } else {
      auto idx = grammar_.index_of(tok);
      if (!idx) throw std::invalid_argument("unknown program token " + tok);
      choice = *idx;
      head = grammar_[static_cast<std::size_t>(choice)].term;
    }
    auto arg_types = space_.commit(ctx_, r, choice, var_index, env_);
    if (!arg_types) throw std::invalid_argument("ill-typed token " + tok + " for " + r->str());
    std::vector<Term> args;
    args.reserve(arg_types->size());
    for (const auto& at : *arg_types) args.push_back(walk(at));
    return Term::apply_all(head, args);
  }

  const std::vector<std::string>& tokens_;
  const Grammar& grammar_;
  ChoiceSpace space_;
  TypeContext ctx_;
  std::vector<TypePtr> env_;
  std::size_t pos_ = 0;
};

}  // namespace

std::vector<std::string> linearize(const Term& program) {
  std::vector<std::string> out;
  linearize_into(program, out);
  return out;
}

Term delinearize(const std::vector<std::string>& tokens, const TypePtr& request, const Grammar& grammar) {
  return Delinearizer(tokens, grammar).run(request);
}

// --- EM --------------------------------------------------------------------

namespace {

struct Interner {
  std::unordered_map<std::string, int> ids;
  std::vector<std::string> names;
  int operator()(const std::string& s) {
    auto [it, inserted] = ids.emplace(s, static_cast<int>(names.size()));
    if (inserted) names.push_back(s);
    return it->second;
  }
};

struct EmResult {
  std::vector<std::vector<double>> t;       // [src][tgt]
  std::vector<std::vector<double>> counts;  // last E-step
  std::vector<double> ll;
};

// Model 1: every target token is generated by one source token (NULL
// included) chosen uniformly.
EmResult model1(const std::vector<std::pair<std::vector<int>, std::vector<int>>>& corpus, int nsrc, int ntgt,
                int iterations) {
  EmResult r;
  r.t.assign(static_cast<std::size_t>(nsrc), std::vector<double>(static_cast<std::size_t>(ntgt), 1.0 / ntgt));
  auto e_step = [&](std::vector<std::vector<double>>* counts) {
    double ll = 0.0;
    for (const auto& [src, tgt] : corpus) {
      double norm = static_cast<double>(src.size());
      for (int w : tgt) {
        double z = 0.0;
        for (int l : src) z += r.t[static_cast<std::size_t>(l)][static_cast<std::size_t>(w)];
        ll += std::log(z / norm);
        if (!counts) continue;
        for (int l : src) (*counts)[static_cast<std::size_t>(l)][static_cast<std::size_t>(w)] +=
            r.t[static_cast<std::size_t>(l)][static_cast<std::size_t>(w)] / z;
      }
    }
    return ll;
  };
  for (int it = 0; it < iterations; ++it) {
    r.counts.assign(static_cast<std::size_t>(nsrc), std::vector<double>(static_cast<std::size_t>(ntgt), 0.0));
    r.ll.push_back(e_step(&r.counts));
    for (std::size_t l = 0; l < r.t.size(); ++l) {
      double z = 0.0;
      for (double c : r.counts[l]) z += c;
      if (z <= 0.0) continue;
      for (std::size_t w = 0; w < r.t[l].size(); ++w) r.t[l][w] = r.counts[l][w] / z;
    }
  }
  r.ll.push_back(e_step(nullptr));
  return r;
}

}  // namespace

TranslationTable train_em(const std::vector<TranslationPair>& pairs, const TranslationParams& params) {
  if (pairs.empty()) throw std::invalid_argument("train_em needs at least one pair");
  if (!params.valid()) throw std::invalid_argument("invalid translation parameters");
  Interner progs, words;
  progs(kNullToken);
  words(kNullToken);
  std::vector<std::pair<std::vector<int>, std::vector<int>>> fwd, rev;
  for (const auto& p : pairs) {
    if (p.program.empty() || p.words.empty()) throw std::invalid_argument("empty token sequence in train_em");
    std::vector<int> ls{0}, ws{0};
    for (const auto& l : p.program) ls.push_back(progs(l));
    for (const auto& w : p.words) ws.push_back(words(w));
    fwd.emplace_back(ls, std::vector<int>(ws.begin() + 1, ws.end()));
    rev.emplace_back(ws, std::vector<int>(ls.begin() + 1, ls.end()));
  }
  int nl = static_cast<int>(progs.names.size());
  int nw = static_cast<int>(words.names.size());
  EmResult f = model1(fwd, nl, nw, params.em_iterations);
  EmResult b = model1(rev, nw, nl, params.em_iterations);

  TranslationTable table;
  for (int l = 0; l < nl; ++l) {
    for (int w = 1; w < nw; ++w) {
      double t = f.t[static_cast<std::size_t>(l)][static_cast<std::size_t>(w)];
      double c = f.counts[static_cast<std::size_t>(l)][static_cast<std::size_t>(w)];
      if (t > 0.0) table.t_wl_[progs.names[static_cast<std::size_t>(l)]][words.names[static_cast<std::size_t>(w)]] = t;
      if (c > 0.0)
        table.counts_[progs.names[static_cast<std::size_t>(l)]][words.names[static_cast<std::size_t>(w)]] = c;
    }
  }
  for (int w = 0; w < nw; ++w) {
    for (int l = 1; l < nl; ++l) {
      double t = b.t[static_cast<std::size_t>(w)][static_cast<std::size_t>(l)];
      if (t > 0.0) table.t_lw_[words.names[static_cast<std::size_t>(w)]][progs.names[static_cast<std::size_t>(l)]] = t;
    }
  }
  for (std::size_t w = 1; w < words.names.size(); ++w) table.known_.insert(words.names[w]);
  table.ll_wl_ = std::move(f.ll);
  table.ll_lw_ = std::move(b.ll);
  return table;
}

namespace {

double lookup2(const std::map<std::string, std::map<std::string, double>>& m, const std::string& a,
               const std::string& b) {
  auto it = m.find(a);
  if (it == m.end()) return 0.0;
  auto jt = it->second.find(b);
  return jt == it->second.end() ? 0.0 : jt->second;
}

}  // namespace

double TranslationTable::word_given_token(const std::string& w, const std::string& l) const {
  return lookup2(t_wl_, l, w);
}

double TranslationTable::token_given_word(const std::string& l, const std::string& w) const {
  return lookup2(t_lw_, w, l);
}

double TranslationTable::count(const std::string& l, const std::string& w) const { return lookup2(counts_, l, w); }

double TranslationTable::normalization_error() const {
  double err = 0.0;
  for (const auto* m : {&t_wl_, &t_lw_}) {
    for (const auto& [k, row] : *m) {
      double s = 0.0;
      for (const auto& [_, p] : row) s += p;
      err = std::max(err, std::abs(s - 1.0));
    }
  }
  return err;
}

// --- persistence -----------------------------------------------------------

std::string TranslationTable::to_text() const {
  std::set<std::pair<std::string, std::string>> keys;
  for (const auto& [l, row] : t_wl_)
    for (const auto& [w, _] : row) keys.emplace(l, w);
  for (const auto& [w, row] : t_lw_)
    for (const auto& [l, _] : row) keys.emplace(l, w);
  for (const auto& [l, row] : counts_)
    for (const auto& [w, _] : row) keys.emplace(l, w);
  std::string out = "# token\tword\tt[w|l]\tt[l|w]\tcount\n";
  for (const auto& [l, w] : keys) {
    out += fmt::format("{}\t{}\t{:.17g}\t{:.17g}\t{:.17g}\n", l, w, word_given_token(w, l), token_given_word(l, w),
                       count(l, w));
  }
  for (const auto& w : known_) out += fmt::format("known\t{}\n", w);
  for (const auto& w : new_) out += fmt::format("new\t{}\n", w);
  return out;
}

TranslationTable TranslationTable::from_text(const std::string& text) {
  TranslationTable t;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line == "#" || line.rfind("# ", 0) == 0) continue;
    std::vector<std::string> f;
    std::size_t start = 0;
    for (;;) {
      std::size_t tab = line.find('\t', start);
      f.push_back(line.substr(start, tab == std::string::npos ? std::string::npos : tab - start));
      if (tab == std::string::npos) break;
      start = tab + 1;
    }
    if (f.size() == 2 && f[0] == "known") {
      t.known_.insert(f[1]);
    } else if (f.size() == 2 && f[0] == "new") {
      t.new_.insert(f[1]);
    } else if (f.size() == 5) {
      double wl = std::stod(f[2]), lw = std::stod(f[3]), c = std::stod(f[4]);
      if (wl > 0.0) t.t_wl_[f[0]][f[1]] = wl;
      if (lw > 0.0) t.t_lw_[f[1]][f[0]] = lw;
      if (c > 0.0) t.counts_[f[0]][f[1]] = c;
    } else {
      throw std::invalid_argument(fmt::format("malformed translation table line {}", lineno));
    }
  }
  return t;
}

void TranslationTable::save(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << to_text();
}

TranslationTable TranslationTable::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return from_text(ss.str());
}

// --- mutual exclusivity ----------------------------------------------------

std::map<std::string, double> production_marginals(const Grammar& grammar) {
  std::vector<double> w;
  w.reserve(grammar.size());
  for (const auto& p : grammar.productions()) w.push_back(p.log_weight);
  std::vector<double> p = softmax(w);
  std::map<std::string, double> out;
  for (std::size_t i = 0; i < grammar.size(); ++i) out[grammar[i].key()] = p[i];
  return out;
}

TranslationTable apply_mutual_exclusivity(const TranslationTable& table, const Grammar& grammar,
                                          const std::vector<std::string>& new_words, double alpha) {
  if (!(alpha > 0)) throw std::invalid_argument("mutual exclusivity weight must be positive");
  TranslationTable out = table;
  auto marginals = production_marginals(grammar);
  std::set<std::string> touched;
  for (const auto& w : new_words) {
    if (table.known_.count(w)) throw std::invalid_argument("word '" + w + "' is already known");
    out.new_.insert(w);
    std::map<std::string, double> injected;
    double z = 0.0;
    for (const auto& [l, p] : marginals) {
      double c = alpha / p;
      injected[l] = c;
      z += c;
      out.counts_[l][w] += c;
      touched.insert(l);
    }
    auto& row = out.t_lw_[w];
    row.clear();
    for (const auto& [l, c] : injected) row[l] = c / z;
  }
  for (const auto& l : touched) {
    const auto& counts = out.counts_[l];
    double z = 0.0;
    for (const auto& [_, c] : counts) z += c;
    auto& row = out.t_wl_[l];
    row.clear();
    for (const auto& [w, c] : counts) row[w] = c / z;
  }
  return out;
}

// --- scoring ---------------------------------------------------------------

double score_description(const std::vector<std::string>& words, const Term& program, const TranslationTable& table) {
  std::vector<std::string> tokens = linearize(program);
  tokens.emplace_back(kNullToken);
  double score = 0.0;
  for (const auto& w : words) {
    double best = 0.0;
    for (const auto& l : tokens) best = std::max(best, table.word_given_token(w, l));
    score += std::log(std::max(best, kTranslationFloor));
  }
  return score;
}

// --- language model --------------------------------------------------------

namespace {
constexpr const char* kBos = "<s>";
constexpr const char* kEos = "</s>";
constexpr const char* kUnk = "<unk>";
}  // namespace

SmoothedLM::SmoothedLM(const std::vector<std::vector<std::string>>& corpus, double k) : k_(k) {
  if (!(k > 0)) throw std::invalid_argument("smoothing must be positive");
  vocab_.insert(kEos);
  vocab_.insert(kUnk);
  for (const auto& sentence : corpus) {
    std::string prev = kBos;
    for (const auto& w : sentence) {
      vocab_.insert(w);
      bigrams_[prev][w] += 1.0;
      unigrams_[prev] += 1.0;
      prev = w;
    }
    bigrams_[prev][kEos] += 1.0;
    unigrams_[prev] += 1.0;
  }
}

double SmoothedLM::log_prob(const std::string& prev, const std::string& w) const {
  const std::string& word = vocab_.count(w) ? w : std::string(kUnk);
  double v = static_cast<double>(std::max<std::size_t>(vocab_.size(), 1));
  double c = lookup2(bigrams_, prev, word);
  auto it = unigrams_.find(prev);
  double n = it == unigrams_.end() ? 0.0 : it->second;
  return std::log((c + k_) / (n + k_ * v));
}

double SmoothedLM::sentence_log_prob(const std::vector<std::string>& words) const {
  double lp = 0.0;
  std::string prev = kBos;
  for (const auto& w : words) {
    lp += log_prob(prev, w);
    prev = w;
  }
  return lp + log_prob(prev, kEos);
}

// --- decoding --------------------------------------------------------------

namespace {

struct Option {
  std::string word;  // empty: emit nothing
  double log_p;
};

std::vector<Option> token_options(const std::string& l, const TranslationTable& table, int k) {
  std::vector<Option> out;
  auto it = table.words_by_token().find(l);
  if (!is_production_token(l) || it == table.words_by_token().end() || it->second.empty()) {
    out.push_back({"", 0.0});
    return out;
  }
  std::vector<std::pair<double, std::string>> ranked;
  for (const auto& [w, p] : it->second) ranked.emplace_back(p, w);
  std::sort(ranked.begin(), ranked.end(),
            [](const auto& a, const auto& b) { return a.first != b.first ? a.first > b.first : a.second < b.second; });
  if (static_cast<int>(ranked.size()) > k) ranked.resize(static_cast<std::size_t>(k));
  double mass = 0.0;
  for (const auto& [p, w] : ranked) {
    out.push_back({w, std::log(std::max(p, kTranslationFloor))});
    mass += p;
  }
  out.push_back({"", std::log(std::max(1.0 - mass, kTranslationFloor))});
  return out;
}

struct Hypothesis {
  std::vector<std::string> words;
  double score = 0.0;
};

}  // namespace

std::vector<std::string> generate_description(const Term& program, const TranslationTable& table, const SmoothedLM& lm,
                                              DecodeMode mode, std::uint64_t seed, const TranslationParams& params) {
  std::vector<std::string> tokens = linearize(program);
  auto prev_of = [](const std::vector<std::string>& words) { return words.empty() ? std::string(kBos) : words.back(); };
  // LM log-probability of each option, renormalized over the option words.
  auto lm_scores = [&](const std::vector<std::string>& words, const std::vector<Option>& opts) {
    std::vector<double> raw, out(opts.size(), 0.0);
    for (const auto& o : opts)
      if (!o.word.empty()) raw.push_back(lm.log_prob(prev_of(words), o.word));
    double z = log_sum_exp(raw);
    for (std::size_t i = 0, j = 0; i < opts.size(); ++i)
      if (!opts[i].word.empty()) out[i] = params.lm_weight * (raw[j++] - z);
    return out;
  };

  if (mode == DecodeMode::kSample) {
    std::mt19937_64 rng(seed);
    std::vector<std::string> words;
    for (const auto& l : tokens) {
      auto opts = token_options(l, table, params.words_per_token);
      if (opts.size() == 1 && opts[0].word.empty()) continue;
      std::vector<double> scores = lm_scores(words, opts);
      for (std::size_t i = 0; i < opts.size(); ++i) scores[i] += opts[i].log_p;
      std::vector<double> p = softmax(scores);
      double u = static_cast<double>(rng() >> 11) * 0x1.0p-53;
      std::size_t pick = 0;
      for (double acc = p[0]; pick + 1 < p.size() && u >= acc; acc += p[++pick]) {
      }
      if (!opts[pick].word.empty()) words.push_back(opts[pick].word);
    }
    return words;
  }

  std::vector<Hypothesis> beam{Hypothesis{}};
  for (const auto& l : tokens) {
    auto opts = token_options(l, table, params.words_per_token);
    if (opts.size() == 1 && opts[0].word.empty()) continue;
    std::vector<Hypothesis> next;
    for (const auto& h : beam) {
      std::vector<double> lm_part = lm_scores(h.words, opts);
      for (std::size_t i = 0; i < opts.size(); ++i) {
        Hypothesis n = h;
        n.score += opts[i].log_p + lm_part[i];
        if (!opts[i].word.empty()) n.words.push_back(opts[i].word);
        next.push_back(std::move(n));
      }
    }
    std::sort(next.begin(), next.end(), [](const Hypothesis& a, const Hypothesis& b) {
      return a.score != b.score ? a.score > b.score : a.words < b.words;
    });
    if (static_cast<int>(next.size()) > params.beam_width) next.resize(static_cast<std::size_t>(params.beam_width));
    beam = std::move(next);
  }
  for (auto& h : beam) h.score += params.lm_weight * lm.log_prob(prev_of(h.words), kEos);
  auto best = std::min_element(beam.begin(), beam.end(), [](const Hypothesis& a, const Hypothesis& b) {
    return a.score != b.score ? a.score > b.score : a.words < b.words;
  });
  return best->words;
}

// --- description length ----------------------------------------------------

namespace {

struct AlignmentItem {
  std::set<std::string> prims;
  double count;
  double prob;
  bool aligned;
};

double item_dl(const AlignmentItem& it) { return it.count * -std::log(std::max(it.prob, kTranslationFloor)); }

}  // namespace

double translation_description_length(const TranslationTable& table, const Grammar& grammar) {
  return refactored_description_length(table, grammar, {});
}

double refactored_description_length(const TranslationTable& table, const Grammar& grammar,
                                     const std::vector<std::vector<std::string>>& merges) {
  std::vector<std::set<std::string>> merge_sets;
  for (const auto& m : merges) merge_sets.emplace_back(m.begin(), m.end());

  // word -> items
  std::map<std::string, std::vector<AlignmentItem>> by_word;
  for (const auto& [l, row] : table.counts()) {
    auto idx = grammar.index_of(l);
    if (!idx) continue;
    const Production& p = grammar[static_cast<std::size_t>(*idx)];
    std::set<std::string> prims;
    if (p.term.is_invented())
      prims.insert(p.subcomponents.begin(), p.subcomponents.end());
    else
      prims.insert(l);
    for (const auto& [w, c] : row) {
      if (c <= 0.0) continue;
      by_word[w].push_back({prims, c, table.word_given_token(w, l), false});
    }
  }

  double total = 0.0;
  for (auto& [w, items] : by_word) {
    double mass = 0.0;
    for (const auto& it : items) mass += it.count;
    for (auto& it : items) it.aligned = it.count >= kAlignmentShare * mass;
    for (const auto& s : merge_sets) {
      std::vector<std::size_t> inside;
      std::set<std::string> covered;
      for (std::size_t i = 0; i < items.size(); ++i) {
        if (!items[i].aligned) continue;
        if (!std::includes(s.begin(), s.end(), items[i].prims.begin(), items[i].prims.end())) continue;
        inside.push_back(i);
        covered.insert(items[i].prims.begin(), items[i].prims.end());
      }
      if (inside.size() < 2 || covered != s) continue;
      AlignmentItem merged{s, 0.0, 0.0, true};
      double miss = 1.0;
      for (std::size_t i : inside) {
        merged.count = std::max(merged.count, items[i].count);
        miss *= 1.0 - items[i].prob;
      }
      merged.prob = 1.0 - miss;
      std::vector<AlignmentItem> rest;
      for (std::size_t i = 0; i < items.size(); ++i)
        if (std::find(inside.begin(), inside.end(), i) == inside.end()) rest.push_back(items[i]);
      rest.push_back(std::move(merged));
      items = std::move(rest);
    }
    for (const auto& it : items) total += item_dl(it);
  }
  return total;
}

}  // namespace lingo
