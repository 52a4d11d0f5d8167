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

#include "lingo/recognition.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <random>
#include <sstream>
#include <stdexcept>
#include <unordered_map>

#include <fmt/format.h>

#include "lingo/eval.hpp"
#include "lingo/mathutil.hpp"
#include "lingo/search.hpp"

namespace lingo {

namespace {

constexpr const char* kCheckpointMagic = "lingo-recognition";
constexpr int kCheckpointFormat = 1;

std::uint64_t fnv1a(std::string_view s) {
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

double unit(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

Layer make_layer(int rows, int cols, std::mt19937_64* rng) {
  Layer l{rows, cols, std::vector<double>(static_cast<std::size_t>(rows) * cols, 0.0),
          std::vector<double>(static_cast<std::size_t>(rows), 0.0)};
  if (rng && rows > 0 && cols > 0) {
    double a = std::sqrt(6.0 / (rows + cols));
    for (double& x : l.w) x = (2.0 * unit(*rng) - 1.0) * a;
  }
  return l;
}

Layer zeros_like(const Layer& l) { return make_layer(l.rows, l.cols, nullptr); }

// y = tanh(W x + b)
std::vector<double> dense_tanh(const Layer& l, const std::vector<double>& x) {
  std::vector<double> y(static_cast<std::size_t>(l.rows));
  for (int r = 0; r < l.rows; ++r) {
    const double* w = &l.w[static_cast<std::size_t>(r) * l.cols];
    double s = l.b[static_cast<std::size_t>(r)];
    for (int c = 0; c < l.cols; ++c) s += w[c] * x[static_cast<std::size_t>(c)];
    y[static_cast<std::size_t>(r)] = std::tanh(s);
  }
  return y;
}

double row_dot(const Layer& l, std::size_t row, const std::vector<double>& x) {
  const double* w = &l.w[row * static_cast<std::size_t>(l.cols)];
  double s = l.b[row];
  for (int c = 0; c < l.cols; ++c) s += w[c] * x[static_cast<std::size_t>(c)];
  return s;
}

int arity_of(const Grammar& g) { return std::max(1, g.max_arity()); }

struct Activations {
  std::vector<double> task_raw;
  std::vector<double> lang_raw;  // empty when the language slot is zero
  std::vector<double> task_enc;
  std::vector<double> lang_enc;
  std::vector<double> input;
  std::vector<double> h1;
  std::vector<double> h2;
};

// Every output equals the same positional input.
bool copies_an_input(const Task& task, const Domain& domain) {
  if (task.examples.empty()) return false;
  std::size_t arity = task.examples.front().inputs.size();
  for (std::size_t k = 0; k < arity; ++k) {
    bool all = true;
    for (const auto& ex : task.examples) all = all && domain.output_equal(ex.output, ex.inputs[k]);
    if (all) return true;
  }
  return false;
}

}  // namespace

// --- tensor ----------------------------------------------------------------

BigramTensor::BigramTensor(int productions, int arity, std::vector<double> logits)
    : productions_(productions), arity_(arity), logits_(std::move(logits)) {
  std::size_t want = static_cast<std::size_t>(productions + 1) * (productions + 2) * arity;
  if (logits_.size() != want) throw std::invalid_argument("bigram tensor has the wrong number of entries");
}

std::size_t BigramTensor::index(int productions, int arity, int parent, int child, int slot) {
  int p = parent == kRootParent ? 0 : parent + 1;
  int c = child == kVariableChoice ? productions : child;
  return (static_cast<std::size_t>(p) * (productions + 2) + static_cast<std::size_t>(c)) * arity +
         static_cast<std::size_t>(slot);
}

double BigramTensor::at(int parent, int child, int slot) const {
  return logits_[index(productions_, arity_, parent, child, slot)];
}

RecognitionView::RecognitionView(const Grammar& grammar, BigramTensor tensor)
    : RecognitionView(grammar, std::make_shared<ChoiceSpace>(grammar), std::move(tensor)) {}

RecognitionView::RecognitionView(const Grammar& grammar, std::shared_ptr<const ChoiceSpace> space,
                                 BigramTensor tensor)
    : grammar_(&grammar), space_(std::move(space)), tensor_(std::move(tensor)) {
  if (tensor_.parents() != static_cast<int>(grammar.size()) + 1)
    throw std::invalid_argument("bigram tensor does not match the grammar");
}

double RecognitionView::log_weight(int parent, int slot, int child) const { return tensor_.at(parent, child, slot); }

// --- features --------------------------------------------------------------

std::vector<double> language_features(const std::vector<std::string>& tokens, const std::set<std::string>& vocabulary,
                                      int buckets) {
  if (buckets < 2 || buckets % 2) throw std::invalid_argument("hash bucket count must be even and at least 2");
  std::size_t half = static_cast<std::size_t>(buckets / 2);
  std::vector<double> f(static_cast<std::size_t>(buckets), 0.0);
  std::vector<std::string> ts;
  ts.reserve(tokens.size());
  for (const auto& t : tokens) ts.push_back(vocabulary.count(t) ? t : kUnknownToken);
  for (const auto& t : ts) f[fnv1a(t) % half] += 1.0;
  for (std::size_t i = 0; i + 1 < ts.size(); ++i) f[half + fnv1a(ts[i] + '\x1f' + ts[i + 1]) % half] += 1.0;
  return f;
}

// --- model -----------------------------------------------------------------

RecognitionModel::RecognitionModel(const Grammar& grammar, int task_feature_size, std::set<std::string> vocabulary,
                                   const RecognitionParams& params, std::uint64_t seed)
    : params_(params),
      grammar_version_(grammar.version()),
      productions_(static_cast<int>(grammar.size())),
      arity_(arity_of(grammar)),
      seed_(seed),
      vocabulary_(std::move(vocabulary)) {
  if (!params.valid()) throw std::invalid_argument("invalid recognition parameters");
  if (task_feature_size <= 0) throw std::invalid_argument("task feature size must be positive");
  std::mt19937_64 rng(seed);
  int e = params.embedding;
  task_ = make_layer(e, task_feature_size, &rng);
  language_ = params.use_language ? make_layer(e, params.hash_buckets, &rng) : make_layer(0, 0, nullptr);
  int in = params.use_language ? 2 * e : e;
  hidden1_ = make_layer(params.hidden, in, &rng);
  hidden2_ = make_layer(params.hidden, params.hidden, &rng);
  int rows = (productions_ + 1) * (productions_ + 2) * arity_;
  output_ = make_layer(rows, params.hidden, nullptr);
}

std::vector<Layer*> RecognitionModel::blocks() { return {&task_, &language_, &hidden1_, &hidden2_, &output_}; }
std::vector<const Layer*> RecognitionModel::blocks() const {
  return {&task_, &language_, &hidden1_, &hidden2_, &output_};
}

std::size_t RecognitionModel::parameter_count() const {
  std::size_t n = 0;
  for (const Layer* l : blocks()) n += l->w.size() + l->b.size();
  return n;
}

std::vector<double> RecognitionModel::encode_task(const std::vector<double>& raw) const {
  if (static_cast<int>(raw.size()) != task_.cols) throw std::invalid_argument("task feature size mismatch");
  return dense_tanh(task_, raw);
}

std::vector<double> RecognitionModel::encode_language(const std::vector<std::string>& tokens) const {
  if (!has_language()) return std::vector<double>(static_cast<std::size_t>(params_.embedding), 0.0);
  return dense_tanh(language_, language_features(tokens, vocabulary_, params_.hash_buckets));
}

namespace {

Activations forward(const RecognitionModel& m, const Layer& task, const Layer& language, const Layer& h1,
                    const Layer& h2, const std::vector<double>& task_raw, const std::vector<std::string>* description) {
  Activations a;
  a.task_raw = task_raw;
  a.task_enc = dense_tanh(task, task_raw);
  a.input = a.task_enc;
  if (m.has_language()) {
    if (description) {
      a.lang_raw = language_features(*description, m.vocabulary(), m.params().hash_buckets);
      a.lang_enc = dense_tanh(language, a.lang_raw);
    } else {
      a.lang_enc.assign(static_cast<std::size_t>(m.params().embedding), 0.0);
    }
    a.input.insert(a.input.end(), a.lang_enc.begin(), a.lang_enc.end());
  }
  a.h1 = dense_tanh(h1, a.input);
  a.h2 = dense_tanh(h2, a.h1);
  return a;
}

}  // namespace

BigramTensor RecognitionModel::predict(const Grammar& grammar, const std::vector<double>& task_features,
                                       const std::optional<std::vector<std::string>>& description) const {
  if (grammar.version() != grammar_version_ || static_cast<int>(grammar.size()) != productions_ ||
      arity_of(grammar) != arity_)
    throw std::invalid_argument(fmt::format("recognition model is for grammar version {} ({} productions), got {} ({})",
                                            grammar_version_, productions_, grammar.version(), grammar.size()));
  if (static_cast<int>(task_features.size()) != task_.cols) throw std::invalid_argument("task feature size mismatch");
  const std::vector<std::string>* d = description && has_language() ? &*description : nullptr;
  Activations a = forward(*this, task_, language_, hidden1_, hidden2_, task_features, d);
  std::vector<double> logits(static_cast<std::size_t>(output_.rows));
  for (std::size_t r = 0; r < logits.size(); ++r) logits[r] = row_dot(output_, r, a.h2);
  return BigramTensor(productions_, arity_, std::move(logits));
}

// --- loss and gradients ----------------------------------------------------

namespace {

// Dense gradients for the encoder and trunk blocks, sparse for the output.
struct Gradient {
  Layer task, language, hidden1, hidden2;
  std::unordered_map<std::size_t, double> output_rows;  // row -> d loss / d logit
  std::vector<double> h2;                               // trunk output feeding the output rows
};

double loss_and_gradient(const RecognitionModel& m, const Layer& task, const Layer& language, const Layer& h1l,
                         const Layer& h2l, const Layer& out, const ChoiceSpace& space, const Derivation& d,
                         const std::vector<double>& task_raw, const std::vector<std::string>* description,
                         Gradient* g) {
  Activations a = forward(m, task, language, h1l, h2l, task_raw, description);
  int P = m.productions(), A = m.arity();
  std::unordered_map<std::size_t, double> logits;
  auto logit = [&](int parent, int child, int slot) {
    std::size_t r = BigramTensor::index(P, A, parent, child, slot);
    auto it = logits.find(r);
    if (it != logits.end()) return it->second;
    double v = row_dot(out, r, a.h2);
    logits.emplace(r, v);
    return v;
  };
  double loss = 0.0;
  for (const auto& c : d.choices) {
    const auto& legal = space.legal(c.request);
    double z = -std::numeric_limits<double>::infinity();
    for (int p : legal) z = log_add_exp(z, logit(c.parent, p, c.slot));
    double var_logit = 0.0;
    if (c.variables > 0) {
      var_logit = logit(c.parent, kVariableChoice, c.slot);
      z = log_add_exp(z, std::log(static_cast<double>(c.variables)) + var_logit);
    }
    loss += z - logit(c.parent, c.chosen, c.slot);
    if (!g) continue;
    for (int p : legal)
      g->output_rows[BigramTensor::index(P, A, c.parent, p, c.slot)] += std::exp(logit(c.parent, p, c.slot) - z);
    if (c.variables > 0)
      g->output_rows[BigramTensor::index(P, A, c.parent, kVariableChoice, c.slot)] +=
          c.variables * std::exp(var_logit - z);
    g->output_rows[BigramTensor::index(P, A, c.parent, c.chosen, c.slot)] -= 1.0;
  }
  if (!g) return loss;
  g->h2 = a.h2;

  auto back = [](const Layer& l, Layer& gl, const std::vector<double>& x, const std::vector<double>& y,
                 const std::vector<double>& dy, std::vector<double>* dx) {
    if (dx) dx->assign(static_cast<std::size_t>(l.cols), 0.0);
    for (int r = 0; r < l.rows; ++r) {
      double yr = y[static_cast<std::size_t>(r)];
      double dz = dy[static_cast<std::size_t>(r)] * (1.0 - yr * yr);
      if (dz == 0.0) continue;
      gl.b[static_cast<std::size_t>(r)] += dz;
      std::size_t off = static_cast<std::size_t>(r) * l.cols;
      for (int c = 0; c < l.cols; ++c) {
        gl.w[off + c] += dz * x[static_cast<std::size_t>(c)];
        if (dx) (*dx)[static_cast<std::size_t>(c)] += dz * l.w[off + c];
      }
    }
  };

  std::vector<double> dh2(a.h2.size(), 0.0);
  for (const auto& [r, dl] : g->output_rows) {
    const double* w = &out.w[r * static_cast<std::size_t>(out.cols)];
    for (int c = 0; c < out.cols; ++c) dh2[static_cast<std::size_t>(c)] += dl * w[c];
  }
  std::vector<double> dh1, din, dtask;
  back(h2l, g->hidden2, a.h1, a.h2, dh2, &dh1);
  back(h1l, g->hidden1, a.input, a.h1, dh1, &din);
  std::size_t e = a.task_enc.size();
  std::vector<double> de_task(din.begin(), din.begin() + static_cast<std::ptrdiff_t>(e));
  back(task, g->task, a.task_raw, a.task_enc, de_task, nullptr);
  if (!a.lang_raw.empty()) {
    std::vector<double> de_lang(din.begin() + static_cast<std::ptrdiff_t>(e), din.end());
    back(language, g->language, a.lang_raw, a.lang_enc, de_lang, nullptr);
  }
  return loss;
}

const std::vector<std::string>* language_for(const RecognitionModel& m, const RecognitionExample& ex, bool with) {
  if (!with || !m.has_language() || ex.description.empty()) return nullptr;
  return &ex.description;
}

}  // namespace

class RecognitionTrainer {
 public:
  static double loss(const RecognitionModel& m, const ChoiceSpace& space, const Derivation& d,
                     const RecognitionExample& ex, bool with_language, Gradient* g) {
    return loss_and_gradient(m, m.task_, m.language_, m.hidden1_, m.hidden2_, m.output_, space, d, ex.task_features,
                             language_for(m, ex, with_language), g);
  }

  static Gradient zero_gradient(const RecognitionModel& m) {
    return {zeros_like(m.task_), zeros_like(m.language_), zeros_like(m.hidden1_), zeros_like(m.hidden2_), {}, {}};
  }

  static void step(RecognitionModel& m, const Gradient& g, double lr) {
    auto apply = [lr](Layer& l, const Layer& gl) {
      for (std::size_t i = 0; i < l.w.size(); ++i) l.w[i] -= lr * gl.w[i];
      for (std::size_t i = 0; i < l.b.size(); ++i) l.b[i] -= lr * gl.b[i];
    };
    // Output rows first: the trunk gradient was computed with the old weights.
    const std::vector<double>& h2 = g.h2;
    for (const auto& [r, dl] : g.output_rows) {
      double* w = &m.output_.w[r * static_cast<std::size_t>(m.output_.cols)];
      for (int c = 0; c < m.output_.cols; ++c) w[c] -= lr * dl * h2[static_cast<std::size_t>(c)];
      m.output_.b[r] -= lr * dl;
    }
    apply(m.task_, g.task);
    apply(m.language_, g.language);
    apply(m.hidden1_, g.hidden1);
    apply(m.hidden2_, g.hidden2);
  }
};

double example_loss(const RecognitionModel& model, const Grammar& grammar, const RecognitionExample& example,
                    bool with_language, std::vector<Layer>* gradient) {
  ChoiceSpace space(grammar);
  Derivation d = derive(example.program, example.request, space);
  if (!gradient) return RecognitionTrainer::loss(model, space, d, example, with_language, nullptr);
  Gradient g = RecognitionTrainer::zero_gradient(model);
  double loss = RecognitionTrainer::loss(model, space, d, example, with_language, &g);
  const Layer& out = *model.blocks().back();
  Layer go = zeros_like(out);
  const std::vector<double>& h2 = g.h2;
  for (const auto& [r, dl] : g.output_rows) {
    go.b[r] += dl;
    for (int c = 0; c < out.cols; ++c) go.w[r * static_cast<std::size_t>(out.cols) + c] += dl * h2[static_cast<std::size_t>(c)];
  }
  *gradient = {std::move(g.task), std::move(g.language), std::move(g.hidden1), std::move(g.hidden2), std::move(go)};
  return loss;
}

RecognitionModel train(const RecognitionModel& model, const Grammar& grammar,
                       const std::vector<RecognitionExample>& frontier_examples,
                       const std::vector<RecognitionExample>& joint_examples, int steps, std::uint64_t seed,
                       TrainingReport* report) {
  if (grammar.version() != model.grammar_version() || static_cast<int>(grammar.size()) != model.productions())
    throw std::invalid_argument("recognition model and grammar versions differ");
  RecognitionModel m = model;
  TrainingReport rep;
  ChoiceSpace space(grammar);

  struct Prepared {
    const RecognitionExample* ex;
    Derivation d;
  };
  auto prepare = [&](const std::vector<RecognitionExample>& xs) {
    std::vector<Prepared> out;
    for (const auto& x : xs) {
      try {
        out.push_back({&x, derive(x.program, x.request, space)});
      } catch (const std::exception&) {
        ++rep.skipped;
      }
    }
    return out;
  };
  std::vector<Prepared> pools[2] = {prepare(frontier_examples), prepare(joint_examples)};
  if ((pools[0].empty() && pools[1].empty()) || steps <= 0) {
    if (report) *report = rep;
    return m;
  }

  std::mt19937_64 rng(seed);
  int window = std::max(1, steps / 10);
  double first = 0.0, last = 0.0;
  for (int s = 0; s < steps; ++s) {
    int which = pools[0].empty() ? 1 : pools[1].empty() ? 0 : static_cast<int>(rng() & 1u);
    const auto& pool = pools[which];
    const Prepared& p = pool[static_cast<std::size_t>(rng() % pool.size())];
    bool with_language = true;
    if (m.params().language_dropout > 0) with_language = unit(rng) >= m.params().language_dropout;
    Gradient g = RecognitionTrainer::zero_gradient(m);
    double loss = RecognitionTrainer::loss(m, space, p.d, *p.ex, with_language, &g);
    RecognitionTrainer::step(m, g, m.params().learning_rate);
    if (s < window) first += loss;
    if (s >= steps - window) last += loss;
  }
  rep.steps = steps;
  rep.mean_loss_first = first / window;
  rep.mean_loss_last = last / window;
  if (report) *report = rep;
  return m;
}

// --- checkpoints -----------------------------------------------------------

std::string RecognitionModel::to_text() const {
  std::string out = fmt::format("{} {}\n", kCheckpointMagic, kCheckpointFormat);
  out += fmt::format("grammar_version {}\nseed {}\nproductions {}\narity {}\n", grammar_version_, seed_, productions_,
                     arity_);
  out += fmt::format("params {} {} {} {:.17g} {} {} {:.17g}\n", params_.embedding, params_.hidden,
                     params_.hash_buckets, params_.learning_rate, params_.steps, params_.use_language ? 1 : 0,
                     params_.language_dropout);
  out += fmt::format("vocabulary {}\n", vocabulary_.size());
  for (const auto& w : vocabulary_) out += w + "\n";
  const char* names[] = {"task", "language", "hidden1", "hidden2", "output"};
  auto bs = blocks();
  for (std::size_t i = 0; i < bs.size(); ++i) {
    const Layer& l = *bs[i];
    out += fmt::format("block {} {} {}\n", names[i], l.rows, l.cols);
    for (double x : l.w) out += fmt::format("{:.17g}\n", x);
    for (double x : l.b) out += fmt::format("{:.17g}\n", x);
  }
  return out;
}

RecognitionModel RecognitionModel::from_text(const std::string& text) {
  std::istringstream in(text);
  auto expect = [&](const std::string& key) {
    std::string k;
    if (!(in >> k) || k != key) throw std::runtime_error("malformed recognition checkpoint: expected " + key);
  };
  std::string magic;
  int format = 0;
  if (!(in >> magic >> format) || magic != kCheckpointMagic)
    throw std::runtime_error("not a recognition checkpoint");
  if (format != kCheckpointFormat)
    throw std::runtime_error(fmt::format("recognition checkpoint format {} is not supported (want {})", format,
                                         kCheckpointFormat));
  RecognitionModel m;
  expect("grammar_version");
  in >> m.grammar_version_;
  expect("seed");
  in >> m.seed_;
  expect("productions");
  in >> m.productions_;
  expect("arity");
  in >> m.arity_;
  expect("params");
  int use_language = 0;
  in >> m.params_.embedding >> m.params_.hidden >> m.params_.hash_buckets >> m.params_.learning_rate >>
      m.params_.steps >> use_language >> m.params_.language_dropout;
  m.params_.use_language = use_language != 0;
  expect("vocabulary");
  std::size_t nv = 0;
  in >> nv;
  for (std::size_t i = 0; i < nv; ++i) {
    std::string w;
    in >> w;
    m.vocabulary_.insert(w);
  }
  for (Layer* l : m.blocks()) {
    std::string name;
    expect("block");
    in >> name >> l->rows >> l->cols;
    if (!in || l->rows < 0 || l->cols < 0) throw std::runtime_error("malformed recognition checkpoint block");
    l->w.resize(static_cast<std::size_t>(l->rows) * l->cols);
    l->b.resize(static_cast<std::size_t>(l->rows));
    for (double& x : l->w) in >> x;
    for (double& x : l->b) in >> x;
  }
  if (!in) throw std::runtime_error("truncated recognition checkpoint");
  if (m.output_.rows != (m.productions_ + 1) * (m.productions_ + 2) * m.arity_)
    throw std::runtime_error("recognition checkpoint output shape does not match its grammar size");
  return m;
}

void RecognitionModel::save(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << to_text();
}

RecognitionModel RecognitionModel::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return from_text(ss.str());
}

// --- joint samples ---------------------------------------------------------

std::vector<JointSample> sample_joint(const Grammar& grammar, const TranslationTable* table, const SmoothedLM* lm,
                                      const Domain& domain, const std::vector<TypePtr>& requests, int n,
                                      std::uint64_t seed, bool* exhausted) {
  if (requests.empty()) throw std::invalid_argument("sample_joint needs at least one request type");
  std::vector<JointSample> out;
  std::mt19937_64 rng(seed);
  PriorView view(grammar);
  SmoothedLM empty_lm;
  const SmoothedLM& model = lm ? *lm : empty_lm;
  bool describe = table && !table->empty();
  long attempts = 0;
  EvalLimit limit;
  while (static_cast<int>(out.size()) < n && attempts < 200L * n) {
    ++attempts;
    const TypePtr& request = requests[static_cast<std::size_t>(rng() % requests.size())];
    auto program = sample_program(view, request, rng);
    if (!program) continue;
    CompiledProgram compiled(*program, domain.executor());
    if (!compiled.ok()) continue;
    auto inputs = domain.sample_inputs(request, domain.examples_per_sample(), rng);
    Task task;
    task.id = fmt::format("joint-{}", out.size());
    task.request = request;
    bool ok = !inputs.empty();
    for (auto& in : inputs) {
      EvalOutcome r = compiled.run(in, limit);
      if (!r.ok()) {
        ok = false;
        break;
      }
      task.examples.push_back({std::move(in), std::move(r.value)});
    }
    if (!ok || copies_an_input(task, domain)) continue;
    std::uint64_t dseed = rng();
    JointSample s{std::move(task), {}, *program};
    if (describe) s.description = generate_description(*program, *table, model, DecodeMode::kSample, dseed);
    s.task.description = s.description;
    s.task.ground_truth = *program;
    out.push_back(std::move(s));
  }
  if (exhausted) *exhausted = static_cast<int>(out.size()) < n;
  return out;
}

}  // namespace lingo
