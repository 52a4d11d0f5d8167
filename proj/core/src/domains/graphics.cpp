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

#include "lingo/domains/graphics.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include <fmt/format.h>
#include <nlohmann/json.hpp>

namespace lingo {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;
constexpr double kEpsilonLength = 0.05;
constexpr double kClosedTolerance = 1e-6;
constexpr std::int64_t kInfinity = std::int64_t{1} << 40;

enum Prim { kMove, kPenUp, kFor, kGetSet, kPlus, kMinus, kTimes, kDivide, kUnitLine, kTwoPiConst, kEps, kInf, kDigit };

const std::vector<std::pair<std::string, std::string>>& signatures() {
  static const auto* sigs = [] {
    auto* v = new std::vector<std::pair<std::string, std::string>>{
        {"move", "length -> angle -> turtle -> turtle"},
        {"pen-up", "(turtle -> turtle) -> turtle -> turtle"},
        {"for", "int -> (turtle -> turtle) -> turtle -> turtle"},
        {"get/set", "(turtle -> turtle) -> turtle -> turtle"},
        {"+", "int -> int -> int"},
        {"-", "int -> int -> int"},
        {"*", "t0 -> int -> t0"},
        {"/", "t0 -> int -> t0"},
        {"unit_line", "length"},
        {"2π", "angle"},
        {"ε", "length"},
        {"∞", "int"},
    };
    for (int d = 1; d <= 9; ++d) v->emplace_back(std::to_string(d), "int");
    return v;
  }();
  return *sigs;
}

double normalize_angle(double h) {
  h = std::fmod(h, kTwoPi);
  if (h < 0) h += kTwoPi;
  return h;
}

double pixel_x(double x) { return kCanvasSize / 2 + kPixelsPerUnit * x; }
double pixel_y(double y) { return kCanvasSize / 2 - kPixelsPerUnit * y; }

// Segments longer than this (in pixels) are clipped before rasterizing.
constexpr double kDirectDrawLimit = 4096.0;

// Liang-Barsky clip of (x0,y0)-(x1,y1) to [lo, hi]^2; false when outside.
bool clip_segment(double& x0, double& y0, double& x1, double& y1, double lo, double hi) {
  double t0 = 0.0, t1 = 1.0;
  double dx = x1 - x0, dy = y1 - y0;
  const double p[4] = {-dx, dx, -dy, dy};
  const double q[4] = {x0 - lo, hi - x0, y0 - lo, hi - y0};
  for (int i = 0; i < 4; ++i) {
    if (p[i] == 0.0) {
      if (q[i] < 0.0) return false;
      continue;
    }
    double r = q[i] / p[i];
    if (p[i] < 0.0)
      t0 = std::max(t0, r);
    else
      t1 = std::min(t1, r);
    if (t0 > t1) return false;
  }
  double ax = x0 + t0 * dx, ay = y0 + t0 * dy;
  x1 = x0 + t1 * dx;
  y1 = y0 + t1 * dy;
  x0 = ax;
  y0 = ay;
  return true;
}

void draw_segment(Canvas& c, double x0, double y0, double x1, double y1) {
  double px0 = pixel_x(x0), py0 = pixel_y(y0), px1 = pixel_x(x1), py1 = pixel_y(y1);
  double extent = std::max({std::abs(px0), std::abs(py0), std::abs(px1), std::abs(py1)});
  if (extent > kDirectDrawLimit && !clip_segment(px0, py0, px1, py1, -2.0, kCanvasSize + 1.0)) return;
  c.line(static_cast<int>(std::lround(px0)), static_cast<int>(std::lround(py0)), static_cast<int>(std::lround(px1)),
         static_cast<int>(std::lround(py1)));
}

std::shared_ptr<const Turtle> turtle_arg(const Value& v) {
  if (!v.is_object()) throw RuntimeFault("expected a turtle");
  auto t = std::dynamic_pointer_cast<const Turtle>(v.as_object());
  if (!t) throw RuntimeFault("expected a turtle");
  return t;
}

double real_arg(const Value& v) {
  if (v.is_real()) return v.as_real();
  if (v.is_int()) return static_cast<double>(v.as_int());
  throw RuntimeFault("expected a number");
}

std::int64_t int_arg(const Value& v) {
  if (!v.is_int()) throw RuntimeFault("expected an int");
  return v.as_int();
}

bool same_pose(const Turtle& a, const Turtle& b) {
  double dh = std::abs(a.heading - b.heading);
  dh = std::min(dh, kTwoPi - dh);
  return std::abs(a.x - b.x) < kClosedTolerance && std::abs(a.y - b.y) < kClosedTolerance &&
         dh < kClosedTolerance;
}

}  // namespace

// --- canvas ----------------------------------------------------------------

bool Canvas::get(int x, int y) const {
  if (x < 0 || y < 0 || x >= kCanvasSize || y >= kCanvasSize) return false;
  return (rows_[static_cast<std::size_t>(y)] >> x) & 1u;
}

void Canvas::set(int x, int y) {
  if (x < 0 || y < 0 || x >= kCanvasSize || y >= kCanvasSize) return;
  rows_[static_cast<std::size_t>(y)] |= std::uint64_t{1} << x;
}

void Canvas::line(int x0, int y0, int x1, int y1) {
  int dx = std::abs(x1 - x0), sx = x0 < x1 ? 1 : -1;
  int dy = -std::abs(y1 - y0), sy = y0 < y1 ? 1 : -1;
  int err = dx + dy;
  for (;;) {
    set(x0, y0);
    if (x0 == x1 && y0 == y1) break;
    int e2 = 2 * err;
    if (e2 >= dy) {
      err += dy;
      x0 += sx;
    }
    if (e2 <= dx) {
      err += dx;
      y0 += sy;
    }
  }
}

int Canvas::count() const {
  int n = 0;
  for (auto r : rows_) n += std::popcount(r);
  return n;
}

std::vector<int> Canvas::run_lengths() const {
  std::vector<int> runs;
  bool current = false;
  int run = 0;
  for (int y = 0; y < kCanvasSize; ++y) {
    for (int x = 0; x < kCanvasSize; ++x) {
      bool b = get(x, y);
      if (b != current) {
        runs.push_back(run);
        run = 0;
        current = b;
      }
      ++run;
    }
  }
  runs.push_back(run);
  return runs;
}

Canvas Canvas::from_run_lengths(const std::vector<int>& runs) {
  Canvas c;
  int pos = 0;
  bool bit = false;
  for (int r : runs) {
    if (r < 0 || pos + r > kCanvasSize * kCanvasSize) throw std::invalid_argument("bad raster encoding");
    if (bit)
      for (int i = pos; i < pos + r; ++i) c.set(i % kCanvasSize, i / kCanvasSize);
    pos += r;
    bit = !bit;
  }
  if (pos != kCanvasSize * kCanvasSize) throw std::invalid_argument("bad raster encoding");
  return c;
}

// --- turtle ----------------------------------------------------------------

bool Turtle::equals(const DomainObject& other) const {
  const auto* o = dynamic_cast<const Turtle*>(&other);
  return o && *canvas == *o->canvas;
}

std::string Turtle::describe() const {
  return fmt::format("turtle(x={:.3f}, y={:.3f}, heading={:.3f}, pixels={}, segments={})", x, y, heading,
                     canvas->count(), segments);
}

Value Turtle::blank() { return Value(Value::ObjectPtr(std::make_shared<const Turtle>())); }

const Turtle& as_turtle(const Value& v) {
  const auto* t = v.is_object() ? dynamic_cast<const Turtle*>(v.as_object().get()) : nullptr;
  if (!t) throw std::invalid_argument("not a turtle: " + v.str());
  return *t;
}

// --- executor --------------------------------------------------------------

std::optional<PrimitiveInfo> GraphicsExecutor::resolve(std::string_view name) const {
  const auto& sigs = signatures();
  for (std::size_t i = 0; i < sigs.size(); ++i) {
    if (sigs[i].first == name) {
      int arity = static_cast<int>(TypeScheme::parse(sigs[i].second).type->arguments().size());
      return PrimitiveInfo{static_cast<int>(i), arity};
    }
  }
  return std::nullopt;
}

Value GraphicsExecutor::call(int id, std::span<const Value> a, Applier& applier) const {
  switch (id) {
    case kMove: {
      double len = real_arg(a[0]);
      double ang = real_arg(a[1]);
      auto s = turtle_arg(a[2]);
      auto t = std::make_shared<Turtle>(*s);
      t->x = s->x + len * std::cos(s->heading);
      t->y = s->y + len * std::sin(s->heading);
      if (!std::isfinite(t->x) || !std::isfinite(t->y)) throw RuntimeFault("turtle left the plane");
      if (s->pen_down) {
        auto c = std::make_shared<Canvas>(*s->canvas);
        draw_segment(*c, s->x, s->y, t->x, t->y);
        t->canvas = std::move(c);
        if (len != 0.0) ++t->segments;
      }
      t->heading = normalize_angle(s->heading + ang);
      return Value(Value::ObjectPtr(std::move(t)));
    }
    case kPenUp: {
      auto s = turtle_arg(a[1]);
      auto up = std::make_shared<Turtle>(*s);
      up->pen_down = false;
      auto r = turtle_arg(applier.apply(a[0], Value(Value::ObjectPtr(up))));
      auto t = std::make_shared<Turtle>(*r);
      t->pen_down = s->pen_down;
      return Value(Value::ObjectPtr(std::move(t)));
    }
    case kFor: {
      std::int64_t n = int_arg(a[0]);
      Value state = a[2];
      if (n == kInfinity) {
        auto start = turtle_arg(state);
        for (int i = 0; i < kInfinityLoopCap; ++i) {
          state = applier.apply(a[1], state);
          if (same_pose(*turtle_arg(state), *start)) break;
        }
        return state;
      }
      for (std::int64_t i = 0; i < n; ++i) state = applier.apply(a[1], state);
      turtle_arg(state);
      return state;
    }
    case kGetSet: {
      auto s = turtle_arg(a[1]);
      auto r = turtle_arg(applier.apply(a[0], a[1]));
      auto t = std::make_shared<Turtle>(*r);
      t->x = s->x;
      t->y = s->y;
      t->heading = s->heading;
      t->pen_down = s->pen_down;
      return Value(Value::ObjectPtr(std::move(t)));
    }
    case kPlus:
      return Value(int_arg(a[0]) + int_arg(a[1]));
    case kMinus:
      return Value(int_arg(a[0]) - int_arg(a[1]));
    case kTimes: {
      std::int64_t k = int_arg(a[1]);
      if (a[0].is_int()) return Value(a[0].as_int() * k);
      if (a[0].is_real()) return Value(a[0].as_real() * static_cast<double>(k));
      throw RuntimeFault("* expects a number");
    }
    case kDivide: {
      std::int64_t k = int_arg(a[1]);
      if (k == 0) throw RuntimeFault("division by zero");
      if (a[0].is_int()) return Value(a[0].as_int() / k);
      if (a[0].is_real()) return Value(a[0].as_real() / static_cast<double>(k));
      throw RuntimeFault("/ expects a number");
    }
    case kUnitLine:
      return Value(1.0);
    case kTwoPiConst:
      return Value(kTwoPi);
    case kEps:
      return Value(kEpsilonLength);
    case kInf:
      return Value(kInfinity);
    default:
      if (id >= kDigit && id < kDigit + 9) return Value(static_cast<std::int64_t>(id - kDigit + 1));
      throw RuntimeFault("unknown graphics primitive");
  }
}

bool GraphicsExecutor::output_equal(const Value& a, const Value& b) const {
  if (!a.is_object() || !b.is_object()) return false;
  return a.as_object()->equals(*b.as_object());
}

// --- domain ----------------------------------------------------------------

std::vector<std::pair<std::string, std::string>> GraphicsDomain::primitives() const { return signatures(); }

EvalOutcome GraphicsDomain::render(const Term& program, const EvalLimit& limit) {
  static const GraphicsExecutor executor;
  std::vector<Value> args{Turtle::blank()};
  return evaluate(program, args, executor, limit);
}

namespace {

constexpr int kGraphicsFeatures = 1 + 4 + 16 + 1;

int components(const Canvas& c) {
  std::vector<char> seen(kCanvasSize * kCanvasSize, 0);
  int n = 0;
  std::vector<std::pair<int, int>> stack;
  for (int y = 0; y < kCanvasSize; ++y) {
    for (int x = 0; x < kCanvasSize; ++x) {
      if (!c.get(x, y) || seen[static_cast<std::size_t>(y * kCanvasSize + x)]) continue;
      ++n;
      stack.emplace_back(x, y);
      seen[static_cast<std::size_t>(y * kCanvasSize + x)] = 1;
      while (!stack.empty()) {
        auto [px, py] = stack.back();
        stack.pop_back();
        for (int dy = -1; dy <= 1; ++dy) {
          for (int dx = -1; dx <= 1; ++dx) {
            int qx = px + dx, qy = py + dy;
            if (!c.get(qx, qy) || seen[static_cast<std::size_t>(qy * kCanvasSize + qx)]) continue;
            seen[static_cast<std::size_t>(qy * kCanvasSize + qx)] = 1;
            stack.emplace_back(qx, qy);
          }
        }
      }
    }
  }
  return n;
}

}  // namespace

int GraphicsDomain::feature_size() const { return kGraphicsFeatures; }

std::vector<double> GraphicsDomain::task_features(const Task& task) const {
  std::vector<double> f(kGraphicsFeatures, 0.0);
  if (task.examples.empty() || !task.examples[0].output.is_object()) return f;
  const Canvas& c = *as_turtle(task.examples[0].output).canvas;
  int count = c.count();
  if (count == 0) return f;
  int x0 = kCanvasSize, y0 = kCanvasSize, x1 = -1, y1 = -1;
  constexpr int kBlock = kCanvasSize / 4;
  for (int y = 0; y < kCanvasSize; ++y) {
    for (int x = 0; x < kCanvasSize; ++x) {
      if (!c.get(x, y)) continue;
      x0 = std::min(x0, x);
      y0 = std::min(y0, y);
      x1 = std::max(x1, x);
      y1 = std::max(y1, y);
      f[static_cast<std::size_t>(5 + (y / kBlock) * 4 + x / kBlock)] += 1.0;
    }
  }
  f[0] = count / 256.0;
  f[1] = x0 / double(kCanvasSize);
  f[2] = y0 / double(kCanvasSize);
  f[3] = (x1 + 1) / double(kCanvasSize);
  f[4] = (y1 + 1) / double(kCanvasSize);
  for (int i = 0; i < 16; ++i) f[static_cast<std::size_t>(5 + i)] /= double(kBlock * 4);
  f[21] = components(c) / 4.0;
  return f;
}

nlohmann::json GraphicsDomain::encode_value(const Value& v) const {
  const Turtle& t = as_turtle(v);
  return {{"x", t.x}, {"y", t.y}, {"heading", t.heading}, {"pen_down", t.pen_down}, {"raster", t.canvas->run_lengths()}};
}

Value GraphicsDomain::decode_value(const nlohmann::json& j) const {
  auto t = std::make_shared<Turtle>();
  t->x = j.at("x").get<double>();
  t->y = j.at("y").get<double>();
  t->heading = j.at("heading").get<double>();
  t->pen_down = j.at("pen_down").get<bool>();
  t->canvas = std::make_shared<Canvas>(Canvas::from_run_lengths(j.at("raster").get<std::vector<int>>()));
  return Value(Value::ObjectPtr(std::move(t)));
}

std::vector<std::vector<Value>> GraphicsDomain::sample_inputs(const TypePtr& request, int n, Rng&) const {
  if (request->arguments().size() != 1) throw std::invalid_argument("graphics requests take one turtle");
  return std::vector<std::vector<Value>>(static_cast<std::size_t>(n), std::vector<Value>{Turtle::blank()});
}

// --- generator -------------------------------------------------------------
//
// Shapes are turtle -> turtle bodies written with the placeholder "X" for
// the incoming state; every nested λ only refers to its own $0, so
// composition is textual substitution.

namespace {

const char* const kNumberWords[] = {"zero", "one", "two", "three", "four", "five", "six", "seven", "eight", "nine"};
const char* const kSizeWords[] = {"", "small", "medium", "big"};

std::string length_term(int k) { return k == 1 ? "unit_line" : fmt::format("(* unit_line {})", k); }

std::string angle_term(int num, int den) {
  std::string a = num == 1 ? "2π" : fmt::format("(* 2π {})", num);
  return den == 1 ? a : fmt::format("(/ {} {})", a, den);
}

std::string subst(const std::string& body, const std::string& state) {
  std::string out;
  for (char c : body) {
    if (c == 'X')
      out += state;
    else
      out += c;
  }
  return out;
}

std::string seq(const std::vector<std::string>& steps) {
  std::string s = "$0";
  for (const auto& step : steps) s = subst(step, s);
  return s;
}

struct Shape {
  std::string body;  // uses X
  std::vector<std::string> words;
};

Shape polygon(int sides, int size) {
  Shape s;
  s.body = fmt::format("(for ∞ (lambda (move {} {} $0)) X)", length_term(size), angle_term(1, sides));
  s.words = {kSizeWords[size]};
  if (sides == 3) {
    s.words.push_back("triangle");
  } else if (sides == 4) {
    s.words.push_back("square");
  } else {
    s.words.push_back(kNumberWords[sides]);
    s.words.push_back("gon");
  }
  return s;
}

Shape line(int size) {
  Shape s;
  s.body = fmt::format("(move {} 2π X)", length_term(size));
  s.words = {size == 1 ? "short" : kSizeWords[size], "line"};
  return s;
}

std::string keep(const std::string& body) { return "(get/set (lambda " + subst(body, "$0") + ") X)"; }

std::string gap(int size) { return fmt::format("(pen-up (lambda (move {} 2π $0)) X)", length_term(size)); }

Shape simple_shape(Rng& rng) {
  std::uniform_int_distribution<int> size(1, 3);
  std::uniform_int_distribution<int> kind(0, 3);
  std::uniform_int_distribution<int> sides(5, 8);
  switch (kind(rng)) {
    case 0:
      return polygon(3, size(rng));
    case 1:
      return polygon(4, size(rng));
    case 2:
      return polygon(sides(rng), std::min(size(rng), 2));
    default:
      return line(size(rng));
  }
}

std::vector<std::string> with_article(const std::vector<std::string>& words) {
  std::vector<std::string> out{"a"};
  out.insert(out.end(), words.begin(), words.end());
  return out;
}

std::vector<std::string> plural(std::vector<std::string> words) {
  words.push_back("s");
  return words;
}

struct Generated {
  std::string body;
  std::vector<std::string> words;
};

Generated generate_one(Rng& rng) {
  std::uniform_int_distribution<int> family(0, 9);
  std::uniform_int_distribution<int> size(1, 3);
  Generated g;
  switch (family(rng)) {
    case 0:
    case 1: {
      Shape s = simple_shape(rng);
      g.body = seq({s.body});
      g.words = with_article(s.words);
      break;
    }
    case 2: {
      Shape s = line(size(rng));
      g.body = seq({s.body});
      g.words = with_article(s.words);
      break;
    }
    case 3: {
      std::uniform_int_distribution<int> steps(2, 5);
      int n = steps(rng);
      g.body = seq({fmt::format("(for {} (lambda (move unit_line {} (move unit_line {} $0))) X)", n,
                                angle_term(3, 4), angle_term(1, 4))});
      g.words = {"a", "staircase", "with", kNumberWords[n], "step", "s"};
      break;
    }
    case 4: {
      std::uniform_int_distribution<int> teeth(2, 5);
      int n = teeth(rng);
      g.body = seq({fmt::format("(for {} (lambda (move (* unit_line 2) {} (move (* unit_line 2) {} $0))) X)", n,
                                angle_term(1, 3), angle_term(2, 3))});
      g.words = {"a", "zigzag", "with", kNumberWords[n], "turn", "s"};
      break;
    }
    case 5: {
      std::uniform_int_distribution<int> pick(0, 2);
      int points = 5 + 2 * pick(rng);
      g.body = seq({fmt::format("(for ∞ (lambda (move (* unit_line 3) {} $0)) X)", angle_term((points - 1) / 2, points))});
      g.words = {"a", kNumberWords[points], "pointed", "star"};
      break;
    }
    case 6: {
      std::uniform_int_distribution<int> arms(3, 8);
      int n = arms(rng);
      Shape arm = simple_shape(rng);
      std::string turn = fmt::format("(pen-up (lambda (move ε {} $0)) X)", angle_term(1, n));
      std::string round = subst(turn, subst(keep(arm.body), "$0"));
      g.body = seq({"(for ∞ (lambda " + round + ") X)"});
      g.words = {"a", kNumberWords[n], "sided", "snowflake", "with", "a"};
      g.words.insert(g.words.end(), arm.words.begin(), arm.words.end());
      g.words.insert(g.words.end(), {"as", "arm", "s"});
      break;
    }
    case 7: {
      std::uniform_int_distribution<int> count(2, 4);
      int k = count(rng);
      Shape s = simple_shape(rng);
      std::string round = subst(gap(4), subst(keep(s.body), "$0"));
      g.body = seq({fmt::format("(for {} (lambda {}) X)", k, round)});
      g.words = {kNumberWords[k]};
      auto p = plural(s.words);
      g.words.insert(g.words.end(), p.begin(), p.end());
      g.words.insert(g.words.end(), {"in", "a", "row"});
      break;
    }
    case 8: {
      Shape a = simple_shape(rng);
      Shape b = simple_shape(rng);
      std::uniform_int_distribution<int> rel(0, 2);
      int r = rel(rng);
      int space = size(rng);
      g.words = with_article(a.words);
      if (r == 0) {
        g.body = seq({keep(a.body), gap(4), b.body});
        g.words.insert(g.words.end(), {"next", "to"});
      } else if (r == 1) {
        g.body = seq({keep(a.body), gap(2 * space), b.body});
        g.words.insert(g.words.end(), {"separated", "by", "a", kSizeWords[space], "space", "from"});
      } else {
        g.body = seq({keep(a.body), fmt::format("(move {} 2π X)", length_term(2 * space)), b.body});
        g.words.insert(g.words.end(), {"connected", "by", "a", kSizeWords[space], "line", "to"});
      }
      auto bw = with_article(b.words);
      g.words.insert(g.words.end(), bw.begin(), bw.end());
      break;
    }
    default: {
      std::uniform_int_distribution<int> count(2, 3);
      std::uniform_int_distribution<int> sides(3, 4);
      int k = count(rng);
      int n = sides(rng);
      std::vector<std::string> steps;
      for (int i = 1; i <= k; ++i) steps.push_back(keep(polygon(n, i).body));
      g.body = seq(steps);
      g.words = {kNumberWords[k], "nested", n == 3 ? "triangle" : "square", "s"};
      break;
    }
  }
  return g;
}

}  // namespace

std::vector<Task> GraphicsDomain::generate(int n, std::uint64_t seed) const {
  Rng rng(seed);
  TypePtr request = parse_type("turtle -> turtle");
  std::vector<Task> tasks;
  tasks.reserve(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    Generated g = generate_one(rng);
    Task t;
    t.id = fmt::format("graphics-{:04d}", i);
    t.request = request;
    t.ground_truth = parse("(lambda " + g.body + ")");
    t.description = g.words;
    auto out = evaluate(*t.ground_truth, std::vector<Value>{Turtle::blank()}, executor_, {});
    if (!out.ok()) throw std::logic_error("generated graphics task " + t.id + " failed: " + out.message);
    t.examples.push_back({{Turtle::blank()}, out.value});
    tasks.push_back(std::move(t));
  }
  return tasks;
}

}  // namespace lingo
