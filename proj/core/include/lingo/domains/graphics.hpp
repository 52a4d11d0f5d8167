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

#ifndef LINGO_DOMAINS_GRAPHICS_HPP_
#define LINGO_DOMAINS_GRAPHICS_HPP_

#include <array>
#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "lingo/domain.hpp"

namespace lingo {

inline constexpr int kCanvasSize = 64;
inline constexpr double kPixelsPerUnit = 4.0;
inline constexpr int kInfinityLoopCap = 20;

class Canvas {
 public:
  bool get(int x, int y) const;
  void set(int x, int y);
  // Integer Bresenham; pixels outside the canvas are clipped.
  void line(int x0, int y0, int x1, int y1);
  int count() const;
  bool operator==(const Canvas& o) const { return rows_ == o.rows_; }

  std::vector<int> run_lengths() const;
  static Canvas from_run_lengths(const std::vector<int>& runs);

 private:
  std::array<std::uint64_t, kCanvasSize> rows_{};
};

class Turtle : public DomainObject {
 public:
  double x = 0.0;
  double y = 0.0;
  double heading = 0.0;  // radians in [0, 2π)
  bool pen_down = true;
  int segments = 0;  // pen-down moves of nonzero length; not part of equality
  std::shared_ptr<const Canvas> canvas = std::make_shared<Canvas>();

  bool equals(const DomainObject& other) const override;
  std::string describe() const override;

  static Value blank();
};

const Turtle& as_turtle(const Value& v);

class GraphicsExecutor : public DomainExecutor {
 public:
  std::optional<PrimitiveInfo> resolve(std::string_view name) const override;
  Value call(int id, std::span<const Value> args, Applier& applier) const override;
  // Raster equality.
  bool output_equal(const Value& a, const Value& b) const override;
};

class GraphicsDomain : public Domain {
 public:
  std::string name() const override { return "graphics"; }
  const DomainExecutor& executor() const override { return executor_; }
  std::vector<std::pair<std::string, std::string>> primitives() const override;
  std::vector<double> task_features(const Task& task) const override;
  int feature_size() const override;
  nlohmann::json encode_value(const Value& v) const override;
  Value decode_value(const nlohmann::json& j) const override;
  std::vector<std::vector<Value>> sample_inputs(const TypePtr& request, int n, Rng& rng) const override;
  std::vector<Task> generate(int n, std::uint64_t seed) const override;
  int default_iterations() const override { return 27; }

  // Renders a turtle program from the blank canvas.
  static EvalOutcome render(const Term& program, const EvalLimit& limit = {});

 private:
  GraphicsExecutor executor_;
};

}  // namespace lingo

#endif  // LINGO_DOMAINS_GRAPHICS_HPP_
