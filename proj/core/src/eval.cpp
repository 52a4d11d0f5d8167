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

#include "lingo/eval.hpp"

#include <fmt/format.h>

namespace lingo {

// --- values ----------------------------------------------------------------

struct EnvNode;
using EnvPtr = std::shared_ptr<const EnvNode>;

struct EnvNode {
  Value value;
  EnvPtr next;
};

struct FunctionValue {
  enum class Kind { kClosure, kPartial };
  Kind kind = Kind::kClosure;
  // closure
  std::shared_ptr<const CompiledProgram::Impl> code;
  int body = -1;
  EnvPtr env;
  // partial primitive application
  int prim = -1;
  int arity = 0;
  std::vector<Value> args;
};

std::string Value::str() const {
  return std::visit(
      [](const auto& x) -> std::string {
        using T = std::decay_t<decltype(x)>;
        if constexpr (std::is_same_v<T, std::monostate>) {
          return "()";
        } else if constexpr (std::is_same_v<T, bool>) {
          return x ? "true" : "false";
        } else if constexpr (std::is_same_v<T, std::int64_t>) {
          return std::to_string(x);
        } else if constexpr (std::is_same_v<T, double>) {
          return fmt::format("{}", x);
        } else if constexpr (std::is_same_v<T, std::string>) {
          return "\"" + x + "\"";
        } else if constexpr (std::is_same_v<T, ListPtr>) {
          std::string out = "[";
          for (std::size_t i = 0; i < x->size(); ++i) {
            if (i) out += ", ";
            out += (*x)[i].str();
          }
          return out + "]";
        } else if constexpr (std::is_same_v<T, FunctionPtr>) {
          return "<function>";
        } else {
          return x->describe();
        }
      },
      v_);
}

bool operator==(const Value& a, const Value& b) {
  if (a.v_.index() != b.v_.index()) return false;
  if (a.is_list()) {
    const auto& x = a.as_list();
    const auto& y = b.as_list();
    if (&x == &y) return true;
    if (x.size() != y.size()) return false;
    for (std::size_t i = 0; i < x.size(); ++i)
      if (x[i] != y[i]) return false;
    return true;
  }
  if (a.is_function()) return a.as_function() == b.as_function();
  if (a.is_object()) return a.as_object()->equals(*b.as_object());
  return a.v_ == b.v_;
}

// --- compilation -----------------------------------------------------------

namespace {

enum class NodeKind { kConstant, kPrimitive, kVariable, kLambda, kApply };

struct Node {
  NodeKind kind;
  int prim = -1;
  int arity = 0;
  int index = 0;
  int left = -1;
  int right = -1;
  Value constant;
};

}  // namespace

struct CompiledProgram::Impl {
  std::vector<Node> nodes;
  int root = -1;
  std::string error;
  const DomainExecutor* executor = nullptr;
};

namespace {

class NullApplier : public Applier {
 public:
  Value apply(const Value&, const Value&) override { throw RuntimeFault("constant needs evaluation"); }
};

int lower(const Term& t, CompiledProgram::Impl& impl) {
  switch (t.kind()) {
    case TermKind::kPrimitive: {
      auto info = impl.executor->resolve(t.name());
      if (!info) {
        if (impl.error.empty()) impl.error = "unknown primitive '" + t.name() + "'";
        return -1;
      }
      Node n{};
      n.prim = info->id;
      n.arity = info->arity;
      if (info->arity == 0) {
        NullApplier none;
        n.kind = NodeKind::kConstant;
        try {
          n.constant = impl.executor->call(info->id, {}, none);
        } catch (const RuntimeFault& f) {
          impl.error = f.what();
          return -1;
        }
      } else {
        n.kind = NodeKind::kPrimitive;
      }
      impl.nodes.push_back(std::move(n));
      return static_cast<int>(impl.nodes.size()) - 1;
    }
    case TermKind::kVariable: {
      Node n{};
      n.kind = NodeKind::kVariable;
      n.index = t.index();
      impl.nodes.push_back(std::move(n));
      return static_cast<int>(impl.nodes.size()) - 1;
    }
    case TermKind::kInvented:
      return lower(t.body(), impl);
    case TermKind::kAbstraction: {
      int body = lower(t.body(), impl);
      if (body < 0) return -1;
      Node n{};
      n.kind = NodeKind::kLambda;
      n.left = body;
      impl.nodes.push_back(std::move(n));
      return static_cast<int>(impl.nodes.size()) - 1;
    }
    case TermKind::kApplication: {
      int f = lower(t.fn(), impl);
      if (f < 0) return -1;
      int x = lower(t.arg(), impl);
      if (x < 0) return -1;
      Node n{};
      n.kind = NodeKind::kApply;
      n.left = f;
      n.right = x;
      impl.nodes.push_back(std::move(n));
      return static_cast<int>(impl.nodes.size()) - 1;
    }
  }
  return -1;
}

struct LimitFault {
  EvalStatus status;
};

class Machine : public Applier {
 public:
  Machine(std::shared_ptr<const CompiledProgram::Impl> code, const EvalLimit& limit)
      : code_(std::move(code)), limit_(limit) {}

  Value eval(int node, const EnvPtr& env) {
    const Node& n = code_->nodes[static_cast<std::size_t>(node)];
    switch (n.kind) {
      case NodeKind::kConstant:
        return n.constant;
      case NodeKind::kPrimitive: {
        auto f = std::make_shared<FunctionValue>();
        f->kind = FunctionValue::Kind::kPartial;
        f->prim = n.prim;
        f->arity = n.arity;
        return Value(Value::FunctionPtr(std::move(f)));
      }
      case NodeKind::kVariable: {
        const EnvNode* e = env.get();
        for (int i = 0; i < n.index && e; ++i) e = e->next.get();
        if (!e) throw RuntimeFault("unbound variable");
        return e->value;
      }
      case NodeKind::kLambda: {
        auto f = std::make_shared<FunctionValue>();
        f->kind = FunctionValue::Kind::kClosure;
        f->code = code_;
        f->body = n.left;
        f->env = env;
        return Value(Value::FunctionPtr(std::move(f)));
      }
      case NodeKind::kApply: {
        Value fn = eval(n.left, env);
        Value arg = eval(n.right, env);
        return apply(fn, arg);
      }
    }
    throw RuntimeFault("bad node");
  }

  Value apply(const Value& fn, const Value& arg) override {
    if (!fn.is_function()) throw RuntimeFault("application of a non-function");
    if (++steps_ > limit_.max_steps) throw LimitFault{EvalStatus::kStepLimit};
    if (++depth_ > limit_.max_depth) throw LimitFault{EvalStatus::kDepthLimit};
    struct DepthGuard {
      int& d;
      ~DepthGuard() { --d; }
    } guard{depth_};
    const FunctionValue& f = *fn.as_function();
    if (f.kind == FunctionValue::Kind::kClosure) {
      auto env = std::make_shared<EnvNode>(EnvNode{arg, f.env});
      // Keep the closure's code alive for the duration of the call.
      std::shared_ptr<const CompiledProgram::Impl> hold = f.code;
      Machine* self = this;
      if (hold.get() != code_.get()) {
        Machine inner(hold, limit_);
        inner.steps_ = steps_;
        inner.depth_ = depth_;
        Value v = inner.eval(f.body, env);
        steps_ = inner.steps_;
        return v;
      }
      return self->eval(f.body, env);
    }
    std::vector<Value> args = f.args;
    args.push_back(arg);
    if (static_cast<int>(args.size()) == f.arity) {
      return code_->executor->call(f.prim, args, *this);
    }
    auto g = std::make_shared<FunctionValue>();
    g->kind = FunctionValue::Kind::kPartial;
    g->prim = f.prim;
    g->arity = f.arity;
    g->args = std::move(args);
    return Value(Value::FunctionPtr(std::move(g)));
  }

 private:
  std::shared_ptr<const CompiledProgram::Impl> code_;
  EvalLimit limit_;
  int steps_ = 0;
  int depth_ = 0;
};

}  // namespace

CompiledProgram::CompiledProgram(const Term& term, const DomainExecutor& executor)
    : impl_(std::make_shared<Impl>()) {
  impl_->executor = &executor;
  impl_->root = lower(term, *impl_);
}

CompiledProgram::~CompiledProgram() = default;
CompiledProgram::CompiledProgram(CompiledProgram&&) noexcept = default;
CompiledProgram& CompiledProgram::operator=(CompiledProgram&&) noexcept = default;

bool CompiledProgram::ok() const { return impl_->root >= 0; }
const std::string& CompiledProgram::error() const { return impl_->error; }

EvalOutcome CompiledProgram::run(std::span<const Value> args, const EvalLimit& limit) const {
  EvalOutcome out;
  if (!ok()) {
    out.status = EvalStatus::kUnknownPrimitive;
    out.message = impl_->error;
    return out;
  }
  Machine m(impl_, limit);
  try {
    Value v = m.eval(impl_->root, nullptr);
    for (const auto& a : args) v = m.apply(v, a);
    out.value = std::move(v);
  } catch (const LimitFault& f) {
    out.status = f.status;
    out.message = f.status == EvalStatus::kStepLimit ? "step limit exceeded" : "recursion limit exceeded";
  } catch (const RuntimeFault& f) {
    out.status = EvalStatus::kRuntimeError;
    out.message = f.what();
  }
  return out;
}

EvalOutcome evaluate(const Term& term, std::span<const Value> args, const DomainExecutor& executor,
                     const EvalLimit& limit) {
  return CompiledProgram(term, executor).run(args, limit);
}

}  // namespace lingo
