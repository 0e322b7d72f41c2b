// Copyright 2026 The contactdiff Authors
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
#include <optional>

#include "contactdiff/guidescript.hpp"

namespace contactdiff::guidescript {

namespace {

double softplus(double x) {
  if (x > 20.0) return x;
  if (x < -20.0) return std::exp(x);
  return std::log1p(std::exp(x));
}

double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

// Values are length-1 (scalar) or length-n vectors; the semantic pass has
// already rejected mismatched lengths.
using Value = std::vector<double>;

struct EvalState {
  const DslContext* ctx;
  const Array2* tau;   // denormalized H x (act+obs)
  Array2* grad;        // nullptr for value-only evaluation
  int t = -1;          // bound inside mean_t
  // dyn() is shared state: energy and denorm-space gradient, lazily built.
  std::optional<std::pair<double, Array2>> dyn_cache;

  const std::pair<double, Array2>& dyn() {
    if (!dyn_cache) {
      Array2 tau_norm = ctx->normalizer->normalize(*tau);
      auto [e, g_norm] = dyn_energy_grad(*ctx->dynamics, tau_norm);
      // Chain rule back to environment units.
      for (int r = 0; r < g_norm.rows; ++r) {
        for (int c = 0; c < g_norm.cols; ++c) {
          g_norm(r, c) /= ctx->normalizer->scale[c];
        }
      }
      dyn_cache = {e, std::move(g_norm)};
    }
    return *dyn_cache;
  }
};

// Row/column resolution for obs/act refs.
int ref_row(const Node& n, const EvalState& st) {
  const int row = n.t_relative ? st.t + n.t_offset : n.t_offset;
  return row;
}

int ref_col(const Node& n, const EvalState& st, int k) {
  const int base = n.kind == NodeKind::kObsRef ? st.ctx->act_dim : 0;
  return base + n.lo + k;
}

// mean_t range: the widest [t_lo, t_hi] keeping every relative ref inside
// the horizon.
void t_extent(const Node& n, int& min_off, int& max_off) {
  if ((n.kind == NodeKind::kObsRef || n.kind == NodeKind::kActRef) &&
      n.t_relative) {
    min_off = std::min(min_off, n.t_offset);
    max_off = std::max(max_off, n.t_offset);
  }
  for (const auto& a : n.args) t_extent(*a, min_off, max_off);
}

Value eval_node(const Node& n, EvalState& st);

void backward_node(const Node& n, EvalState& st, const Value& adjoint);

Value broadcast_binary(const Node& n, const Value& a, const Value& b) {
  const size_t len = std::max(a.size(), b.size());
  Value out(len);
  for (size_t k = 0; k < len; ++k) {
    const double x = a[a.size() == 1 ? 0 : k];
    const double y = b[b.size() == 1 ? 0 : k];
    switch (n.op) {
      case '+': out[k] = x + y; break;
      case '-': out[k] = x - y; break;
      case '*': out[k] = x * y; break;
      case '/':
        if (y == 0.0) {
          throw EvalError("division by zero", n.line, n.column);
        }
        out[k] = x / y;
        break;
    }
  }
  return out;
}

Value eval_node(const Node& n, EvalState& st) {
  switch (n.kind) {
    case NodeKind::kNumber:
      return {n.number};
    case NodeKind::kTimeVar:
      return {double(st.t)};
    case NodeKind::kHorizon:
      return {double(st.ctx->horizon)};
    case NodeKind::kObsRef:
    case NodeKind::kActRef: {
      const int row = ref_row(n, st);
      if (row < 0 || row >= st.tau->rows) {
        throw EvalError("row index out of range at evaluation", n.line,
                        n.column);
      }
      Value out(size_t(n.hi - n.lo));
      for (int k = 0; k < n.hi - n.lo; ++k) {
        out[size_t(k)] = (*st.tau)(row, ref_col(n, st, k));
      }
      return out;
    }
    case NodeKind::kNegate: {
      Value v = eval_node(*n.args[0], st);
      for (double& x : v) x = -x;
      return v;
    }
    case NodeKind::kBinary: {
      Value a = eval_node(*n.args[0], st);
      Value b = eval_node(*n.args[1], st);
      return broadcast_binary(n, a, b);
    }
    case NodeKind::kCall: {
      if (n.callee == "norm2") {
        Value v = eval_node(*n.args[0], st);
        double s = 0.0;
        for (double x : v) s += x * x;
        return {s};
      }
      if (n.callee == "mean_t") {
        int min_off = 0, max_off = 0;
        t_extent(*n.args[0], min_off, max_off);
        const int t_lo = std::max(0, -min_off);
        const int t_hi = st.ctx->horizon - 1 - std::max(0, max_off);
        if (t_hi < t_lo) {
          throw EvalError("mean_t has no valid steps", n.line, n.column);
        }
        double sum = 0.0;
        for (int t = t_lo; t <= t_hi; ++t) {
          st.t = t;
          sum += eval_node(*n.args[0], st)[0];
        }
        st.t = -1;
        return {sum / double(t_hi - t_lo + 1)};
      }
      if (n.callee == "dyn") {
        return {st.dyn().first};
      }
      if (n.callee == "interp") {
        Value a = eval_node(*n.args[0], st);
        Value b = eval_node(*n.args[1], st);
        const double r = double(st.t) / double(st.ctx->horizon);
        const size_t len = std::max(a.size(), b.size());
        Value out(len);
        for (size_t k = 0; k < len; ++k) {
          out[k] = (1.0 - r) * a[a.size() == 1 ? 0 : k] +
                   r * b[b.size() == 1 ? 0 : k];
        }
        return out;
      }
      if (n.callee == "mask") {
        Value cond = eval_node(*n.args[0], st);
        if (cond[0] == 0.0) {
          Value v = eval_node(*n.args[1], st);
          std::fill(v.begin(), v.end(), 0.0);
          return v;
        }
        return eval_node(*n.args[1], st);
      }
      if (n.callee == "clamp") {
        Value x = eval_node(*n.args[0], st);
        Value lo = eval_node(*n.args[1], st);
        Value hi = eval_node(*n.args[2], st);
        for (size_t k = 0; k < x.size(); ++k) {
          const double l = lo[lo.size() == 1 ? 0 : k];
          const double h = hi[hi.size() == 1 ? 0 : k];
          x[k] = std::min(std::max(x[k], l), h);
        }
        return x;
      }
      Value v = eval_node(*n.args[0], st);
      for (double& x : v) {
        if (n.callee == "softplus") {
          x = softplus(x);
        } else if (n.callee == "heaviside") {
          x = x > 0.0 ? 1.0 : 0.0;
        } else if (n.callee == "abs") {
          x = std::fabs(x);
        } else if (n.callee == "sqrt") {
          if (x < 0.0) {
            throw EvalError("sqrt of negative value", n.line, n.column);
          }
          x = std::sqrt(x);
        }
      }
      return v;
    }
  }
  throw EvalError("internal: bad node", n.line, n.column);
}

void backward_node(const Node& n, EvalState& st, const Value& adjoint) {
  switch (n.kind) {
    case NodeKind::kNumber:
    case NodeKind::kTimeVar:
    case NodeKind::kHorizon:
      return;
    case NodeKind::kObsRef:
    case NodeKind::kActRef: {
      const int row = ref_row(n, st);
      for (int k = 0; k < n.hi - n.lo; ++k) {
        (*st.grad)(row, ref_col(n, st, k)) +=
            adjoint[adjoint.size() == 1 ? 0 : size_t(k)];
      }
      return;
    }
    case NodeKind::kNegate: {
      Value neg = adjoint;
      for (double& x : neg) x = -x;
      backward_node(*n.args[0], st, neg);
      return;
    }
    case NodeKind::kBinary: {
      Value a = eval_node(*n.args[0], st);
      Value b = eval_node(*n.args[1], st);
      const size_t len = std::max(a.size(), b.size());
      Value da(a.size(), 0.0), db(b.size(), 0.0);
      for (size_t k = 0; k < len; ++k) {
        const double adj = adjoint[adjoint.size() == 1 ? 0 : k];
        const double x = a[a.size() == 1 ? 0 : k];
        const double y = b[b.size() == 1 ? 0 : k];
        double gx = 0.0, gy = 0.0;
        switch (n.op) {
          case '+': gx = adj; gy = adj; break;
          case '-': gx = adj; gy = -adj; break;
          case '*': gx = adj * y; gy = adj * x; break;
          case '/': gx = adj / y; gy = -adj * x / (y * y); break;
        }
        da[a.size() == 1 ? 0 : k] += gx;
        db[b.size() == 1 ? 0 : k] += gy;
      }
      backward_node(*n.args[0], st, da);
      backward_node(*n.args[1], st, db);
      return;
    }
    case NodeKind::kCall: {
      if (n.callee == "norm2") {
        Value v = eval_node(*n.args[0], st);
        Value dv(v.size());
        for (size_t k = 0; k < v.size(); ++k) dv[k] = 2.0 * v[k] * adjoint[0];
        backward_node(*n.args[0], st, dv);
        return;
      }
      if (n.callee == "mean_t") {
        int min_off = 0, max_off = 0;
        t_extent(*n.args[0], min_off, max_off);
        const int t_lo = std::max(0, -min_off);
        const int t_hi = st.ctx->horizon - 1 - std::max(0, max_off);
        const double inv = 1.0 / double(t_hi - t_lo + 1);
        for (int t = t_lo; t <= t_hi; ++t) {
          st.t = t;
          backward_node(*n.args[0], st, {adjoint[0] * inv});
        }
        st.t = -1;
        return;
      }
      if (n.callee == "dyn") {
        const auto& [e, g] = st.dyn();
        (void)e;
        for (int r = 0; r < g.rows; ++r) {
          for (int c = 0; c < g.cols; ++c) {
            (*st.grad)(r, c) += adjoint[0] * g(r, c);
          }
        }
        return;
      }
      if (n.callee == "interp") {
        Value a = eval_node(*n.args[0], st);
        Value b = eval_node(*n.args[1], st);
        const double r = double(st.t) / double(st.ctx->horizon);
        Value da(a.size(), 0.0), db(b.size(), 0.0);
        const size_t len = std::max(a.size(), b.size());
        for (size_t k = 0; k < len; ++k) {
          const double adj = adjoint[adjoint.size() == 1 ? 0 : k];
          da[a.size() == 1 ? 0 : k] += (1.0 - r) * adj;
          db[b.size() == 1 ? 0 : k] += r * adj;
        }
        backward_node(*n.args[0], st, da);
        backward_node(*n.args[1], st, db);
        return;
      }
      if (n.callee == "mask") {
        Value cond = eval_node(*n.args[0], st);
        if (cond[0] != 0.0) backward_node(*n.args[1], st, adjoint);
        return;  // the condition is detached
      }
      if (n.callee == "clamp") {
        Value x = eval_node(*n.args[0], st);
        Value lo = eval_node(*n.args[1], st);
        Value hi = eval_node(*n.args[2], st);
        Value dx(x.size(), 0.0);
        for (size_t k = 0; k < x.size(); ++k) {
          const double l = lo[lo.size() == 1 ? 0 : k];
          const double h = hi[hi.size() == 1 ? 0 : k];
          if (x[k] > l && x[k] < h) {
            dx[k] = adjoint[adjoint.size() == 1 ? 0 : k];
          }
        }
        backward_node(*n.args[0], st, dx);
        return;  // clamp bounds are detached
      }
      // elementwise unaries
      Value x = eval_node(*n.args[0], st);
      Value dx(x.size(), 0.0);
      for (size_t k = 0; k < x.size(); ++k) {
        const double adj = adjoint[adjoint.size() == 1 ? 0 : k];
        if (n.callee == "softplus") {
          dx[k] = sigmoid(x[k]) * adj;
        } else if (n.callee == "heaviside") {
          dx[k] = 0.0;
        } else if (n.callee == "abs") {
          dx[k] = (x[k] > 0.0 ? 1.0 : x[k] < 0.0 ? -1.0 : 0.0) * adj;
        } else if (n.callee == "sqrt") {
          dx[k] = x[k] > 1e-300 ? adj / (2.0 * std::sqrt(x[k])) : 0.0;
        }
      }
      backward_node(*n.args[0], st, dx);
      return;
    }
  }
}

void require_tau(const Array2& tau, const DslContext& ctx) {
  if (tau.rows != ctx.horizon || tau.cols != ctx.act_dim + ctx.obs_dim) {
    throw ShapeError("guidescript eval: trajectory shape does not match "
                     "context dims");
  }
}

}  // namespace

double eval(const Program& program, const Array2& tau_denorm,
            const DslContext& ctx) {
  require_tau(tau_denorm, ctx);
  EvalState st{&ctx, &tau_denorm, nullptr};
  double total = 0.0;
  for (const auto& term : program.terms) {
    total += term.weight * eval_node(*term.expr, st)[0];
  }
  return total;
}

std::pair<double, Array2> eval_grad(const Program& program,
                                    const Array2& tau_denorm,
                                    const DslContext& ctx) {
  require_tau(tau_denorm, ctx);
  Array2 grad(tau_denorm.rows, tau_denorm.cols);
  EvalState st{&ctx, &tau_denorm, &grad};
  double total = 0.0;
  for (const auto& term : program.terms) {
    total += term.weight * eval_node(*term.expr, st)[0];
    backward_node(*term.expr, st, {term.weight});
  }
  return {total, std::move(grad)};
}

void calibrate(Program& program, const Array2& tau_reference,
               const DslContext& ctx) {
  require_tau(tau_reference, ctx);
  EvalState st{&ctx, &tau_reference, nullptr};
  for (auto& term : program.terms) {
    if (!term.adaptive) continue;
    const double v = eval_node(*term.expr, st)[0];
    term.weight = term.adaptive_target / std::max(std::fabs(v), 1e-8);
    term.adaptive = false;
  }
}

}  // namespace contactdiff::guidescript
