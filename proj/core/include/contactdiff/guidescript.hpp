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

#ifndef CONTACTDIFF_GUIDESCRIPT_HPP_
#define CONTACTDIFF_GUIDESCRIPT_HPP_

#include <memory>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "contactdiff/array.hpp"
#include "contactdiff/data.hpp"
#include "contactdiff/dynmodel.hpp"

namespace contactdiff::guidescript {

// Expression language for guidance energies. A program is a list of named
// scalar terms; the program energy is their weighted sum:
//
//   # open the door to 30 degrees and keep the hand on the handle
//   goal @ 8: mean_t(norm2(obs[t, 3] - interp(obs[0, 3], 0.5236)))
//   align ~ 12: mean_t(norm2(obs[t, 0] - obs[t, 4]))
//   consistency @ 5: dyn()
//
// `name: expr` gives weight 1, `name @ w: expr` a fixed weight, and
// `name ~ target: expr` adaptive scaling (calibrate_program sets the
// weight so the term contributes `target` on a reference trajectory).
//
// Functions: norm2 (sum of squares), mean_t, clamp(x, lo, hi), softplus,
// heaviside, abs, sqrt, interp(a, b) = (1 - t/H) a + (t/H) b,
// mask(cond, x) (cond detached), dyn() (dynamics-consistency energy).
// heaviside and mask conditions contribute zero gradient; abs uses the
// sign subgradient.

enum class NodeKind {
  kNumber,
  kObsRef,   // obs[t_expr, index or lo:hi]
  kActRef,
  kTimeVar,  // t (valid inside mean_t)
  kHorizon,  // H
  kBinary,   // + - * /
  kNegate,
  kCall,
};

struct Node;
using NodePtr = std::unique_ptr<Node>;

struct Node {
  NodeKind kind;
  int line = 0;
  int column = 0;

  double number = 0.0;  // kNumber
  char op = 0;          // kBinary

  // kObsRef / kActRef. Row is (t + t_offset) when t_relative, else the
  // absolute row t_offset. Columns are [lo, hi) of the obs/act block.
  bool t_relative = false;
  int t_offset = 0;
  int lo = 0;
  int hi = 0;

  std::string callee;         // kCall
  std::vector<NodePtr> args;  // kCall operands; kBinary/kNegate children
};

struct ProgramTerm {
  std::string name;
  double weight = 1.0;
  bool adaptive = false;
  double adaptive_target = 0.0;
  NodePtr expr;
};

struct Program {
  std::vector<ProgramTerm> terms;
};

struct DslContext {
  int horizon = 0;
  int obs_dim = 0;
  int act_dim = 0;
  // Needed by dyn(): the evaluator normalizes internally.
  const Normalizer* normalizer = nullptr;
  const DynamicsModel* dynamics = nullptr;
};

// Syntax only; throws ParseError with line/column and the expected-token
// set.
Program parse(std::string_view source);

// Semantic pass: index bounds, vector-length agreement, t-scoping, arity,
// dyn() availability. Throws ParseError positioned at the offending node.
void check(const Program& program, const DslContext& ctx);

// parse + check.
Program load_program(std::string_view source, const DslContext& ctx);

// Weighted total energy on a denormalized trajectory. Throws EvalError
// (with node position) on runtime failures such as division by zero.
double eval(const Program& program, const Array2& tau_denorm,
            const DslContext& ctx);

// Energy plus gradient w.r.t. every trajectory entry, denormalized units.
std::pair<double, Array2> eval_grad(const Program& program,
                                    const Array2& tau_denorm,
                                    const DslContext& ctx);

// Resolves adaptive weights against a reference trajectory:
// weight = target / max(|term energy|, 1e-8).
void calibrate(Program& program, const Array2& tau_reference,
               const DslContext& ctx);

// Canonical rendering; parse(print(p)) reproduces the AST exactly.
std::string print_program(const Program& program);
bool equal(const Program& a, const Program& b);

// Grammar reference included in prompts and docs.
const char* grammar_ebnf();

}  // namespace contactdiff::guidescript

#endif  // CONTACTDIFF_GUIDESCRIPT_HPP_
