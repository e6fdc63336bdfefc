#pragma once

#include <cstdint>
#include <string>

#include "amortlab/eval.hpp"
#include "amortlab/heap.hpp"
#include "amortlab/syntax.hpp"

namespace amortlab {

struct GeneratorOptions {
  int min_functions = 2;
  int max_functions = 6;
  int max_depth = 3;
  // Chance that a force is funded with one credit (or debit payment) less
  // than the static bound.
  double underfund_rate = 0.08;
  // Bankers only: chance that a spend asks for one credit more than was
  // just saved.
  double overspend_rate = 0.05;
};

// A well-typed random program for one model: functions form a DAG (a body
// only calls or suspends functions with a larger index), every force is
// preceded by a save of its thunk's static cost bound, and under credit
// inheritance every thunk body ends by passing an heir. `setup` builds the
// starting heap; `body` is the program run from it with `param` bound to
// the setup's result.
struct GeneratedProgram {
  FuncEnv functions;
  ExprPtr setup;
  std::string param;
  ExprPtr body;
};

GeneratedProgram generate_program(Model model, std::uint64_t seed, const GeneratorOptions& opts = {});

// The program as a single closed main expression: (let param setup body).
Program to_program(const GeneratedProgram& g);

struct Instance {
  FuncEnv functions;
  Heap heap;
  ExprPtr main;
  bool setup_ok = false;
  std::string setup_error;
};

// Runs the setup under the model from the empty heap and substitutes its
// value into the body.
Instance instantiate(const GeneratedProgram& g, Model model);

}  // namespace amortlab
