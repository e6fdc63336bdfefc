#include <gtest/gtest.h>

#include <bit>

#include "amortlab/counters.hpp"
#include "amortlab/eval.hpp"
#include "amortlab/random_program.hpp"
#include "support.hpp"

using namespace amortlab;
using namespace amortlab::build;
using amortlab::testing::load;

namespace {
// F1 -> F2 -> ... -> Fk: forcing (lazy F1 unit) costs k calls.
FuncEnv chain(int k) {
  FuncEnv env;
  for (int i = 1; i <= k; ++i) {
    std::string name = "F" + std::to_string(i);
    env[name] = FuncDef{"x", i == k ? ret(var("x")) : call("F" + std::to_string(i + 1), var("x"))};
  }
  return env;
}

EvalOutcome run_file(const std::string& name, Model m) {
  Program p = load(name);
  return evaluate(p.functions, initial_heap(p, m), p.main, m);
}
}  // namespace

TEST(EvalReal, ValueCostsNothing) {
  EvalOutcome o = run_file("empty.aml", Model::real);
  EXPECT_EQ(o.cost.k, 0u);
  EXPECT_TRUE(equal(o.value, unit()));
}

TEST(EvalReal, CallsAndApplicationsCountOneStep) {
  FuncEnv env{{"Id", FuncDef{"x", ret(var("x"))}}};
  EXPECT_EQ(eval_real(env, {}, call("Id", unit())).cost.k, 1u);
  EXPECT_EQ(eval_real(env, {}, app(lam("y", ret(var("y"))), unit())).cost.k, 1u);
  EXPECT_EQ(eval_real(env, {}, let("a", call("Id", unit()), call("Id", var("a")))).cost.k, 2u);
}

TEST(EvalReal, SharedThunkIsPaidOnce) {
  EXPECT_EQ(run_file("sharing.aml", Model::real).cost.k, 3u);
  for (int k = 1; k <= 20; ++k) {
    FuncEnv env = chain(k);
    ExprPtr once = let("t", lazy("F1", unit()), force(var("t")));
    ExprPtr twice = let("t", lazy("F1", unit()), let("y", force(var("t")), force(var("t"))));
    EXPECT_EQ(eval_real(env, {}, once).cost.k, static_cast<std::uint64_t>(k));
    EXPECT_EQ(eval_real(env, {}, twice).cost.k, static_cast<std::uint64_t>(k));
  }
}

TEST(EvalReal, ForceMemoisesUnderTheThunksName) {
  FuncEnv env{{"F", FuncDef{"x", fold(var("x"))}}};
  EvalOutcome o = eval_real(env, {}, let("t", lazy("F", unit()), force(var("t"))));
  EXPECT_EQ(o.heap.size(), 2u);
  EXPECT_TRUE(o.heap.contains(Pointer::root(0).child(0)));
  EXPECT_TRUE(std::holds_alternative<hv::Memo>(o.heap.find(Pointer::root(0))->value));
}

TEST(EvalReal, IncrementOnThreeOnes) {
  BuiltCounter c = build_counter(CounterSpec::sequential_bankers, 7);
  Heap h = erase(c.heap, Model::bankers);
  EvalOutcome o = eval_real(counter_functions(CounterSpec::sequential_bankers), h, call("incr", ptr(c.root)));
  EXPECT_EQ(o.cost.k, 4u);
}

TEST(EvalReal, IncrementCostIsTrailingOnesPlusOne) {
  const FuncEnv& env = counter_functions(CounterSpec::sequential_bankers);
  for (std::uint64_t t = 0; t <= 8; ++t) {
    for (std::uint64_t high : {0u, 2u, 6u}) {
      std::uint64_t v = (high << t) | ((std::uint64_t{1} << t) - 1);
      BuiltCounter c = build_counter(CounterSpec::sequential_bankers, v);
      EXPECT_EQ(real_cost_of_thunk(env, c.heap, "incr", ptr(c.root), Model::bankers), t + 1) << v;
    }
  }
}

TEST(EvalReal, ThunkedIncrementOnEndCostsOne) {
  const FuncEnv& env = counter_functions(CounterSpec::credit_thunked);
  BuiltCounter c = build_counter(CounterSpec::credit_thunked, 0);
  EXPECT_EQ(real_cost_of_thunk(env, c.heap, "Incr", ptr(c.root), Model::credit), 1u);
  FuncEnv id{{"K", FuncDef{"x", ret(unit())}}};
  EXPECT_EQ(real_cost_of_thunk(id, {}, "K", unit()), 1u);
}

TEST(EvalReal, AnnotationsAreNoOps) {
  Heap h = alloc(Heap{}, hv::Fold{unit()}).first;
  ValuePtr a = ptr(Pointer::root(0));
  EvalOutcome o = eval_real({}, h, let("s", save(3, a), spend(2, var("s"), ret(var("s")))));
  EXPECT_EQ(o.cost.k, 0u);
  EXPECT_TRUE(o.heap == h);
}

TEST(EvalReal, StuckShapes) {
  Heap h = alloc(Heap{}, hv::Fold{unit()}).first;
  ValuePtr a = ptr(Pointer::root(0));
  auto kind_of = [&](const ExprPtr& e) -> std::optional<StuckKind> {
    try {
      eval_real({}, h, e);
    } catch (const StuckError& err) {
      return err.kind();
    }
    return std::nullopt;
  };
  EXPECT_EQ(kind_of(case_of(unit(), "l", ret(unit()), "r", ret(unit()))), StuckKind::case_on_non_sum);
  EXPECT_EQ(kind_of(split("x", "y", unit(), ret(unit()))), StuckKind::split_on_non_pair);
  EXPECT_EQ(kind_of(force(a)), StuckKind::force_on_non_thunk);
  EXPECT_EQ(kind_of(unfold(ptr(Pointer::root(9)))), StuckKind::unbound_pointer);
  EXPECT_EQ(kind_of(call("Nope", unit())), StuckKind::unbound_function);
  EXPECT_EQ(kind_of(app(unit(), unit())), StuckKind::app_on_non_lambda);
  EXPECT_EQ(kind_of(ret(var("x"))), StuckKind::free_variable);
}

TEST(EvalReal, ReentrantForceIsStuck) {
  // T forces its own argument, which is T's own cell once tied.
  FuncEnv env{{"T", FuncDef{"x", force(var("x"))}}};
  Heap h;
  h.insert(Pointer::root(0), Cell{hv::Lazy{"T", ptr(Pointer::root(0)), std::nullopt}, ann::None{}});
  try {
    eval_real(env, h, force(ptr(Pointer::root(0))));
    FAIL();
  } catch (const StuckError& e) {
    EXPECT_EQ(e.kind(), StuckKind::unbound_pointer);
  }
}

TEST(EvalReal, OverflowAndFuelAreHardErrors) {
  EXPECT_THROW((Cost{~std::uint64_t{0}, 0} + Cost{1, 0}), EvalError);
  FuncEnv env{{"Loop", FuncDef{"x", call("Loop", var("x"))}}};
  EvalOptions opts;
  opts.fuel = 1000;
  EXPECT_THROW(eval_real(env, {}, call("Loop", unit()), opts), EvalError);
}

TEST(EvalReal, DeterministicNames) {
  GeneratedProgram g = generate_program(Model::real, 99);
  Program p = to_program(g);
  EvalOutcome a = eval_real(p.functions, {}, p.main);
  EvalOutcome b = eval_real(p.functions, {}, p.main);
  EXPECT_EQ(a.cost, b.cost);
  EXPECT_TRUE(a.heap == b.heap);
  EXPECT_EQ(a.heap.order(), b.heap.order());
}

TEST(EvalReal, CostIsAdditiveOverLet) {
  for (std::uint64_t seed = 0; seed < 300; ++seed) {
    GeneratedProgram g = generate_program(Model::real, seed);
    Program whole = to_program(g);
    EvalOutcome all = eval_real(whole.functions, {}, whole.main);
    EvalOutcome first = eval_real(g.functions, {}, g.setup);
    EvalOutcome second = eval_real(g.functions, first.heap, substitute(g.body, Subst{{g.param, first.value}}));
    EXPECT_EQ(all.cost.k, first.cost.k + second.cost.k) << seed;
    EXPECT_TRUE(equal(all.value, second.value)) << seed;
  }
}
