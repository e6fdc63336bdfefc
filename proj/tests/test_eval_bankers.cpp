#include <gtest/gtest.h>

#include "amortlab/counters.hpp"
#include "amortlab/eval.hpp"
#include "support.hpp"

using namespace amortlab;
using namespace amortlab::build;
using amortlab::testing::load;

TEST(EvalBankers, IncrementOnThreePaysTwoAndReleasesOneCredit) {
  Program p = load("incr_bankers.aml");
  Heap h = initial_heap(p, Model::bankers);
  EXPECT_EQ(potential(h, Model::bankers), 2u);
  EvalOutcome o = eval_bankers(p.functions, h, p.main);
  EXPECT_EQ(o.cost.k, 2u);
  EXPECT_EQ(potential(o.heap, Model::bankers), 1u);
  EXPECT_EQ(counter_value(o.heap, o.value->as<val::Ptr>()->ptr), 4u);
}

TEST(EvalBankers, SpendingStoredCreditsIsFree) {
  Program p = load("bankers_spend.aml");
  Heap h = initial_heap(p, Model::bankers);
  EvalOutcome o = eval_bankers(p.functions, h, p.main);
  EXPECT_EQ(o.cost.k, 0u);
  EXPECT_EQ(potential(o.heap, Model::bankers), 0u);
}

TEST(EvalBankers, SaveCostsItsAmount) {
  Heap h = alloc(Heap{}, hv::Fold{unit()}).first;
  EvalOutcome o = eval_bankers({}, h, save(4, ptr(Pointer::root(0))));
  EXPECT_EQ(o.cost.k, 4u);
  EXPECT_EQ(potential(o.heap, Model::bankers), 4u);
}

TEST(EvalBankers, OverspendIsStuck) {
  Heap h = alloc(Heap{}, hv::Fold{unit()}, ann::Credits{2}).first;
  try {
    eval_bankers({}, h, spend(3, ptr(Pointer::root(0)), ret(unit())));
    FAIL();
  } catch (const StuckError& e) {
    EXPECT_EQ(e.kind(), StuckKind::insufficient_credits);
    EXPECT_TRUE(e.heap() == h);
  }
}

TEST(EvalBankers, SequentialIncrementsCostTwoEach) {
  const FuncEnv& env = counter_functions(CounterSpec::sequential_bankers);
  BuiltCounter c = build_counter(CounterSpec::sequential_bankers, 0);
  Heap h = c.heap;
  Pointer cur = c.root;
  for (int i = 1; i <= 40; ++i) {
    EvalOutcome o = eval_bankers(env, h, increment_op(CounterSpec::sequential_bankers, cur));
    EXPECT_EQ(o.cost.k, 2u) << i;
    h = o.heap;
    cur = o.value->as<val::Ptr>()->ptr;
    EXPECT_TRUE(counter_wf(h, cur, CounterSpec::sequential_bankers));
    EXPECT_EQ(counter_value(h, cur), static_cast<std::uint64_t>(i));
  }
}

TEST(EvalBankers, CostIncludesRealSteps) {
  // Soundness on the counter: n = k_real + dPhi for every value.
  const FuncEnv& env = counter_functions(CounterSpec::sequential_bankers);
  for (std::uint64_t v = 0; v < 200; ++v) {
    BuiltCounter c = build_counter(CounterSpec::sequential_bankers, v);
    EvalOutcome m = eval_bankers(env, c.heap, increment_op(CounterSpec::sequential_bankers, c.root));
    EvalOutcome r = eval_real(env, erase(c.heap, Model::bankers), increment_op(CounterSpec::sequential_bankers, c.root));
    auto phi0 = potential_signed(c.heap, Model::bankers);
    auto phi1 = potential_signed(m.heap, Model::bankers);
    EXPECT_EQ(static_cast<std::int64_t>(m.cost.k), static_cast<std::int64_t>(r.cost.k) + phi1 - phi0) << v;
    EXPECT_TRUE(erase(m.heap, Model::bankers) == r.heap);
  }
}

TEST(EvalBankers, SpendFromAnEmptyCellIsStuck) {
  Heap h = alloc(Heap{}, hv::Fold{unit()}, ann::Credits{0}).first;
  EXPECT_THROW(eval_bankers({}, h, spend(5, ptr(Pointer::root(0)), ret(unit()))), StuckError);
}

TEST(EvalBankers, SaveThenSpendAroundABody) {
  FuncEnv env{{"A", FuncDef{"x", call("B", var("x"))}},
              {"B", FuncDef{"x", call("C", var("x"))}},
              {"C", FuncDef{"x", ret(var("x"))}}};
  Heap h = alloc(Heap{}, hv::Fold{unit()}).first;
  ValuePtr a = ptr(Pointer::root(0));
  EvalOutcome o = eval_bankers(env, h, let("s", save(3, a), spend(3, var("s"), call("A", unit()))));
  // 3 for the save, max(3 - 3, 0) for the spend.
  EXPECT_EQ(o.cost.k, 3u);
  EXPECT_EQ(potential(o.heap, Model::bankers), 0u);
  // Spending more than the body costs discards the surplus.
  Heap rich = alloc(Heap{}, hv::Fold{unit()}, ann::Credits{9}).first;
  EXPECT_EQ(eval_bankers(env, rich, spend(9, a, call("A", unit()))).cost.k, 0u);
}
