#include <gtest/gtest.h>

#include <random>

#include "amortlab/counters.hpp"
#include "amortlab/eval.hpp"
#include "support.hpp"

using namespace amortlab;
using namespace amortlab::build;
using amortlab::testing::load;

namespace {
StuckKind stuck_kind(const FuncEnv& env, const Heap& h, const ExprPtr& e, DebitMode mode) {
  try {
    eval_debit(env, h, e, mode);
  } catch (const StuckError& err) {
    return err.kind();
  }
  ADD_FAILURE() << "not stuck";
  return StuckKind::no_rule;
}

const FuncEnv chain3{{"F1", FuncDef{"x", call("F2", var("x"))}},
                     {"F2", FuncDef{"x", call("F3", var("x"))}},
                     {"F3", FuncDef{"x", ret(var("x"))}}};
}  // namespace

TEST(EvalDebit, ThunkedIncrement) {
  Program p = load("incr_debit.aml");
  Heap h = initial_heap(p, Model::debit);
  EvalOutcome o = eval_debit(p.functions, h, p.main, DebitMode::plain);
  EXPECT_EQ(o.cost, (Cost{0, 2}));
  EXPECT_EQ(counter_value(o.heap, o.value->as<val::Ptr>()->ptr), 3u);
}

TEST(EvalDebit, LazySpeculatesAndAccessIsFreeOncePaid) {
  EvalOutcome o = eval_debit(chain3, {}, lazy("F1", unit()), DebitMode::plain);
  EXPECT_EQ(o.cost, (Cost{0, 0}));
  Pointer t = o.value->as<val::Ptr>()->ptr;
  const auto& d = std::get<ann::Debit>(o.heap.find(t)->ann);
  EXPECT_EQ(d.debits, 3);
  EXPECT_EQ(d.kreal, 3u);
  EXPECT_EQ(potential(o.heap, Model::debit), 0u);
}

TEST(EvalDebit, AccessWithDebitsLeftIsStuck) {
  EvalOutcome o = eval_debit(chain3, {}, lazy("F1", unit()), DebitMode::plain);
  Pointer t = o.value->as<val::Ptr>()->ptr;
  EXPECT_EQ(stuck_kind(chain3, o.heap, force(ptr(t)), DebitMode::plain), StuckKind::debits_remaining);
  EvalOutcome ok = eval_debit(chain3, o.heap, let("s", save(3, ptr(t)), force(var("s"))), DebitMode::plain);
  EXPECT_EQ(ok.cost, (Cost{0, 3}));
  EXPECT_TRUE(std::holds_alternative<ann::None>(ok.heap.find(t)->ann));
  EXPECT_EQ(potential(ok.heap, Model::debit), 0u);
}

TEST(EvalDebit, PayingAnotherThunksDebits) {
  Program p = load("pay_other.aml");
  EvalOutcome d = eval_debit(p.functions, initial_heap(p, Model::debit), p.main, DebitMode::plain);
  EXPECT_EQ(d.cost, (Cost{0, 3}));
  EXPECT_TRUE(std::holds_alternative<ann::None>(d.heap.find(Pointer::root(0))->ann));  // accessed
  // The Pay record: one call plus three discharged debits, all debited to b.
  ExprPtr lazy_only = lazy("Pay", ptr(Pointer::root(0)));
  EvalOutcome b = eval_debit(p.functions, initial_heap(p, Model::debit_unsound), lazy_only, DebitMode::unsound);
  EXPECT_EQ(std::get<ann::Debit>(b.heap.find(b.value->as<val::Ptr>()->ptr)->ann).debits, 4);
  EXPECT_EQ(std::get<ann::Debit>(b.heap.find(Pointer::root(0))->ann).debits, 0);
  EvalOutcome u = eval_debit(p.functions, initial_heap(p, Model::debit_unsound), p.main,
                             DebitMode::unsound);
  EXPECT_EQ(u.cost, (Cost{0, 0}));
  EXPECT_EQ(potential_signed(u.heap, Model::debit_unsound), -3);
}

TEST(EvalDebit, SplitCostIsReportedAndTheRestIsDebited) {
  EvalOutcome o = eval_debit(chain3, {}, lazy_split(2, "F1", unit()), DebitMode::inheritance);
  EXPECT_EQ(o.cost, (Cost{2, 0}));
  Pointer t = o.value->as<val::Ptr>()->ptr;
  EXPECT_EQ(std::get<ann::Debit>(o.heap.find(t)->ann).debits, 1);
  EXPECT_EQ(stuck_kind(chain3, o.heap, force(ptr(t)), DebitMode::inheritance), StuckKind::debits_remaining);
  EvalOutcome paid = eval_debit(chain3, {}, let("t", lazy_split(2, "F1", unit()), let("s", save(1, var("t")), force(var("s")))),
                                DebitMode::inheritance);
  EXPECT_EQ(paid.cost, (Cost{2, 1}));
}

TEST(EvalDebit, SplitAboveTheCostIsStuck) {
  EXPECT_EQ(stuck_kind(chain3, {}, lazy_split(4, "F1", unit()), DebitMode::inheritance),
            StuckKind::split_exceeds_cost);
}

TEST(EvalDebit, IncrementOnAnyWellFormedCounter) {
  // From every well-formed debit counter an increment reports at most one
  // discharged debit and one unshared step, and leaves a well-formed counter.
  const FuncEnv& env = counter_functions(CounterSpec::debit_thunked);
  for (std::uint64_t v = 0; v < 256; ++v) {
    BuiltCounter c = build_counter(CounterSpec::debit_thunked, v);
    ASSERT_TRUE(counter_wf(c.heap, c.root, CounterSpec::debit_thunked));
    EvalOutcome o = eval_debit(env, c.heap, call("Incr", ptr(c.root)), DebitMode::plain);
    EXPECT_EQ(o.cost.k, 1u) << v;
    EXPECT_LE(o.cost.kprime, 1u) << v;
    Pointer r = o.value->as<val::Ptr>()->ptr;
    EXPECT_TRUE(counter_wf(o.heap, r, CounterSpec::debit_thunked, WfMode::accessible)) << v;
    EXPECT_EQ(counter_value(o.heap, r), v + 1);
  }
}
