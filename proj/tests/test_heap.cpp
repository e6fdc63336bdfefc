#include <gtest/gtest.h>

#include <bit>

#include "amortlab/counters.hpp"
#include "amortlab/eval.hpp"
#include "amortlab/heap.hpp"
#include "support.hpp"

using namespace amortlab;
using namespace amortlab::build;

TEST(Heap, AllocationAdvancesTheRootCounter) {
  Heap h;
  auto [h1, a] = alloc(h, hv::Fold{unit()});
  auto [h2, b] = alloc(h1, hv::Memo{ptr(a)});
  EXPECT_EQ(a, Pointer::root(0));
  EXPECT_EQ(b, Pointer::root(1));
  EXPECT_EQ(h2.next_root(), 2u);
  EXPECT_EQ(h.size(), 0u);  // values, not shared state
}

TEST(Heap, RejectsDanglingAndDuplicateCells) {
  EXPECT_THROW(alloc(Heap{}, hv::Fold{ptr(Pointer::root(7))}), HeapError);
  Heap h;
  h.insert(Pointer::root(0), Cell{hv::Fold{unit()}, ann::None{}});
  EXPECT_THROW(h.insert(Pointer::root(0), Cell{hv::Fold{unit()}, ann::None{}}), HeapError);
}

TEST(Heap, InsertionOrderAndWatermark) {
  Heap h;
  h.insert(Pointer::root(1), Cell{hv::Fold{unit()}, ann::None{}});
  auto mark = h.watermark();
  h.insert(Pointer::root(0), Cell{hv::Fold{unit()}, ann::None{}});
  h.insert(Pointer::root(1).child(0), Cell{hv::Fold{unit()}, ann::None{}});
  EXPECT_EQ(h.order(), (std::vector<Pointer>{Pointer::root(1), Pointer::root(0), Pointer::root(1).child(0)}));
  EXPECT_EQ(h.inserted_since(mark), (std::vector<Pointer>{Pointer::root(0), Pointer::root(1).child(0)}));
  h.update(Pointer::root(1), Cell{hv::Memo{unit()}, ann::None{}});
  EXPECT_EQ(h.order().front(), Pointer::root(1));
}

TEST(Heap, EqualityIgnoresOrder) {
  Heap a, b;
  a.insert(Pointer::root(0), Cell{hv::Fold{unit()}, ann::None{}});
  a.insert(Pointer::root(1), Cell{hv::Memo{unit()}, ann::None{}});
  b.insert(Pointer::root(1), Cell{hv::Memo{unit()}, ann::None{}});
  b.insert(Pointer::root(0), Cell{hv::Fold{unit()}, ann::None{}});
  EXPECT_TRUE(a == b);
  b.update(Pointer::root(0), Cell{hv::Fold{unit()}, ann::Credits{1}});
  EXPECT_FALSE(a == b);
}

TEST(Heap, ErasureStripsCredits) {
  Heap h;
  h = alloc(h, hv::Fold{unit()}, ann::Credits{4}).first;
  Heap e = erase(h, Model::bankers);
  EXPECT_TRUE(std::holds_alternative<ann::None>(e.find(Pointer::root(0))->ann));
  EXPECT_EQ(potential(h, Model::bankers), 4u);
  EXPECT_EQ(potential(e, Model::real), 0u);
}

TEST(Heap, DebitErasureRevertsRecords) {
  Program p = amortlab::testing::load("pay_other.aml");
  Heap h = initial_heap(p, Model::debit);
  const Cell* a = h.find(Pointer::root(0));
  ASSERT_NE(a, nullptr);
  const auto* d = std::get_if<ann::Debit>(&a->ann);
  ASSERT_NE(d, nullptr);
  EXPECT_EQ(d->debits, 3);
  EXPECT_EQ(d->kreal, 3u);
  Heap e = erase(h, Model::debit);
  EXPECT_TRUE(equal(e.find(Pointer::root(0))->value, HeapValue{hv::Lazy{"F1", unit(), std::nullopt}}));
  EXPECT_EQ(potential(h, Model::debit), 0u);
}

TEST(Heap, WellFormednessPerModel) {
  Heap h = alloc(Heap{}, hv::Fold{unit()}, ann::Credits{1}).first;
  EXPECT_NO_THROW(check_well_formed(h, Model::bankers));
  EXPECT_THROW(check_well_formed(h, Model::credit), HeapError);
  EXPECT_THROW(check_well_formed(h, Model::real), HeapError);
}

TEST(Potential, BankersCounterHoldsOneCreditPerOneBit) {
  for (std::uint64_t v = 0; v < 300; ++v) {
    BuiltCounter c = build_counter(CounterSpec::sequential_bankers, v);
    EXPECT_EQ(potential(c.heap, Model::bankers), static_cast<std::uint64_t>(std::popcount(v))) << v;
  }
  EXPECT_EQ(potential(build_counter(CounterSpec::sequential_bankers, 7).heap, Model::bankers), 3u);
}

namespace {
// Explicit zero-bit positions of the thunked representation: each explicit
// zero is followed by a thunk standing for the rest plus one, so the bits
// under that thunk are not in the heap.
std::uint64_t explicit_zero_bits(std::uint64_t v) {
  if (v == 0) return 0;
  if (v & 1) return explicit_zero_bits(v >> 1);
  return 1 + explicit_zero_bits((v >> 1) - 1);
}
}  // namespace

TEST(Potential, CreditCounterHoldsOneCreditPerExplicitZeroBit) {
  for (std::uint64_t v = 0; v < 300; ++v) {
    BuiltCounter c = build_counter(CounterSpec::credit_thunked, v);
    EXPECT_EQ(potential(c.heap, Model::credit), explicit_zero_bits(v)) << v;
  }
  // 100 in binary: the second zero sits inside the pending thunk.
  EXPECT_EQ(potential(build_counter(CounterSpec::credit_thunked, 4).heap, Model::credit), 1u);
}

TEST(Potential, NegativeTotalsAreReportedNotClamped) {
  Program p = amortlab::testing::load("pay_other.aml");
  EvalOutcome o = evaluate(p.functions, initial_heap(p, Model::debit_unsound), p.main, Model::debit_unsound);
  EXPECT_LT(potential_signed(o.heap, Model::debit_unsound), 0);
  EXPECT_THROW(potential(o.heap, Model::debit_unsound), NegativePotential);
}

TEST(Heap, JournalRollbackRestoresTheHeap) {
  Heap h;
  h.insert(Pointer::root(0), Cell{hv::Fold{unit()}, ann::Credits{1}});
  h.insert(Pointer::root(1), Cell{hv::Memo{unit()}, ann::None{}});
  Heap before = h;
  auto order = h.order();
  h.begin_journal();
  h.update(Pointer::root(0), Cell{hv::Fold{unit()}, ann::Credits{0}});
  h.remove(Pointer::root(1));
  h.insert(Pointer::root(1), Cell{hv::Fold{unit()}, ann::None{}});
  h.insert(Pointer::root(5).child(0), Cell{hv::Fold{unit()}, ann::None{}});
  h.reserve_root();
  h.rollback_journal();
  EXPECT_TRUE(h == before);
  EXPECT_EQ(h.order(), order);
  EXPECT_EQ(h.next_root(), before.next_root());
  EXPECT_FALSE(h.journaling());

  h.begin_journal();
  h.insert(Pointer::root(2), Cell{hv::Fold{unit()}, ann::None{}});
  h.commit_journal();
  EXPECT_EQ(h.size(), 3u);
  EXPECT_THROW(h.rollback_journal(), HeapError);
}

TEST(Heap, ErasureUnderCreditDropsThunkCredits) {
  EXPECT_TRUE(erase(Heap{}, Model::credit) == Heap{});
  Heap h = alloc(Heap{}, hv::Lazy{"F", unit(), std::nullopt}, ann::Credits{3}).first;
  Heap plain = alloc(Heap{}, hv::Lazy{"F", unit(), std::nullopt}).first;
  EXPECT_TRUE(erase(h, Model::credit) == plain);
}

TEST(Heap, DebitErasureMatchesThePreSpeculationSnapshot) {
  FuncEnv env{{"F", FuncDef{"x", let("c", fold(var("x")), fold(var("c")))}}};
  Heap before = alloc(Heap{}, hv::Fold{unit()}).first;
  EvalOutcome o = eval_debit(env, before, lazy("F", ptr(Pointer::root(0))), DebitMode::plain);
  Pointer a = o.value->as<val::Ptr>()->ptr;
  Heap expect = before;
  expect.insert(a, Cell{hv::Lazy{"F", ptr(Pointer::root(0)), std::nullopt}, ann::None{}});
  EXPECT_TRUE(erase(o.heap, Model::debit) == expect);
  EXPECT_EQ(std::get<ann::Debit>(o.heap.find(a)->ann).allocs.size(), 2u);
}

TEST(Potential, SmallExamples) {
  for (Model m : {Model::real, Model::bankers, Model::credit, Model::debit}) EXPECT_EQ(potential(Heap{}, m), 0u);

  Heap c;
  c.insert(Pointer::root(0), Cell{hv::Lazy{"F", unit(), std::nullopt}, ann::Credits{2}});
  c.insert(Pointer::root(1), Cell{hv::Memo{unit()}, ann::None{}});
  EXPECT_EQ(potential(c, Model::credit), 2u);

  // A debit counter cell: one record with 1 debit whose real cost, from an
  // erased real run of Incr, is 2.
  const FuncEnv& env = counter_functions(CounterSpec::debit_thunked);
  BuiltCounter one = build_counter(CounterSpec::debit_thunked, 2);
  std::uint64_t kreal = real_cost_of_thunk(env, one.heap, "Incr", ptr(one.root), Model::debit);
  ASSERT_EQ(kreal, 2u);
  Heap d = one.heap;
  Pointer a = d.reserve_root();
  d.insert(a, Cell{hv::Memo{unit()}, ann::Debit{1, "Incr", ptr(one.root), {}, kreal}});
  EXPECT_EQ(potential(d, Model::debit) - potential(one.heap, Model::debit), 1u);
}
