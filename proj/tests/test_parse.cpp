#include <gtest/gtest.h>

#include "amortlab/counters.hpp"
#include "amortlab/parse.hpp"
#include "support.hpp"

using namespace amortlab;
using namespace amortlab::build;
using amortlab::testing::load;
using amortlab::testing::read_corpus;

namespace {
const char* corpus_files[] = {"empty.aml",      "sharing.aml",     "pay_other.aml",  "incr_bankers.aml",
                              "incr_credit.aml", "incr_debit.aml", "pass_heir.aml", "bankers_spend.aml"};
}

TEST(Parse, EmptyProgram) {
  Program p = parse("(main unit)");
  EXPECT_TRUE(p.functions.empty());
  EXPECT_TRUE(p.heap.empty());
  EXPECT_TRUE(equal(p.main, ret(unit())));
}

TEST(Parse, CommentsAndWhitespace) {
  Program p = parse("; leading\n(def F x x) ; trailing\n\n(main (call F unit))\n");
  ASSERT_EQ(p.functions.count("F"), 1u);
  EXPECT_TRUE(equal(p.main, call("F", unit())));
}

TEST(Parse, CompoundOperandsBecomeLets) {
  ExprPtr e = parse_expr("(save 2 (lazy Incr c))");
  EXPECT_TRUE(equal(e, let("$1", lazy("Incr", var("c")), save(2, var("$1")))));
}

TEST(Parse, DesugaringIsLeftToRight) {
  ExprPtr e = parse_expr("(call F (pair (force a) (force b)))");
  ExprPtr want = let("$1", force(var("a")), let("$2", force(var("b")), call("F", pair(var("$1"), var("$2")))));
  EXPECT_TRUE(equal(e, want));
}

TEST(Parse, FreshNamesAvoidSourceAtoms) {
  ExprPtr e = parse_expr("(let $1 unit (force (lazy F $1)))");
  EXPECT_TRUE(equal(e, let("$1", ret(unit()), let("$2", lazy("F", var("$1")), force(var("$2"))))));
}

TEST(Parse, SplitAnnotation) {
  ExprPtr e = parse_expr("(lazy! 2 F unit)");
  EXPECT_TRUE(equal(e, lazy_split(2, "F", unit())));
}

TEST(Parse, HeapNamesBecomeRootPointers) {
  Program p = load("bankers_spend.aml");
  ASSERT_EQ(p.heap.size(), 1u);
  EXPECT_EQ(p.heap[0].count, 5);
  EXPECT_TRUE(equal(p.main, spend(5, ptr(Pointer::root(0)), ret(unit()))));
}

TEST(Parse, IncrementSourcesMatchBuiltIns) {
  EXPECT_TRUE(equal(load("incr_bankers.aml").functions, counter_functions(CounterSpec::sequential_bankers)));
  EXPECT_TRUE(equal(load("incr_credit.aml").functions, counter_functions(CounterSpec::credit_thunked)));
  EXPECT_TRUE(equal(load("incr_debit.aml").functions, counter_functions(CounterSpec::debit_thunked)));
}

TEST(Parse, PrintRoundTripsEveryCorpusProgram) {
  for (const char* f : corpus_files) {
    SCOPED_TRACE(f);
    Program p = load(f);
    std::string text = print(p);
    Program q = parse(text);
    EXPECT_TRUE(equal(p, q));
    EXPECT_EQ(print(q), text);
  }
}

TEST(Parse, PrintsPointers) {
  EXPECT_EQ(print(ptr(Pointer({2, 0}))), "@2.0");
  EXPECT_EQ(print(pair(unit(), inl(unit()))), "(pair unit (inl unit))");
}

TEST(Parse, ErrorsCarryPositions) {
  try {
    parse("(main\n  (force y))");
    FAIL() << "expected a parse error";
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 2);
    EXPECT_NE(std::string(e.what()).find("unbound variable"), std::string::npos);
  }
}

TEST(Parse, RejectsMalformedInput) {
  EXPECT_THROW(parse("(main unit"), ParseError);
  EXPECT_THROW(parse("(main unit) (main unit)"), ParseError);
  EXPECT_THROW(parse("(def F x x)"), ParseError);
  EXPECT_THROW(parse("(main (call Missing unit))"), ParseError);
  EXPECT_THROW(parse("(main (save -1 unit))"), ParseError);
  EXPECT_THROW(parse("(heap (a 0 (lazy F (force b)))) (def F x x) (main unit)"), ParseError);
  EXPECT_THROW(parse("(heap (a 0 (fold unit))) (main (let a unit a))"), ParseError);
}

TEST(Parse, HeapEntriesSeeOnlyEarlierEntries) {
  EXPECT_NO_THROW(parse("(heap (a 0 (fold unit)) (b 0 (fold a))) (main unit)"));
  EXPECT_THROW(parse("(heap (b 0 (fold a)) (a 0 (fold unit))) (main unit)"), ParseError);
}
