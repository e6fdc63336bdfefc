#include <gtest/gtest.h>

#include <filesystem>

#include "amortlab/counters.hpp"
#include "amortlab/soundness.hpp"
#include "amortlab/suites.hpp"
#include "support.hpp"

using namespace amortlab;
using namespace amortlab::build;
using amortlab::testing::load;

namespace {
ExprPtr increment_chain(const Pointer& start, int n) {
  ExprPtr body = ret(var("c" + std::to_string(n)));
  for (int i = n; i >= 1; --i) {
    ValuePtr prev = i == 1 ? ptr(start) : var("c" + std::to_string(i - 1));
    body = let("c" + std::to_string(i), call("incr", prev), body);
  }
  return body;
}
}  // namespace

TEST(Soundness, RealAgainstItselfHasNoPotential) {
  for (const char* name : {"empty.aml", "sharing.aml", "incr_bankers.aml", "pass_heir.aml"}) {
    Program p = load(name);
    SoundnessVerdict v = soundness_check(p.functions, initial_heap(p, Model::real), p.main, Model::real);
    EXPECT_EQ(v.verdict, Verdict::pass) << name << ": " << v.reason;
    EXPECT_EQ(v.phi_before, 0);
    EXPECT_EQ(v.phi_after, 0);
    EXPECT_EQ(v.slack, 0) << name;
  }
}

TEST(Soundness, BankersChainIsTight) {
  BuiltCounter c = build_counter(CounterSpec::sequential_bankers, 0);
  SoundnessVerdict v = soundness_check(counter_functions(CounterSpec::sequential_bankers), c.heap,
                                       increment_chain(c.root, 64), Model::bankers);
  EXPECT_EQ(v.verdict, Verdict::pass) << v.reason;
  EXPECT_EQ(v.n, 128u);
  EXPECT_EQ(v.k_real, 127u);
  EXPECT_EQ(v.phi_after, 1);
  EXPECT_EQ(static_cast<std::int64_t>(v.n - v.k_real), v.phi_after);
  EXPECT_EQ(v.slack, 0);
}

TEST(Soundness, CorpusProgramsUnderTheirModels) {
  struct Case {
    const char* file;
    Model model;
  };
  for (Case c : {Case{"incr_bankers.aml", Model::bankers}, Case{"bankers_spend.aml", Model::bankers},
                 Case{"incr_credit.aml", Model::credit}, Case{"pass_heir.aml", Model::credit_inherit},
                 Case{"incr_debit.aml", Model::debit}, Case{"pay_other.aml", Model::debit}}) {
    Program p = load(c.file);
    SoundnessVerdict v = soundness_check(p.functions, initial_heap(p, c.model), p.main, c.model);
    EXPECT_EQ(v.verdict, Verdict::pass) << c.file << ": " << v.reason;
    EXPECT_TRUE(v.value_equal);
    EXPECT_TRUE(v.heap_equal);
  }
}

TEST(Soundness, UnsoundDebitRuleFails) {
  Program p = load("pay_other.aml");
  SoundnessVerdict v =
      soundness_check(p.functions, initial_heap(p, Model::debit_unsound), p.main, Model::debit_unsound);
  EXPECT_EQ(v.verdict, Verdict::fail);
  EXPECT_EQ(v.phi_after, -3);
  EXPECT_NE(v.reason.find("negative potential"), std::string::npos);
}

TEST(Soundness, StuckModelRunIsInconclusive) {
  FuncEnv env{{"K", FuncDef{"x", ret(var("x"))}}};
  Heap h = alloc(Heap{}, hv::Lazy{"K", unit(), std::nullopt}, ann::Credits{0}).first;
  SoundnessVerdict v = soundness_check(env, h, force(ptr(Pointer::root(0))), Model::credit);
  EXPECT_EQ(v.verdict, Verdict::inconclusive);
}

TEST(Soundness, SmallRandomSuitesHaveNoFailures) {
  for (Model m : {Model::bankers, Model::credit, Model::credit_inherit, Model::debit, Model::debit_inherit}) {
    std::vector<SoundnessItem> items = random_soundness_suite(m, 150, 3);
    SoundnessSummary s = summarize(m, items);
    EXPECT_EQ(s.programs, 150u);
    EXPECT_EQ(s.fail, 0u) << model_name(m);
    EXPECT_GT(s.pass, 120u) << model_name(m);
  }
}

TEST(Soundness, SuitesAreDeterministic) {
  auto a = random_soundness_suite(Model::credit, 60, 11);
  auto b = random_soundness_suite(Model::credit, 60, 11);
  ASSERT_EQ(a.size(), b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_EQ(a[i].seed, b[i].seed);
    EXPECT_EQ(a[i].verdict.verdict, b[i].verdict.verdict);
    EXPECT_EQ(a[i].verdict.n, b[i].verdict.n);
    EXPECT_EQ(a[i].verdict.k_real, b[i].verdict.k_real);
  }
}

TEST(Soundness, CorpusSuite) {
  auto items = corpus_soundness_suite(Model::debit_unsound, AMORTLAB_CORPUS_DIR);
  SoundnessSummary s = summarize(Model::debit_unsound, items);
  EXPECT_EQ(s.programs, static_cast<std::uint64_t>(std::distance(
                            std::filesystem::directory_iterator(AMORTLAB_CORPUS_DIR), {})));
  EXPECT_GE(s.fail, 1u);
}
