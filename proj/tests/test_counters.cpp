#include <gtest/gtest.h>

#include <bit>

#include "amortlab/counters.hpp"
#include "support.hpp"

using namespace amortlab;
using namespace amortlab::build;

TEST(Counters, BuiltCountersAreWellFormedAndDenoteTheirValue) {
  for (CounterSpec s : {CounterSpec::sequential_bankers, CounterSpec::credit_thunked, CounterSpec::debit_thunked}) {
    for (std::uint64_t v : {0ull, 1ull, 2ull, 3ull, 4ull, 7ull, 100ull, 1023ull, (1ull << 47) + 5}) {
      BuiltCounter c = build_counter(s, v);
      EXPECT_TRUE(counter_wf(c.heap, c.root, s)) << counter_spec_name(s) << " " << v;
      EXPECT_EQ(counter_value(c.heap, c.root), v);
      EXPECT_NO_THROW(check_well_formed(c.heap, counter_model(s)));
    }
  }
  EXPECT_THROW(build_counter(CounterSpec::sequential_bankers, max_counter_value), std::invalid_argument);
}

TEST(Counters, MissingCreditBreaksWellFormedness) {
  BuiltCounter c = build_counter(CounterSpec::sequential_bankers, 1);
  Heap h = c.heap;
  h.update(c.root, Cell{h.find(c.root)->value, ann::Credits{0}});
  EXPECT_FALSE(counter_wf(h, c.root, CounterSpec::sequential_bankers));
  EXPECT_FALSE(counter_wf(c.heap, c.root, CounterSpec::credit_thunked));
}

TEST(Counters, ParseNames) {
  EXPECT_EQ(parse_counter_spec("seq"), CounterSpec::sequential_bankers);
  EXPECT_EQ(parse_counter_spec("debit"), CounterSpec::debit_thunked);
  EXPECT_FALSE(parse_counter_spec("bogus"));
  EXPECT_EQ(Usage::parse("persistent:3").repeats, 3u);
  EXPECT_EQ(Usage::parse("random:9").kind, Usage::random_versions);
  EXPECT_EQ(Usage::parse("sequential").str(), "sequential");
  EXPECT_THROW(Usage::parse("persistent:x"), std::invalid_argument);
}

TEST(Counters, SequentialBankersCostsTwoPerIncrement) {
  ExperimentReport r = run_increment_experiment(CounterSpec::sequential_bankers, 64, Usage{});
  ASSERT_EQ(r.rows.size(), 64u);
  for (const auto& row : r.rows) {
    EXPECT_EQ(row.model_cost.k, 2u);
    EXPECT_TRUE(row.wf);
  }
  EXPECT_EQ(r.total_model_cost.k, 128u);
  EXPECT_EQ(r.stuck_events, 0u);
}

TEST(Counters, RealTotalMatchesTrailingOnes) {
  for (std::uint64_t n : {1u, 5u, 16u, 33u, 100u}) {
    ExperimentReport r = run_increment_experiment(CounterSpec::sequential_bankers, n, Usage{});
    std::uint64_t expect = 0;
    for (std::uint64_t v = 0; v < n; ++v) expect += std::countr_one(v) + 1;
    EXPECT_EQ(r.total_real_cost, expect) << n;
  }
}

TEST(Counters, SequentialCounterGetsStuckWhenReused) {
  ExperimentReport r = run_increment_experiment(CounterSpec::sequential_bankers, 7, Usage::parse("persistent:2"));
  ASSERT_EQ(r.rows.size(), 9u);
  EXPECT_FALSE(r.rows[7].stuck);
  EXPECT_TRUE(r.rows[8].stuck);
  EXPECT_EQ(r.stuck_events, 1u);
}

TEST(Counters, ThunkedCountersStayConstantUnderReuse) {
  for (CounterSpec s : {CounterSpec::credit_thunked, CounterSpec::debit_thunked}) {
    ExperimentReport r = run_increment_experiment(s, 16, Usage::parse("persistent:64"));
    EXPECT_EQ(r.stuck_events, 0u) << counter_spec_name(s);
    for (std::size_t i = 16; i < r.rows.size(); ++i) {
      EXPECT_LE(r.rows[i].model_cost.total(), 2u) << counter_spec_name(s) << " row " << i;
      EXPECT_EQ(r.rows[i].value, 17u);
    }
  }
  ExperimentReport c = run_increment_experiment(CounterSpec::credit_thunked, 64, Usage::parse("persistent:64"));
  for (const auto& row : c.rows) EXPECT_EQ(row.model_cost.k, 2u);
}

TEST(Counters, RandomVersionsAreReproducible) {
  ExperimentReport a = run_increment_experiment(CounterSpec::credit_thunked, 50, Usage::parse("random:4"));
  ExperimentReport b = run_increment_experiment(CounterSpec::credit_thunked, 50, Usage::parse("random:4"));
  EXPECT_EQ(a.csv(), b.csv());
  EXPECT_EQ(a.stuck_events, 0u);
  for (const auto& row : a.rows) {
    EXPECT_LE(row.version, row.step);
    EXPECT_TRUE(row.wf);
  }
}

TEST(Counters, CsvHasOneLinePerRow) {
  ExperimentReport r = run_increment_experiment(CounterSpec::debit_thunked, 10, Usage{});
  std::string csv = r.csv();
  EXPECT_EQ(static_cast<std::size_t>(std::count(csv.begin(), csv.end(), '\n')), r.rows.size() + 1);
}

TEST(Counters, SharedThunksForcedThroughAnotherVersionStayWellFormed) {
  // Random versions share tails, so some Incr thunks are already memos when
  // a later increment reaches them.
  for (std::uint64_t seed = 1; seed <= 4; ++seed) {
    ExperimentReport r =
        run_increment_experiment(CounterSpec::credit_thunked, 256, Usage::parse("random:" + std::to_string(seed)));
    for (const auto& row : r.rows) EXPECT_TRUE(row.wf) << "seed " << seed << " step " << row.step;
  }
}

TEST(Counters, PersistentRepeatsAreRealCostLinearInBits) {
  // Each repeat on 2^b - 1 costs b + 1 real steps.
  for (std::uint64_t bits : {3u, 5u, 8u}) {
    std::uint64_t ones = (std::uint64_t{1} << bits) - 1;
    ExperimentReport r = run_increment_experiment(CounterSpec::sequential_bankers, ones, Usage::parse("persistent:10"));
    for (std::size_t i = ones; i < r.rows.size(); ++i) EXPECT_EQ(r.rows[i].real_cost, bits + 1);
  }
}
