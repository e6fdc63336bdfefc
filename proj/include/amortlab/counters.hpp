#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "amortlab/eval.hpp"
#include "amortlab/heap.hpp"
#include "amortlab/syntax.hpp"

namespace amortlab {

enum class CounterSpec { sequential_bankers, credit_thunked, debit_thunked };

std::string_view counter_spec_name(CounterSpec s);
// Accepts "seq", "credit", "debit".
std::optional<CounterSpec> parse_counter_spec(std::string_view name);

Model counter_model(CounterSpec s);

// The built-in increment functions: `incr` for the sequential counter,
// `Incr` for the thunked ones.
const FuncEnv& counter_functions(CounterSpec s);
std::string counter_source_file(CounterSpec s);

// One increment of the counter at `c` as the client writes it:
//   seq     (call incr c)
//   credit  (force (save 2 (lazy Incr c)))
//   debit   (force (save 1 (lazy Incr c)))
ExprPtr increment_op(CounterSpec s, const Pointer& c);

constexpr std::uint64_t max_counter_value = std::uint64_t{1} << 48;

struct BuiltCounter {
  Heap heap;
  Pointer root;
};

// Throws std::invalid_argument if value >= 2^48.
BuiltCounter build_counter(CounterSpec s, std::uint64_t value);
// Adds the counter's cells to an existing heap of the spec's model.
Pointer build_counter_into(Heap& h, CounterSpec s, std::uint64_t value);

enum class WfMode {
  exact,      // the inductive predicate, annotations exactly as built
  accessible  // also admits cells a later evaluation may have forced or paid
};

bool counter_wf(const Heap& h, const Pointer& root, CounterSpec s, WfMode mode = WfMode::exact);

// The number a counter denotes; a pending Incr thunk counts as one more than
// its argument. Nullopt if the structure is not a counter.
std::optional<std::uint64_t> counter_value(const Heap& h, const Pointer& root);

struct Usage {
  enum Kind { sequential, persistent_repeat, random_versions };
  Kind kind = sequential;
  std::uint64_t repeats = 0;  // persistent_repeat
  std::uint64_t seed = 0;     // random_versions

  static Usage parse(std::string_view text);  // "sequential", "persistent:M", "random:SEED"
  std::string str() const;
};

struct ExperimentRow {
  std::uint64_t step = 0;
  std::uint64_t version = 0;  // index of the version the increment was applied to
  bool stuck = false;
  std::string stuck_reason;
  Cost model_cost;
  std::uint64_t real_cost = 0;
  std::int64_t phi = 0;
  bool wf = false;
  std::optional<std::uint64_t> value;
};

struct ExperimentReport {
  CounterSpec spec{};
  Usage usage;
  std::vector<ExperimentRow> rows;
  Cost total_model_cost;
  std::uint64_t total_real_cost = 0;
  std::uint64_t stuck_events = 0;

  std::string csv() const;
};

// sequential: n increments starting from End, each on the previous result.
// persistent_repeat(m): n sequential increments, then m increments all on
// the version they produced.
// random_versions(seed): n increments, each on a uniformly chosen earlier
// version (End included).
// Real costs come from a parallel run of the same operations under the real
// semantics. A stuck increment leaves the model heap unchanged; in
// sequential usage it also ends the model run.
ExperimentReport run_increment_experiment(CounterSpec s, std::uint64_t n, Usage usage);

}  // namespace amortlab
