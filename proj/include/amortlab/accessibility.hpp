#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "amortlab/eval.hpp"
#include "amortlab/heap.hpp"
#include "amortlab/syntax.hpp"

namespace amortlab {

namespace act {
struct Alloc { HeapValue value; Annotation ann; };
struct Save { Pointer target; std::uint64_t amount = 0; };   // B, C, CI
struct Spend { Pointer target; std::uint64_t amount = 0; };  // B
struct Force { Pointer target; };                            // R, B, C, CI
struct Pay { Pointer target; std::uint64_t amount = 0; };    // debit models
struct Access { Pointer target; };                           // debit models
struct LazySpeculate {                                       // debit models
  std::string fn;
  ValuePtr arg;
  std::optional<std::uint64_t> split;
};
}  // namespace act

using AccessAction =
    std::variant<act::Alloc, act::Save, act::Spend, act::Force, act::Pay, act::Access, act::LazySpeculate>;

std::string describe(const AccessAction& a);

class IllegalAction : public std::runtime_error {
 public:
  IllegalAction(const std::string& msg, std::optional<StuckKind> kind = std::nullopt)
      : std::runtime_error(msg), kind_(kind) {}
  // Set when the action's evaluation got stuck.
  std::optional<StuckKind> kind() const { return kind_; }

 private:
  std::optional<StuckKind> kind_;
};

enum class ActionCheck {
  strict,
  // Also lets spend take credits off any cell that holds them, whatever the
  // model. Only negative tests use this.
  unchecked
};

// Applies the actions in order. Forces, saves, pays and speculations run
// through the model's evaluator at top level, so the result is accessible
// from `h` by construction. Throws IllegalAction.
Heap apply_actions(const FuncEnv& env, Heap h, const std::vector<AccessAction>& acts, Model model,
                   ActionCheck check = ActionCheck::strict);

struct RefinementEvidence {
  Pointer ptr;
  std::string relation;  // identical, credits, saved, forced, paid, accessed, fresh, or a violation
  bool ok = true;
  std::string detail;
};

struct RefinementReport {
  bool refines = true;
  std::vector<RefinementEvidence> evidence;

  // Empty when the heaps refine.
  std::string first_violation() const;
};

// Per-cell sufficient check that `large` is accessible from `small`.
RefinementReport check_refinement(const FuncEnv& env, const Heap& small, const Heap& large, Model model);

// Draws up to `count` legal actions for the model (40% alloc, 30% save or
// pay, 20% force or access, 10% spend or pay) and applies them to `h`.
// Forces under the credit models are topped up with just enough credits.
std::vector<AccessAction> random_actions(const FuncEnv& env, Heap& h, Model model, std::size_t count,
                                         std::mt19937_64& rng);

enum class TrialVerdict { pass, fail, skipped };

std::string_view trial_verdict_name(TrialVerdict v);

struct PersistenceVerdict {
  Model model = Model::real;
  std::uint64_t seed = 0;
  std::vector<AccessAction> actions;
  Cost n;
  std::optional<Cost> k;
  bool value_equal = false;
  bool refines = false;
  bool rerun_stuck = false;
  TrialVerdict verdict = TrialVerdict::skipped;
  std::string detail;
};

// Runs e from h (cost n, heap G'), extends h by random actions into D, runs
// e again from D (cost k, heap D'), and checks the value, the cost (k = n,
// or k <= n for the real and bankers models) and that D' refines G'.
// Skipped if the first run is stuck.
PersistenceVerdict persistence_trial(const FuncEnv& env, const Heap& h, const ExprPtr& e, Model model,
                                     std::size_t action_budget, std::uint64_t seed);

// Same with a fixed action sequence.
PersistenceVerdict persistence_trial_with(const FuncEnv& env, const Heap& h, const ExprPtr& e, Model model,
                                          const std::vector<AccessAction>& acts);

// {a -> fold unit with 5 credits}, main = spend 5 a unit: the bankers
// program whose re-run gets stuck once the credits are spent elsewhere.
struct BankersCounterexample {
  FuncEnv functions;
  Heap heap;
  ExprPtr main;
};
BankersCounterexample bankers_counterexample();

// Seed for which persistence_trial on the counterexample draws a draining
// spend.
constexpr std::uint64_t bankers_counterexample_seed = 21;
constexpr std::size_t bankers_counterexample_budget = 4;

}  // namespace amortlab
