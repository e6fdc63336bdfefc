#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "amortlab/heap.hpp"
#include "amortlab/syntax.hpp"

namespace amortlab {

// Unshared steps k and discharged debits k' (always 0 outside debit models).
struct Cost {
  std::uint64_t k = 0;
  std::uint64_t kprime = 0;

  std::uint64_t total() const;
  bool operator==(const Cost&) const = default;
};

// Throws EvalError on overflow.
Cost operator+(Cost a, Cost b);

enum class StuckKind {
  case_on_non_sum,
  split_on_non_pair,
  unfold_on_non_fold,
  force_on_non_thunk,
  app_on_non_lambda,
  unbound_pointer,
  unbound_function,
  free_variable,
  not_a_pointer,
  insufficient_credits,
  debits_remaining,
  two_heirs,
  pass_outside_thunk,
  split_exceeds_cost,
  no_rule,
};

std::string_view stuck_name(StuckKind kind);

// No rule applies. Carries the offending expression and the heap at the
// point of failure.
class StuckError : public std::runtime_error {
 public:
  StuckError(StuckKind kind, ExprPtr expr, Heap heap, const std::string& detail);
  StuckKind kind() const { return kind_; }
  const ExprPtr& expr() const { return expr_; }
  const Heap& heap() const { return heap_; }
  Heap take_heap() { return std::move(heap_); }

 private:
  StuckKind kind_;
  ExprPtr expr_;
  Heap heap_;
};

// Hard errors: arithmetic overflow, allocator clashes, corrupt records,
// inheritance cycles, violated internal side conditions, resource limits.
class EvalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct TraceRow {
  std::string rule;
  std::int64_t cost_delta = 0;
  std::string expr_digest;
  std::size_t heap_size = 0;
  std::optional<std::int64_t> credits;
  std::optional<std::int64_t> credits_before;
  std::optional<std::int64_t> credits_after;
  std::optional<std::string> heir;
  std::optional<std::int64_t> debits_before;
  std::optional<std::int64_t> debits_after;
  std::optional<std::uint64_t> k;
  std::optional<std::uint64_t> kprime;
};

// Credit movement in the credit models. On a non-stuck run
// potential(after) = potential(before) + landed - consumed.
struct CreditFlow {
  std::uint64_t landed = 0;    // saved onto lazy cells, including inherited saves
  std::uint64_t wasted = 0;    // saved onto heir-less memo cells
  std::uint64_t consumed = 0;  // taken off lazy cells by forcing them
};

struct EvalOptions {
  bool trace = false;
  // Scan the final heap for dangling pointers.
  bool check_closed = false;
  // Rule applications before EvalError; 0 means unlimited.
  std::uint64_t fuel = 0;
  std::size_t max_depth = 20000;
};

struct EvalOutcome {
  Cost cost;
  Heap heap;
  ValuePtr value;
  std::vector<TraceRow> trace;
  CreditFlow credits;
};

EvalOutcome eval_real(const FuncEnv& env, Heap h, const ExprPtr& e, const EvalOptions& opts = {});
EvalOutcome eval_bankers(const FuncEnv& env, Heap h, const ExprPtr& e, const EvalOptions& opts = {});

enum class CreditMode { passing, inheritance };
EvalOutcome eval_credit(const FuncEnv& env, Heap h, const ExprPtr& e, CreditMode mode,
                        const EvalOptions& opts = {});

enum class DebitMode { plain, inheritance, unsound };
EvalOutcome eval_debit(const FuncEnv& env, Heap h, const ExprPtr& e, DebitMode mode,
                       const EvalOptions& opts = {});

EvalOutcome evaluate(const FuncEnv& env, Heap h, const ExprPtr& e, Model model,
                     const EvalOptions& opts = {});

// k of a real run of `call fn arg` from erase(h).
std::uint64_t real_cost_of_thunk(const FuncEnv& env, const Heap& h, const std::string& fn,
                                 const ValuePtr& arg, Model heap_model = Model::real);

// Builds the model heap described by a program's (heap ...) block. Entries
// may only mention earlier entries. Under debit models a lazy entry is
// speculated into a record whose debit count is then set to the entry's
// count.
Heap initial_heap(const Program& p, Model model);

}  // namespace amortlab
