#pragma once

#include <optional>
#include <vector>

#include "amortlab/eval.hpp"

namespace amortlab::detail {

// One evaluator for every model. Rules shared by all models live in
// machine.cpp; the model-specific (save), (spend), (force), (lazy) and
// (pass) rules live in the eval_*.cpp files.
class Machine {
 public:
  struct Result {
    ValuePtr value;
    Cost cost;
  };

  Machine(const FuncEnv& env, Heap heap, Model model, const EvalOptions& opts);

  // Allocations start under `owner` instead of at the root.
  void start_under(const Pointer& owner);

  Result eval(const ExprPtr& e);
  EvalOutcome finish(Result r);

  Heap& heap() { return heap_; }

 private:
  Result eval_node(const ExprPtr& e);
  Result alloc(const ExprPtr& e, const HeapValue& hv);
  Result force(const ExprPtr& e, const ValuePtr& target);
  Result save(const ExprPtr& e, std::uint64_t amount, const ValuePtr& target);
  Result spend(const ExprPtr& e, std::uint64_t amount, const ValuePtr& target, const ExprPtr& body);
  Result pass(const ExprPtr& e, const ValuePtr& heir);

  // machine.cpp
  Result force_real(const ExprPtr& e, const Pointer& p, const Cell& cell);
  Result thunk_body(const Pointer& owner, const hv::Lazy& lazy);

  // eval_bankers.cpp
  Result save_bankers(const ExprPtr& e, const Pointer& p, std::uint64_t amount);
  Result spend_bankers(const ExprPtr& e, const Pointer& p, std::uint64_t amount, const ExprPtr& body);

  // eval_credit.cpp
  Result force_credit(const ExprPtr& e, const Pointer& p, const Cell& cell);
  Result save_credit(const ExprPtr& e, const Pointer& p, std::uint64_t amount);
  Result pass_inherit(const ExprPtr& e, const ValuePtr& heir);
  void inherit_save(const ExprPtr& e, Pointer target, std::uint64_t amount);

  // eval_debit.cpp
  Result lazy_debit(const ExprPtr& e, const hv::Lazy& lazy);
  Result force_debit(const ExprPtr& e, const Pointer& p, const Cell& cell);
  Result save_debit(const ExprPtr& e, const Pointer& p, std::uint64_t amount);

  Pointer fresh_pointer();
  Pointer insert_fresh(HeapValue hv, Annotation ann);
  // The pointer a value denotes, or stuck.
  Pointer pointer_of(const ExprPtr& e, const ValuePtr& v);
  const Cell& cell_of(const ExprPtr& e, const Pointer& p);
  const FuncDef& function(const ExprPtr& e, const std::string& name);

  [[noreturn]] void stuck(StuckKind kind, const ExprPtr& e, const std::string& detail);
  bool tracing() const { return opts_.trace; }
  TraceRow row(const char* rule, Cost delta, const ExprPtr& e) const;
  void emit(TraceRow r);

  struct AllocFrame {
    std::optional<Pointer> owner;
    std::uint32_t next = 0;
  };
  // Credit inheritance: the budget of the thunk currently being forced and
  // the heir its body designated.
  struct ThunkFrame {
    std::uint64_t budget = 0;
    std::optional<Pointer> heir;
  };

  const FuncEnv& env_;
  Heap heap_;
  Model model_;
  EvalOptions opts_;
  std::vector<AllocFrame> frames_;
  std::vector<ThunkFrame> thunks_;
  std::vector<TraceRow> trace_;
  CreditFlow flow_;
  std::uint64_t steps_ = 0;
  std::size_t depth_ = 0;
};

}  // namespace amortlab::detail
