#include <limits>

#include "amortlab/parse.hpp"
#include "machine.hpp"

namespace amortlab {

namespace detail {

Machine::Result Machine::lazy_debit(const ExprPtr& e, const hv::Lazy& lazy) {
  std::vector<Pointer> inside;
  collect_pointers(lazy.arg, inside);
  for (const auto& q : inside) cell_of(e, q);

  Heap erased_before = erase(heap_, model_);
  Pointer a = fresh_pointer();
  if (heap_.contains(a)) throw EvalError("allocator clash at " + a.str());

  std::uint64_t mark = heap_.watermark();
  Result inner = thunk_body(a, lazy);
  std::vector<Pointer> allocs = heap_.inserted_since(mark);
  for (const auto& q : allocs) {
    if (!q.is_under(a)) throw EvalError("speculation of " + a.str() + " allocated outside its namespace: " + q.str());
  }

  EvalOptions real_opts = opts_;
  real_opts.trace = false;
  real_opts.check_closed = false;
  Machine real(env_, std::move(erased_before), Model::real, real_opts);
  real.start_under(a);
  Result actual;
  try {
    actual = real.eval(build::call(lazy.fn, lazy.arg));
  } catch (const StuckError& err) {
    throw EvalError(std::string("real run of a speculated thunk is stuck: ") + err.what());
  }
  if (!equal(actual.value, inner.value)) {
    throw EvalError("speculation of " + a.str() + " disagrees with the real run: " + print(inner.value) +
                    " vs " + print(actual.value));
  }
  std::uint64_t kreal = actual.cost.k;

  std::uint64_t debit = 0;
  Cost reported;
  switch (model_) {
    case Model::debit_inherit: {
      std::uint64_t k1 = lazy.split.value_or(0);
      if (k1 > inner.cost.k) {
        stuck(StuckKind::split_exceeds_cost, e,
              "lazy! reports " + std::to_string(k1) + " of an unshared cost of " + std::to_string(inner.cost.k));
      }
      debit = inner.cost.k - k1;
      std::uint64_t bound = kreal;
      for (const auto& q : allocs) {
        if (const auto* d = std::get_if<ann::Debit>(&heap_.find(q)->ann)) bound += d->kreal;
      }
      if (debit > bound) {
        throw EvalError("debit " + std::to_string(debit) + " exceeds the real-cost bound " + std::to_string(bound));
      }
      reported = Cost{k1, inner.cost.kprime};
      break;
    }
    case Model::debit_unsound:
      debit = inner.cost.total();
      reported = Cost{};
      break;
    default:
      debit = inner.cost.k;
      if (debit > kreal) {
        throw EvalError("debit " + std::to_string(debit) + " exceeds the real cost " + std::to_string(kreal));
      }
      reported = Cost{0, inner.cost.kprime};
      break;
  }
  if (debit > static_cast<std::uint64_t>(std::numeric_limits<std::int64_t>::max())) {
    throw EvalError("debit overflow");
  }

  heap_.insert(a, Cell{hv::Memo{inner.value},
                       ann::Debit{static_cast<std::int64_t>(debit), lazy.fn, lazy.arg, allocs, kreal}});
  if (tracing()) {
    TraceRow t = row("lazy", reported, e);
    t.debits_after = static_cast<std::int64_t>(debit);
    emit(std::move(t));
  }
  return {build::ptr(a), reported};
}

Machine::Result Machine::force_debit(const ExprPtr& e, const Pointer& p, const Cell& cell) {
  const auto* memo = std::get_if<hv::Memo>(&cell.value);
  if (!memo) {
    if (std::holds_alternative<hv::Lazy>(cell.value)) {
      stuck(StuckKind::no_rule, e, "lazy cell " + pointer_display(p) + " in a debit heap");
    }
    stuck(StuckKind::force_on_non_thunk, e, "force of " + print(cell.value));
  }
  ValuePtr value = memo->value;
  if (const auto* d = std::get_if<ann::Debit>(&cell.ann)) {
    std::int64_t before = d->debits;
    if (before > 0) {
      stuck(StuckKind::debits_remaining, e,
            pointer_display(p) + " still carries " + std::to_string(before) + " debits");
    }
    heap_.update(p, Cell{hv::Memo{value}, ann::None{}});
    if (tracing()) {
      TraceRow t = row("force", {}, e);
      t.debits_before = before;
      emit(std::move(t));
    }
    return {value, {}};
  }
  if (tracing()) emit(row("recall", {}, e));
  return {value, {}};
}

Machine::Result Machine::save_debit(const ExprPtr& e, const Pointer& p, std::uint64_t amount) {
  const Cell& cell = cell_of(e, p);
  if (!std::holds_alternative<hv::Memo>(cell.value)) {
    stuck(StuckKind::no_rule, e, "save onto a non-memo cell has no rule under model " + std::string(model_name(model_)));
  }
  Cost cost{0, amount};
  if (const auto* d = std::get_if<ann::Debit>(&cell.ann)) {
    ann::Debit record = *d;
    std::int64_t before = record.debits;
    if (amount > static_cast<std::uint64_t>(std::numeric_limits<std::int64_t>::max()) ||
        __builtin_sub_overflow(before, static_cast<std::int64_t>(amount), &record.debits)) {
      throw EvalError("debit underflow");
    }
    std::int64_t after = record.debits;
    heap_.update(p, Cell{cell.value, std::move(record)});
    if (tracing()) {
      TraceRow t = row("save", cost, e);
      t.debits_before = before;
      t.debits_after = after;
      emit(std::move(t));
    }
  } else if (tracing()) {
    emit(row("waste", cost, e));
  }
  return {build::ptr(p), cost};
}

}  // namespace detail

EvalOutcome eval_debit(const FuncEnv& env, Heap h, const ExprPtr& e, DebitMode mode, const EvalOptions& opts) {
  Model model = mode == DebitMode::plain         ? Model::debit
                : mode == DebitMode::inheritance ? Model::debit_inherit
                                                 : Model::debit_unsound;
  detail::Machine m(env, std::move(h), model, opts);
  return m.finish(m.eval(e));
}

}  // namespace amortlab
