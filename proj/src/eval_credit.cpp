#include <set>

#include "amortlab/parse.hpp"
#include "machine.hpp"

namespace amortlab {

namespace detail {

Machine::Result Machine::force_credit(const ExprPtr& e, const Pointer& p, const Cell& cell) {
  if (const auto* memo = std::get_if<hv::Memo>(&cell.value)) {
    if (tracing()) emit(row("recall", {}, e));
    return {memo->value, {}};
  }
  const auto* lazy = std::get_if<hv::Lazy>(&cell.value);
  if (!lazy) stuck(StuckKind::force_on_non_thunk, e, "force of " + print(cell.value));
  hv::Lazy thunk = *lazy;
  const auto* c = std::get_if<ann::Credits>(&cell.ann);
  std::uint64_t budget = c ? c->n : 0;
  bool inherit = model_ == Model::credit_inherit;

  heap_.remove(p);
  if (inherit) thunks_.push_back(ThunkFrame{budget, std::nullopt});
  Result r = thunk_body(p, thunk);
  std::optional<Pointer> heir;
  if (inherit) {
    heir = thunks_.back().heir;
    thunks_.pop_back();
  }
  if (r.cost.k > budget) {
    stuck(StuckKind::insufficient_credits, e,
          "thunk body costs " + std::to_string(r.cost.k) + " but holds " + std::to_string(budget) + " credits");
  }
  std::uint64_t leftover = budget - r.cost.k;
  if (inherit) {
    if (heir) {
      inherit_save(e, *heir, leftover);
    } else if (leftover != 0) {
      stuck(StuckKind::insufficient_credits, e,
            "thunk body absorbs " + std::to_string(r.cost.k) + " of " + std::to_string(budget) +
                " credits and names no heir");
    }
  }
  flow_.consumed += budget;
  Annotation a = ann::None{};
  if (heir) a = ann::Heir{*heir};
  heap_.insert(p, Cell{hv::Memo{r.value}, a});
  if (tracing()) {
    TraceRow t = row("force", {}, e);
    t.credits_before = static_cast<std::int64_t>(budget);
    t.credits_after = 0;
    if (heir) t.heir = heir->str();
    emit(std::move(t));
  }
  return {r.value, {}};
}

void Machine::inherit_save(const ExprPtr& e, Pointer target, std::uint64_t amount) {
  std::set<Pointer> visited;
  while (true) {
    if (!visited.insert(target).second) throw EvalError("inheritance cycle through " + target.str());
    const Cell& cell = cell_of(e, target);
    if (std::holds_alternative<hv::Lazy>(cell.value)) {
      const auto* c = std::get_if<ann::Credits>(&cell.ann);
      std::uint64_t before = c ? c->n : 0;
      std::uint64_t after = 0;
      if (__builtin_add_overflow(before, amount, &after)) throw EvalError("credit overflow");
      heap_.update(target, Cell{cell.value, ann::Credits{after}});
      flow_.landed += amount;
      return;
    }
    if (std::holds_alternative<hv::Memo>(cell.value)) {
      const auto* h = std::get_if<ann::Heir>(&cell.ann);
      if (model_ == Model::credit_inherit && h) {
        target = h->heir;
        continue;
      }
      flow_.wasted += amount;
      return;
    }
    stuck(StuckKind::no_rule, e, "save onto a fold cell has no rule under model " + std::string(model_name(model_)));
  }
}

Machine::Result Machine::save_credit(const ExprPtr& e, const Pointer& p, std::uint64_t amount) {
  const Cell& cell = cell_of(e, p);
  std::int64_t before = 0;
  if (const auto* c = std::get_if<ann::Credits>(&cell.ann)) before = static_cast<std::int64_t>(c->n);
  const char* rule = std::holds_alternative<hv::Lazy>(cell.value) ? "save"
                     : std::holds_alternative<ann::Heir>(cell.ann) ? "inherit"
                                                                   : "waste";
  inherit_save(e, p, amount);
  if (tracing()) {
    TraceRow t = row(rule, {amount, 0}, e);
    t.credits_before = before;
    const Cell& now = *heap_.find(p);
    std::int64_t after = 0;
    if (const auto* c = std::get_if<ann::Credits>(&now.ann)) after = static_cast<std::int64_t>(c->n);
    t.credits_after = after;
    if (const auto* h = std::get_if<ann::Heir>(&now.ann)) t.heir = h->heir.str();
    emit(std::move(t));
  }
  return {build::ptr(p), {amount, 0}};
}

Machine::Result Machine::pass_inherit(const ExprPtr& e, const ValuePtr& heir) {
  if (thunks_.empty()) stuck(StuckKind::pass_outside_thunk, e, "pass outside a forced thunk body");
  Pointer p = pointer_of(e, heir);
  cell_of(e, p);
  ThunkFrame& frame = thunks_.back();
  if (frame.heir) stuck(StuckKind::two_heirs, e, "a second heir in one thunk body");
  frame.heir = p;
  if (tracing()) {
    TraceRow t = row("pass", {}, e);
    t.heir = p.str();
    emit(std::move(t));
  }
  return {heir, {}};
}

}  // namespace detail

EvalOutcome eval_credit(const FuncEnv& env, Heap h, const ExprPtr& e, CreditMode mode, const EvalOptions& opts) {
  detail::Machine m(env, std::move(h), mode == CreditMode::passing ? Model::credit : Model::credit_inherit, opts);
  return m.finish(m.eval(e));
}

}  // namespace amortlab
