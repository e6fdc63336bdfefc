#include "machine.hpp"

namespace amortlab {

namespace detail {

namespace {

std::uint64_t credits_in(const Cell& cell) {
  const auto* c = std::get_if<ann::Credits>(&cell.ann);
  return c ? c->n : 0;
}

}  // namespace

Machine::Result Machine::save_bankers(const ExprPtr& e, const Pointer& p, std::uint64_t amount) {
  const Cell& cell = cell_of(e, p);
  std::uint64_t before = credits_in(cell);
  std::uint64_t after = 0;
  if (__builtin_add_overflow(before, amount, &after)) throw EvalError("credit overflow");
  heap_.update(p, Cell{cell.value, ann::Credits{after}});
  if (tracing()) {
    TraceRow t = row("save", {amount, 0}, e);
    t.credits = static_cast<std::int64_t>(after);
    emit(std::move(t));
  }
  return {build::ptr(p), {amount, 0}};
}

Machine::Result Machine::spend_bankers(const ExprPtr& e, const Pointer& p, std::uint64_t amount,
                                       const ExprPtr& body) {
  const Cell& cell = cell_of(e, p);
  std::uint64_t have = credits_in(cell);
  if (have < amount) {
    stuck(StuckKind::insufficient_credits, e,
          "spend " + std::to_string(amount) + " but the cell holds " + std::to_string(have));
  }
  heap_.update(p, Cell{cell.value, ann::Credits{have - amount}});
  Result r = eval(body);
  std::uint64_t reported = r.cost.k > amount ? r.cost.k - amount : 0;
  if (tracing()) {
    TraceRow t = row("spend", {}, e);
    t.cost_delta = static_cast<std::int64_t>(reported) - static_cast<std::int64_t>(r.cost.k);
    t.credits = static_cast<std::int64_t>(have - amount);
    emit(std::move(t));
  }
  return {r.value, Cost{reported, 0}};
}

}  // namespace detail

EvalOutcome eval_bankers(const FuncEnv& env, Heap h, const ExprPtr& e, const EvalOptions& opts) {
  detail::Machine m(env, std::move(h), Model::bankers, opts);
  return m.finish(m.eval(e));
}

}  // namespace amortlab
