#include "machine.hpp"

#include <cstdio>

#include "amortlab/parse.hpp"

namespace amortlab {

std::uint64_t Cost::total() const {
  std::uint64_t out = 0;
  if (__builtin_add_overflow(k, kprime, &out)) throw EvalError("step counter overflow");
  return out;
}

Cost operator+(Cost a, Cost b) {
  Cost out;
  if (__builtin_add_overflow(a.k, b.k, &out.k) || __builtin_add_overflow(a.kprime, b.kprime, &out.kprime)) {
    throw EvalError("step counter overflow");
  }
  return out;
}

std::string_view stuck_name(StuckKind kind) {
  switch (kind) {
    case StuckKind::case_on_non_sum: return "case-on-non-sum";
    case StuckKind::split_on_non_pair: return "split-on-non-pair";
    case StuckKind::unfold_on_non_fold: return "unfold-on-non-fold";
    case StuckKind::force_on_non_thunk: return "force-on-non-thunk";
    case StuckKind::app_on_non_lambda: return "app-on-non-lambda";
    case StuckKind::unbound_pointer: return "unbound-pointer";
    case StuckKind::unbound_function: return "unbound-function";
    case StuckKind::free_variable: return "free-variable";
    case StuckKind::not_a_pointer: return "not-a-pointer";
    case StuckKind::insufficient_credits: return "insufficient-credits";
    case StuckKind::debits_remaining: return "debits-remaining";
    case StuckKind::two_heirs: return "two-heirs";
    case StuckKind::pass_outside_thunk: return "pass-outside-thunk";
    case StuckKind::split_exceeds_cost: return "split-exceeds-cost";
    case StuckKind::no_rule: return "no-rule";
  }
  return "?";
}

StuckError::StuckError(StuckKind kind, ExprPtr expr, Heap heap, const std::string& detail)
    : std::runtime_error(std::string(stuck_name(kind)) + ": " + detail),
      kind_(kind),
      expr_(std::move(expr)),
      heap_(std::move(heap)) {}

namespace detail {

namespace {

std::string digest(const std::string& text) {
  std::uint64_t h = 14695981039346656037ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

const char* alloc_rule(const HeapValue& hv) {
  if (std::holds_alternative<hv::Fold>(hv)) return "fold";
  if (std::holds_alternative<hv::Memo>(hv)) return "memo";
  return "lazy";
}

}  // namespace

Machine::Machine(const FuncEnv& env, Heap heap, Model model, const EvalOptions& opts)
    : env_(env), heap_(std::move(heap)), model_(model), opts_(opts) {
  frames_.push_back(AllocFrame{});
}

void Machine::start_under(const Pointer& owner) { frames_.back() = AllocFrame{owner, 0}; }

EvalOutcome Machine::finish(Result r) {
  if (opts_.check_closed) check_closed(heap_);
  return EvalOutcome{r.cost, std::move(heap_), std::move(r.value), std::move(trace_), flow_};
}

void Machine::stuck(StuckKind kind, const ExprPtr& e, const std::string& detail) {
  // The machine is abandoned once stuck, so its heap can go with the error.
  throw StuckError(kind, e, std::move(heap_), detail);
}

TraceRow Machine::row(const char* rule, Cost delta, const ExprPtr& e) const {
  TraceRow r;
  r.rule = rule;
  r.cost_delta = static_cast<std::int64_t>(delta.k);
  r.expr_digest = digest(print(e));
  r.heap_size = heap_.size();
  if (is_debit(model_)) {
    r.k = delta.k;
    r.kprime = delta.kprime;
  }
  return r;
}

void Machine::emit(TraceRow r) { trace_.push_back(std::move(r)); }

Pointer Machine::fresh_pointer() {
  AllocFrame& f = frames_.back();
  if (f.owner) return f.owner->child(f.next++);
  return heap_.reserve_root();
}

Pointer Machine::insert_fresh(HeapValue hv, Annotation ann) {
  Pointer p = fresh_pointer();
  try {
    heap_.insert(p, Cell{std::move(hv), std::move(ann)});
  } catch (const HeapError& err) {
    throw EvalError(std::string("allocator clash: ") + err.what());
  }
  return p;
}

Pointer Machine::pointer_of(const ExprPtr& e, const ValuePtr& v) {
  if (const auto* p = v->as<val::Ptr>()) return p->ptr;
  if (const auto* x = v->as<val::Var>()) stuck(StuckKind::free_variable, e, "free variable " + x->name);
  stuck(StuckKind::not_a_pointer, e, "expected a pointer, got " + print(v));
}

const Cell& Machine::cell_of(const ExprPtr& e, const Pointer& p) {
  const Cell* cell = heap_.find(p);
  if (!cell) stuck(StuckKind::unbound_pointer, e, "pointer " + pointer_display(p) + " is not in the heap");
  return *cell;
}

const FuncDef& Machine::function(const ExprPtr& e, const std::string& name) {
  auto it = env_.find(name);
  if (it == env_.end()) stuck(StuckKind::unbound_function, e, "unknown function " + name);
  return it->second;
}

Machine::Result Machine::eval(const ExprPtr& e) {
  if (++depth_ > opts_.max_depth) throw EvalError("evaluation depth limit exceeded");
  if (opts_.fuel && ++steps_ > opts_.fuel) throw EvalError("fuel exhausted");
  Result r = eval_node(e);
  --depth_;
  return r;
}

Machine::Result Machine::eval_node(const ExprPtr& e) {
  if (const auto* x = e->as<ex::Return>()) {
    if (const auto* v = x->value->as<val::Var>()) stuck(StuckKind::free_variable, e, "free variable " + v->name);
    if (tracing()) emit(row("value", {}, e));
    return {x->value, {}};
  }
  if (const auto* x = e->as<ex::Alloc>()) return alloc(e, x->value);
  if (const auto* x = e->as<ex::Let>()) {
    Result first = eval(x->bound);
    Result second = eval(substitute(x->body, {{x->name, first.value}}));
    if (tracing()) emit(row("let", {}, e));
    return {second.value, first.cost + second.cost};
  }
  if (const auto* x = e->as<ex::Case>()) {
    if (const auto* l = x->scrutinee->as<val::Inl>()) {
      if (tracing()) emit(row("case-inl", {}, e));
      return eval(substitute(x->left, {{x->left_name, l->inner}}));
    }
    if (const auto* r = x->scrutinee->as<val::Inr>()) {
      if (tracing()) emit(row("case-inr", {}, e));
      return eval(substitute(x->right, {{x->right_name, r->inner}}));
    }
    stuck(StuckKind::case_on_non_sum, e, "case on " + print(x->scrutinee));
  }
  if (const auto* x = e->as<ex::Split>()) {
    const auto* p = x->pair->as<val::Pair>();
    if (!p) stuck(StuckKind::split_on_non_pair, e, "split on " + print(x->pair));
    if (tracing()) emit(row("split", {}, e));
    return eval(substitute(x->body, {{x->first, p->first}, {x->second, p->second}}));
  }
  if (const auto* x = e->as<ex::App>()) {
    const auto* lam = x->fn->as<val::Lam>();
    if (!lam) stuck(StuckKind::app_on_non_lambda, e, "application of " + print(x->fn));
    if (tracing()) emit(row("app", {1, 0}, e));
    Result r = eval(substitute(lam->body, {{lam->param, x->arg}}));
    return {r.value, Cost{1, 0} + r.cost};
  }
  if (const auto* x = e->as<ex::Call>()) {
    const FuncDef& f = function(e, x->fn);
    if (tracing()) emit(row("call", {1, 0}, e));
    Result r = eval(substitute(f.body, {{f.param, x->arg}}));
    return {r.value, Cost{1, 0} + r.cost};
  }
  if (const auto* x = e->as<ex::Unfold>()) {
    Pointer p = pointer_of(e, x->target);
    const Cell& cell = cell_of(e, p);
    const auto* fold = std::get_if<hv::Fold>(&cell.value);
    if (!fold) stuck(StuckKind::unfold_on_non_fold, e, "unfold of " + print(cell.value));
    if (tracing()) emit(row("unfold", {}, e));
    return {fold->value, {}};
  }
  if (const auto* x = e->as<ex::Force>()) return force(e, x->target);
  if (const auto* x = e->as<ex::Save>()) return save(e, x->amount, x->target);
  if (const auto* x = e->as<ex::Spend>()) return spend(e, x->amount, x->target, x->body);
  if (const auto* x = e->as<ex::Pass>()) return pass(e, x->heir);
  throw EvalError("unknown expression node");
}

Machine::Result Machine::alloc(const ExprPtr& e, const HeapValue& hv) {
  if (const auto* lazy = std::get_if<hv::Lazy>(&hv)) {
    function(e, lazy->fn);
    if (is_debit(model_)) return lazy_debit(e, *lazy);
  }
  std::vector<Pointer> inside;
  collect_pointers(hv, inside);
  for (const auto& p : inside) cell_of(e, p);
  Pointer p = insert_fresh(strip_split(hv), fresh_annotation(model_, hv));
  if (tracing()) emit(row(alloc_rule(hv), {}, e));
  return {build::ptr(p), {}};
}

Machine::Result Machine::force(const ExprPtr& e, const ValuePtr& target) {
  if (!target->as<val::Ptr>() && !target->as<val::Var>()) {
    stuck(StuckKind::force_on_non_thunk, e, "force of " + print(target));
  }
  Pointer p = pointer_of(e, target);
  const Cell& cell = cell_of(e, p);
  switch (model_) {
    case Model::real:
    case Model::bankers:
      return force_real(e, p, cell);
    case Model::credit:
    case Model::credit_inherit:
      return force_credit(e, p, cell);
    default:
      return force_debit(e, p, cell);
  }
}

Machine::Result Machine::thunk_body(const Pointer& owner, const hv::Lazy& lazy) {
  frames_.push_back(AllocFrame{owner, 0});
  Result r = eval(build::call(lazy.fn, lazy.arg));
  frames_.pop_back();
  return r;
}

Machine::Result Machine::force_real(const ExprPtr& e, const Pointer& p, const Cell& cell) {
  if (const auto* memo = std::get_if<hv::Memo>(&cell.value)) {
    if (tracing()) emit(row("recall", {}, e));
    return {memo->value, {}};
  }
  const auto* lazy = std::get_if<hv::Lazy>(&cell.value);
  if (!lazy) stuck(StuckKind::force_on_non_thunk, e, "force of " + print(cell.value));
  hv::Lazy thunk = *lazy;
  Annotation kept = cell.ann;
  heap_.remove(p);
  Result r = thunk_body(p, thunk);
  heap_.insert(p, Cell{hv::Memo{r.value}, kept});
  if (tracing()) {
    TraceRow t = row("force", {}, e);
    if (const auto* c = std::get_if<ann::Credits>(&kept)) t.credits = static_cast<std::int64_t>(c->n);
    emit(std::move(t));
  }
  return r;
}

Machine::Result Machine::save(const ExprPtr& e, std::uint64_t amount, const ValuePtr& target) {
  Pointer p = pointer_of(e, target);
  cell_of(e, p);
  switch (model_) {
    case Model::real:
      if (tracing()) emit(row("save", {}, e));
      return {target, {}};
    case Model::bankers:
      return save_bankers(e, p, amount);
    case Model::credit:
    case Model::credit_inherit:
      return save_credit(e, p, amount);
    default:
      return save_debit(e, p, amount);
  }
}

Machine::Result Machine::spend(const ExprPtr& e, std::uint64_t amount, const ValuePtr& target,
                               const ExprPtr& body) {
  Pointer p = pointer_of(e, target);
  cell_of(e, p);
  if (model_ == Model::real) {
    Result r = eval(body);
    if (tracing()) emit(row("spend", {}, e));
    return r;
  }
  if (model_ == Model::bankers) return spend_bankers(e, p, amount, body);
  stuck(StuckKind::no_rule, e, "spend has no rule under model " + std::string(model_name(model_)));
}

Machine::Result Machine::pass(const ExprPtr& e, const ValuePtr& heir) {
  if (model_ == Model::real) {
    cell_of(e, pointer_of(e, heir));
    if (tracing()) emit(row("pass", {}, e));
    return {heir, {}};
  }
  if (model_ == Model::credit_inherit) return pass_inherit(e, heir);
  stuck(StuckKind::no_rule, e, "pass has no rule under model " + std::string(model_name(model_)));
}

}  // namespace detail

EvalOutcome eval_real(const FuncEnv& env, Heap h, const ExprPtr& e, const EvalOptions& opts) {
  detail::Machine m(env, std::move(h), Model::real, opts);
  return m.finish(m.eval(e));
}

EvalOutcome evaluate(const FuncEnv& env, Heap h, const ExprPtr& e, Model model, const EvalOptions& opts) {
  switch (model) {
    case Model::real: return eval_real(env, std::move(h), e, opts);
    case Model::bankers: return eval_bankers(env, std::move(h), e, opts);
    case Model::credit: return eval_credit(env, std::move(h), e, CreditMode::passing, opts);
    case Model::credit_inherit: return eval_credit(env, std::move(h), e, CreditMode::inheritance, opts);
    case Model::debit: return eval_debit(env, std::move(h), e, DebitMode::plain, opts);
    case Model::debit_inherit: return eval_debit(env, std::move(h), e, DebitMode::inheritance, opts);
    case Model::debit_unsound: return eval_debit(env, std::move(h), e, DebitMode::unsound, opts);
  }
  throw EvalError("unknown model");
}

std::uint64_t real_cost_of_thunk(const FuncEnv& env, const Heap& h, const std::string& fn,
                                 const ValuePtr& arg, Model heap_model) {
  return eval_real(env, erase(h, heap_model), build::call(fn, arg)).cost.k;
}

Heap initial_heap(const Program& p, Model model) {
  Heap h;
  for (std::size_t i = 0; i < p.heap.size(); ++i) {
    const HeapEntry& entry = p.heap[i];
    std::vector<Pointer> inside;
    collect_pointers(entry.value, inside);
    for (const auto& q : inside) {
      if (!h.contains(q)) throw HeapError("heap entry " + entry.name + " mentions a later or unknown entry");
    }
    const auto* lazy = std::get_if<hv::Lazy>(&entry.value);
    if (is_debit(model) && lazy) {
      EvalOutcome out = evaluate(p.functions, std::move(h), build::lazy(lazy->fn, lazy->arg), model);
      h = std::move(out.heap);
      Pointer at = Pointer::root(static_cast<std::uint32_t>(i));
      const Cell* cell = h.find(at);
      auto record = std::get<ann::Debit>(cell->ann);
      record.debits = entry.count;
      h.update(at, Cell{cell->value, std::move(record)});
      continue;
    }
    Annotation a = ann::None{};
    if (model == Model::bankers || (is_credit(model) && lazy)) {
      if (entry.count < 0) throw HeapError("heap entry " + entry.name + " has negative credits");
      a = ann::Credits{static_cast<std::uint64_t>(entry.count)};
    }
    if (lazy && !p.functions.count(lazy->fn)) throw HeapError("heap entry " + entry.name + " names an unknown function");
    h = alloc(std::move(h), entry.value, a).first;
  }
  return h;
}

}  // namespace amortlab
