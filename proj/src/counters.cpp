#include "amortlab/counters.hpp"

#include <random>
#include <set>
#include <sstream>
#include <stdexcept>

namespace amortlab {

using namespace build;

std::string_view counter_spec_name(CounterSpec s) {
  switch (s) {
    case CounterSpec::sequential_bankers: return "seq";
    case CounterSpec::credit_thunked: return "credit";
    case CounterSpec::debit_thunked: return "debit";
  }
  return "?";
}

std::optional<CounterSpec> parse_counter_spec(std::string_view name) {
  if (name == "seq") return CounterSpec::sequential_bankers;
  if (name == "credit") return CounterSpec::credit_thunked;
  if (name == "debit") return CounterSpec::debit_thunked;
  return std::nullopt;
}

Model counter_model(CounterSpec s) {
  switch (s) {
    case CounterSpec::sequential_bankers: return Model::bankers;
    case CounterSpec::credit_thunked: return Model::credit;
    case CounterSpec::debit_thunked: return Model::debit;
  }
  return Model::real;
}

namespace {

FuncEnv make_bankers_env() {
  ExprPtr body = let(
      "u", unfold(var("c")),
      case_of(var("u"), "e", let("r", fold(cons(one(), var("c"))), save(1, var("r"))), "p",
              split("n", "a", var("p"),
                    case_of(var("n"), "z", let("r", fold(cons(one(), var("a"))), save(1, var("r"))), "o",
                            spend(1, var("c"),
                                  let("r", call("incr", var("a")), fold(cons(zero(), var("r")))))))));
  return {{"incr", FuncDef{"c", body}}};
}

FuncEnv make_thunked_env(bool credit) {
  ExprPtr zero_case =
      let("s", save(1, var("a")), let("r", force(var("s")), fold(cons(one(), var("r")))));
  ExprPtr one_case = credit ? let("t", lazy("Incr", var("a")),
                                  let("s", save(1, var("t")), fold(cons(zero(), var("s")))))
                            : let("t", lazy("Incr", var("a")), fold(cons(zero(), var("t"))));
  ExprPtr body = let("u", unfold(var("c")),
                     case_of(var("u"), "e", fold(cons(one(), var("c"))), "p",
                             split("n", "a", var("p"), case_of(var("n"), "z", zero_case, "o", one_case))));
  return {{"Incr", FuncDef{"c", body}}};
}

bool is_unit_tag(const ValuePtr& v, bool right) {
  if (right) {
    const auto* r = v->as<val::Inr>();
    return r && r->inner->as<val::Unit>();
  }
  const auto* l = v->as<val::Inl>();
  return l && l->inner->as<val::Unit>();
}

// Splits a counter cell's folded value into End or Cons(bit, tail).
struct Node {
  bool end = false;
  bool one = false;
  Pointer tail;
};

std::optional<Node> read_node(const ValuePtr& v) {
  if (is_unit_tag(v, false)) return Node{true, false, {}};
  const auto* r = v->as<val::Inr>();
  if (!r) return std::nullopt;
  const auto* pair = r->inner->as<val::Pair>();
  if (!pair) return std::nullopt;
  const auto* tail = pair->second->as<val::Ptr>();
  if (!tail) return std::nullopt;
  if (is_unit_tag(pair->first, true)) return Node{false, true, tail->ptr};
  if (is_unit_tag(pair->first, false)) return Node{false, false, tail->ptr};
  return std::nullopt;
}

Pointer put(Heap& h, HeapValue hv, Annotation a) {
  auto [next, p] = alloc(std::move(h), std::move(hv), std::move(a));
  h = std::move(next);
  return p;
}

Pointer build_thunked(Heap& h, CounterSpec s, std::uint64_t v) {
  Annotation none = ann::None{};
  if (v == 0) return put(h, hv::Fold{end()}, none);
  if (v & 1) {
    Pointer rest = build_thunked(h, s, v >> 1);
    return put(h, hv::Fold{cons(one(), ptr(rest))}, none);
  }
  Pointer below = build_thunked(h, s, (v >> 1) - 1);
  Pointer thunk;
  if (s == CounterSpec::credit_thunked) {
    thunk = put(h, hv::Lazy{"Incr", ptr(below), std::nullopt}, ann::Credits{1});
  } else {
    EvalOutcome out = eval_debit(counter_functions(s), std::move(h), lazy("Incr", ptr(below)), DebitMode::plain);
    h = std::move(out.heap);
    thunk = out.value->as<val::Ptr>()->ptr;
  }
  return put(h, hv::Fold{cons(zero(), ptr(thunk))}, none);
}

}  // namespace

const FuncEnv& counter_functions(CounterSpec s) {
  static const FuncEnv bankers = make_bankers_env();
  static const FuncEnv credit = make_thunked_env(true);
  static const FuncEnv debit = make_thunked_env(false);
  switch (s) {
    case CounterSpec::sequential_bankers: return bankers;
    case CounterSpec::credit_thunked: return credit;
    case CounterSpec::debit_thunked: return debit;
  }
  return bankers;
}

std::string counter_source_file(CounterSpec s) {
  std::string dir = AMORTLAB_CORPUS_DIR;
  switch (s) {
    case CounterSpec::sequential_bankers: return dir + "/incr_bankers.aml";
    case CounterSpec::credit_thunked: return dir + "/incr_credit.aml";
    case CounterSpec::debit_thunked: return dir + "/incr_debit.aml";
  }
  return dir;
}

ExprPtr increment_op(CounterSpec s, const Pointer& c) {
  switch (s) {
    case CounterSpec::sequential_bankers:
      return call("incr", ptr(c));
    case CounterSpec::credit_thunked:
      return let("t", lazy("Incr", ptr(c)), let("s", save(2, var("t")), force(var("s"))));
    case CounterSpec::debit_thunked:
      return let("t", lazy("Incr", ptr(c)), let("s", save(1, var("t")), force(var("s"))));
  }
  return nullptr;
}

Pointer build_counter_into(Heap& h, CounterSpec s, std::uint64_t value) {
  if (value >= max_counter_value) throw std::invalid_argument("counter value must be below 2^48");
  if (s != CounterSpec::sequential_bankers) return build_thunked(h, s, value);
  std::vector<bool> bits;
  for (std::uint64_t v = value; v; v >>= 1) bits.push_back(v & 1);
  Pointer p = put(h, hv::Fold{end()}, ann::Credits{0});
  for (auto it = bits.rbegin(); it != bits.rend(); ++it) {
    p = put(h, hv::Fold{cons(*it ? one() : zero(), ptr(p))}, ann::Credits{*it ? 1u : 0u});
  }
  return p;
}

BuiltCounter build_counter(CounterSpec s, std::uint64_t value) {
  Heap h;
  Pointer root = build_counter_into(h, s, value);
  return {std::move(h), root};
}

bool counter_wf(const Heap& h, const Pointer& root, CounterSpec s, WfMode mode) {
  bool exact = mode == WfMode::exact;
  std::set<Pointer> seen;
  Pointer p = root;
  while (true) {
    if (!seen.insert(p).second) return false;
    const Cell* cell = h.find(p);
    if (!cell) return false;
    const auto* fold = std::get_if<hv::Fold>(&cell->value);
    if (!fold) return false;
    auto node = read_node(fold->value);
    if (!node) return false;

    if (s == CounterSpec::sequential_bankers) {
      const auto* c = std::get_if<ann::Credits>(&cell->ann);
      if (!c) return false;
      std::uint64_t want = (!node->end && node->one) ? 1 : 0;
      if (c->n != want) return false;
      if (node->end) return true;
      p = node->tail;
      continue;
    }

    if (!std::holds_alternative<ann::None>(cell->ann)) return false;
    if (node->end) return true;
    if (node->one) {
      p = node->tail;
      continue;
    }
    const Cell* thunk = h.find(node->tail);
    if (!thunk || !seen.insert(node->tail).second) return false;
    if (const auto* lazy = std::get_if<hv::Lazy>(&thunk->value)) {
      if (s != CounterSpec::credit_thunked || lazy->fn != "Incr") return false;
      const auto* c = std::get_if<ann::Credits>(&thunk->ann);
      if (!c || (exact ? c->n != 1 : c->n < 1)) return false;
      const auto* arg = lazy->arg->as<val::Ptr>();
      if (!arg) return false;
      p = arg->ptr;
      continue;
    }
    const auto* memo = std::get_if<hv::Memo>(&thunk->value);
    if (!memo) return false;
    const auto* next = memo->value->as<val::Ptr>();
    if (!next) return false;
    if (s == CounterSpec::debit_thunked) {
      if (const auto* d = std::get_if<ann::Debit>(&thunk->ann)) {
        if (d->fn != "Incr" || (exact ? d->debits != 1 : d->debits > 1)) return false;
      } else if (exact) {
        return false;
      }
    } else if (exact) {
      return false;
    }
    p = next->ptr;
  }
}

namespace {

std::optional<std::uint64_t> value_at(const Heap& h, const Pointer& p, int depth);

// A counter position: a fold cell, or a thunk standing for one.
std::optional<std::uint64_t> tail_value(const Heap& h, const Pointer& p, int depth) {
  if (depth > 200) return std::nullopt;
  const Cell* cell = h.find(p);
  if (!cell) return std::nullopt;
  if (const auto* lazy = std::get_if<hv::Lazy>(&cell->value)) {
    const auto* arg = lazy->arg->as<val::Ptr>();
    if (!arg) return std::nullopt;
    auto below = value_at(h, arg->ptr, depth + 1);
    if (!below) return std::nullopt;
    return *below + 1;
  }
  if (const auto* memo = std::get_if<hv::Memo>(&cell->value)) {
    const auto* next = memo->value->as<val::Ptr>();
    if (!next) return std::nullopt;
    return value_at(h, next->ptr, depth + 1);
  }
  return value_at(h, p, depth + 1);
}

std::optional<std::uint64_t> value_at(const Heap& h, const Pointer& p, int depth) {
  if (depth > 200) return std::nullopt;
  const Cell* cell = h.find(p);
  if (!cell) return std::nullopt;
  const auto* fold = std::get_if<hv::Fold>(&cell->value);
  if (!fold) return std::nullopt;
  auto node = read_node(fold->value);
  if (!node) return std::nullopt;
  if (node->end) return 0;
  auto rest = tail_value(h, node->tail, depth + 1);
  if (!rest || *rest >= max_counter_value) return std::nullopt;
  return (*rest << 1) | (node->one ? 1 : 0);
}

}  // namespace

std::optional<std::uint64_t> counter_value(const Heap& h, const Pointer& root) { return value_at(h, root, 0); }

Usage Usage::parse(std::string_view text) {
  Usage u;
  auto number = [](std::string_view digits) {
    if (digits.empty()) throw std::invalid_argument("missing number in usage");
    std::uint64_t out = 0;
    for (char c : digits) {
      if (c < '0' || c > '9') throw std::invalid_argument("bad number in usage");
      out = out * 10 + static_cast<std::uint64_t>(c - '0');
    }
    return out;
  };
  if (text == "sequential") return u;
  if (text.rfind("persistent:", 0) == 0) {
    u.kind = persistent_repeat;
    u.repeats = number(text.substr(11));
    return u;
  }
  if (text.rfind("random:", 0) == 0) {
    u.kind = random_versions;
    u.seed = number(text.substr(7));
    return u;
  }
  throw std::invalid_argument("usage must be sequential, persistent:M or random:SEED");
}

std::string Usage::str() const {
  switch (kind) {
    case sequential: return "sequential";
    case persistent_repeat: return "persistent:" + std::to_string(repeats);
    case random_versions: return "random:" + std::to_string(seed);
  }
  return "?";
}

std::string ExperimentReport::csv() const {
  std::ostringstream out;
  out << "step,model_cost,real_cost,phi,wf,stuck\n";
  for (const auto& r : rows) {
    out << r.step << ',';
    if (!r.stuck) out << r.model_cost.total();
    out << ',' << r.real_cost << ',' << r.phi << ',' << (r.wf ? 1 : 0) << ',' << (r.stuck ? 1 : 0) << '\n';
  }
  return out.str();
}

ExperimentReport run_increment_experiment(CounterSpec s, std::uint64_t n, Usage usage) {
  const FuncEnv& env = counter_functions(s);
  Model model = counter_model(s);
  ExperimentReport report;
  report.spec = s;
  report.usage = usage;

  BuiltCounter start = build_counter(s, 0);
  Heap model_heap = std::move(start.heap);
  Heap real_heap = erase(model_heap, model);
  std::vector<Pointer> versions{start.root};
  bool halted = false;
  std::mt19937_64 rng(usage.seed);

  std::uint64_t total_ops = n + (usage.kind == Usage::persistent_repeat ? usage.repeats : 0);
  for (std::uint64_t step = 0; step < total_ops; ++step) {
    std::size_t index = versions.size() - 1;
    if (usage.kind == Usage::random_versions) {
      index = std::uniform_int_distribution<std::size_t>(0, versions.size() - 1)(rng);
    } else if (usage.kind == Usage::persistent_repeat && step >= n) {
      index = static_cast<std::size_t>(n);
    }
    Pointer version = versions[index];
    ExprPtr op = increment_op(s, version);

    ExperimentRow row;
    row.step = step;
    row.version = index;
    std::optional<Pointer> produced;
    bool sequential = usage.kind == Usage::sequential || (usage.kind == Usage::persistent_repeat && step < n);
    if (halted) {
      row.stuck = true;
      row.stuck_reason = "halted";
    } else {
      // A stuck increment is undone through the journal rather than by
      // running on a copy.
      model_heap.begin_journal();
      try {
        EvalOutcome out = evaluate(env, std::move(model_heap), op, model);
        model_heap = std::move(out.heap);
        model_heap.commit_journal();
        row.model_cost = out.cost;
        produced = out.value->as<val::Ptr>()->ptr;
      } catch (StuckError& err) {
        model_heap = err.take_heap();
        model_heap.rollback_journal();
        row.stuck = true;
        row.stuck_reason = err.what();
        ++report.stuck_events;
        if (sequential) halted = true;
      }
    }

    // The real run never gets stuck. When the model run did, its result is
    // not kept as a version, so the extra real cells are unreachable.
    EvalOutcome real = eval_real(env, std::move(real_heap), op);
    real_heap = std::move(real.heap);
    row.real_cost = real.cost.k;
    if (!produced && halted) produced = real.value->as<val::Ptr>()->ptr;

    if (!halted) {
      row.phi = potential_signed(model_heap, model);
      if (!row.stuck) {
        WfMode mode = sequential ? WfMode::exact : WfMode::accessible;
        row.wf = counter_wf(model_heap, *produced, s, mode);
        row.value = counter_value(model_heap, *produced);
        report.total_model_cost = report.total_model_cost + row.model_cost;
      }
    }
    if (produced && (!row.stuck || halted)) versions.push_back(*produced);
    report.total_real_cost += row.real_cost;
    report.rows.push_back(std::move(row));
  }
  return report;
}

}  // namespace amortlab
