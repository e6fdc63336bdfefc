#include "amortlab/accessibility.hpp"

#include <algorithm>
#include <functional>
#include <map>

#include "amortlab/parse.hpp"

namespace amortlab {

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

std::string action_name(const AccessAction& a) {
  return std::visit(overloaded{
                        [](const act::Alloc&) { return std::string("alloc"); },
                        [](const act::Save&) { return std::string("save"); },
                        [](const act::Spend&) { return std::string("spend"); },
                        [](const act::Force&) { return std::string("force"); },
                        [](const act::Pay&) { return std::string("pay"); },
                        [](const act::Access&) { return std::string("access"); },
                        [](const act::LazySpeculate&) { return std::string("lazy"); },
                    },
                    a);
}

bool legal_for(const AccessAction& a, Model m) {
  bool debit = is_debit(m);
  return std::visit(overloaded{
                        [&](const act::Alloc&) { return true; },
                        [&](const act::Save&) { return m == Model::bankers || is_credit(m); },
                        [&](const act::Spend&) { return m == Model::bankers; },
                        [&](const act::Force&) { return !debit; },
                        [&](const act::Pay&) { return debit; },
                        [&](const act::Access&) { return debit; },
                        [&](const act::LazySpeculate&) { return debit; },
                    },
                    a);
}

const Cell& target_cell(const Heap& h, const Pointer& p) {
  const Cell* c = h.find(p);
  if (!c) throw IllegalAction("no cell at " + pointer_display(p));
  return *c;
}

Heap run_action(const FuncEnv& env, const Heap& h, const ExprPtr& e, Model m) {
  try {
    return evaluate(env, h, e, m).heap;
  } catch (const StuckError& err) {
    throw IllegalAction(err.what(), err.kind());
  }
}

void check_alloc(const FuncEnv& env, const act::Alloc& a, Model m) {
  if (const auto* l = std::get_if<hv::Lazy>(&a.value)) {
    if (is_debit(m)) throw IllegalAction("debit heaps only gain thunks through speculation");
    if (!env.count(l->fn)) throw IllegalAction("unknown function " + l->fn);
  }
  bool credits = std::holds_alternative<ann::Credits>(a.ann);
  bool none = std::holds_alternative<ann::None>(a.ann);
  bool ok = m == Model::bankers                                      ? credits
            : is_credit(m) && std::holds_alternative<hv::Lazy>(a.value) ? credits
                                                                       : none;
  if (!ok) throw IllegalAction("annotation " + describe(a.ann) + " is not legal for a new cell under " +
                               std::string(model_name(m)));
}

Heap apply_one(const FuncEnv& env, Heap h, const AccessAction& a, Model m, ActionCheck check) {
  bool loose_spend = check == ActionCheck::unchecked && std::holds_alternative<act::Spend>(a);
  if (!legal_for(a, m) && !loose_spend) {
    throw IllegalAction(action_name(a) + " is not an accessibility step under " + std::string(model_name(m)));
  }
  return std::visit(
      overloaded{
          [&](const act::Alloc& x) -> Heap {
            check_alloc(env, x, m);
            try {
              return alloc(std::move(h), x.value, x.ann).first;
            } catch (const HeapError& err) {
              throw IllegalAction(err.what());
            }
          },
          [&](const act::Save& x) -> Heap {
            target_cell(h, x.target);
            return run_action(env, h, build::save(x.amount, build::ptr(x.target)), m);
          },
          [&](const act::Spend& x) -> Heap {
            const Cell& c = target_cell(h, x.target);
            const auto* cr = std::get_if<ann::Credits>(&c.ann);
            if (!cr || cr->n < x.amount) {
              throw IllegalAction("spend " + std::to_string(x.amount) + " from " + pointer_display(x.target) +
                                  " which holds " + std::to_string(cr ? cr->n : 0) + " credits");
            }
            h.update(x.target, Cell{c.value, ann::Credits{cr->n - x.amount}});
            return std::move(h);
          },
          [&](const act::Force& x) -> Heap {
            target_cell(h, x.target);
            return run_action(env, h, build::force(build::ptr(x.target)), m);
          },
          [&](const act::Pay& x) -> Heap {
            if (!std::holds_alternative<ann::Debit>(target_cell(h, x.target).ann)) {
              throw IllegalAction("pay onto " + pointer_display(x.target) + " which is not a debit record");
            }
            return run_action(env, h, build::save(x.amount, build::ptr(x.target)), m);
          },
          [&](const act::Access& x) -> Heap {
            target_cell(h, x.target);
            return run_action(env, h, build::force(build::ptr(x.target)), m);
          },
          [&](const act::LazySpeculate& x) -> Heap {
            if (!env.count(x.fn)) throw IllegalAction("unknown function " + x.fn);
            ExprPtr e = x.split ? build::lazy_split(*x.split, x.fn, x.arg) : build::lazy(x.fn, x.arg);
            return run_action(env, h, e, m);
          },
      },
      a);
}

std::uint64_t credits_of(const Cell& c) {
  const auto* cr = std::get_if<ann::Credits>(&c.ann);
  return cr ? cr->n : 0;
}

}  // namespace

std::string describe(const AccessAction& a) {
  return std::visit(
      overloaded{
          [](const act::Alloc& x) { return "alloc(" + print(x.value) + ", " + describe(x.ann) + ")"; },
          [](const act::Save& x) {
            return "save(" + pointer_display(x.target) + ", " + std::to_string(x.amount) + ")";
          },
          [](const act::Spend& x) {
            return "spend(" + pointer_display(x.target) + ", " + std::to_string(x.amount) + ")";
          },
          [](const act::Force& x) { return "force(" + pointer_display(x.target) + ")"; },
          [](const act::Pay& x) {
            return "pay(" + pointer_display(x.target) + ", " + std::to_string(x.amount) + ")";
          },
          [](const act::Access& x) { return "access(" + pointer_display(x.target) + ")"; },
          [](const act::LazySpeculate& x) {
            std::string s = "lazy(" + x.fn + ", " + print(x.arg);
            if (x.split) s += ", " + std::to_string(*x.split);
            return s + ")";
          },
      },
      a);
}

Heap apply_actions(const FuncEnv& env, Heap h, const std::vector<AccessAction>& acts, Model model,
                   ActionCheck check) {
  for (const auto& a : acts) h = apply_one(env, std::move(h), a, model, check);
  return h;
}

std::string RefinementReport::first_violation() const {
  for (const auto& e : evidence) {
    if (!e.ok) return pointer_display(e.ptr) + ": " + e.relation + (e.detail.empty() ? "" : " (" + e.detail + ")");
  }
  return {};
}

RefinementReport check_refinement(const FuncEnv& env, const Heap& small, const Heap& large, Model model) {
  RefinementReport r;
  auto add = [&](const Pointer& p, std::string rel, bool ok, std::string detail = {}) {
    if (!ok) r.refines = false;
    r.evidence.push_back({p, std::move(rel), ok, std::move(detail)});
  };

  std::optional<Heap> erased;
  auto forced_value = [&](const Pointer& p) -> ValuePtr {
    if (!erased) erased = erase(small, model);
    try {
      return eval_real(env, *erased, build::force(build::ptr(p))).value;
    } catch (const StuckError&) {
      return nullptr;
    }
  };

  auto compare = [&](const Pointer& p, const Cell& s, const Cell& l) {
    if (equal(s, l)) return add(p, "identical", true);
    if (equal(s.value, l.value)) {
      if (model == Model::bankers && std::holds_alternative<ann::Credits>(s.ann) &&
          std::holds_alternative<ann::Credits>(l.ann)) {
        return add(p, "credits", true);
      }
      if (is_credit(model) && std::holds_alternative<hv::Lazy>(s.value) &&
          std::holds_alternative<ann::Credits>(l.ann)) {
        bool ok = credits_of(s) <= credits_of(l);
        return add(p, ok ? "saved" : "credits decreased", ok,
                   std::to_string(credits_of(s)) + " -> " + std::to_string(credits_of(l)));
      }
      if (is_debit(model)) {
        const auto* ds = std::get_if<ann::Debit>(&s.ann);
        if (ds && std::holds_alternative<ann::None>(l.ann)) return add(p, "accessed", true);
        const auto* dl = std::get_if<ann::Debit>(&l.ann);
        if (ds && dl) {
          bool same_record = ds->fn == dl->fn && equal(ds->arg, dl->arg) && ds->allocs == dl->allocs;
          bool ok = same_record && dl->debits <= ds->debits && dl->kreal <= ds->kreal;
          return add(p, ok ? "paid" : "debit record changed", ok,
                     std::to_string(ds->debits) + " -> " + std::to_string(dl->debits));
        }
      }
      return add(p, "annotation changed", false, describe(s.ann) + " -> " + describe(l.ann));
    }
    const auto* lazy = std::get_if<hv::Lazy>(&s.value);
    const auto* memo = std::get_if<hv::Memo>(&l.value);
    if (lazy && memo && !is_debit(model)) {
      bool ann_ok = model == Model::bankers ? std::holds_alternative<ann::Credits>(l.ann)
                    : model == Model::credit_inherit
                        ? std::holds_alternative<ann::None>(l.ann) || std::holds_alternative<ann::Heir>(l.ann)
                        : std::holds_alternative<ann::None>(l.ann);
      ValuePtr w = forced_value(p);
      bool ok = ann_ok && w && equal(w, memo->value);
      return add(p, ok ? "forced" : "memo differs from the forced value", ok);
    }
    add(p, "cell changed", false, print(s.value) + " -> " + print(l.value));
  };

  small.for_each([&](const Pointer& p, const Cell& s) {
    const Cell* l = large.find(p);
    if (!l) return add(p, "missing", false);
    compare(p, s, *l);
  });

  std::map<Pointer, bool> fresh;
  std::function<bool(const Pointer&)> legal_extra = [&](const Pointer& p) -> bool {
    if (auto it = fresh.find(p); it != fresh.end()) return it->second;
    bool ok = false;
    if (p.is_root()) {
      ok = p.last() >= small.next_root();
    } else {
      Pointer q = p.parent();
      if (const Cell* c = small.find(q)) {
        ok = !is_debit(model) && std::holds_alternative<hv::Lazy>(c->value);
      } else if (large.contains(q)) {
        ok = legal_extra(q);
      }
    }
    fresh[p] = ok;
    return ok;
  };
  large.for_each([&](const Pointer& p, const Cell&) {
    if (small.contains(p)) return;
    bool ok = legal_extra(p);
    add(p, ok ? "fresh" : "not a fresh allocation", ok);
  });
  return r;
}

std::vector<AccessAction> random_actions(const FuncEnv& env, Heap& h, Model model, std::size_t count,
                                         std::mt19937_64& rng) {
  auto below = [&](std::uint64_t n) -> std::uint64_t { return n == 0 ? 0 : rng() % n; };
  bool debit = is_debit(model);
  std::vector<AccessAction> out;

  auto cells = [&](auto pred) {
    std::vector<Pointer> ps;
    h.for_each([&](const Pointer& p, const Cell& c) {
      if (pred(c)) ps.push_back(p);
    });
    return ps;
  };
  auto any_cell = [](const Cell&) { return true; };
  auto lazy_cell = [](const Cell& c) { return std::holds_alternative<hv::Lazy>(c.value); };
  auto record = [](const Cell& c) { return std::holds_alternative<ann::Debit>(c.ann); };
  auto thunk_cell = [](const Cell& c) { return !std::holds_alternative<hv::Fold>(c.value); };
  auto credited = [](const Cell& c) { return credits_of(c) > 0; };

  auto fresh_credits = [&](const HeapValue& v) -> Annotation {
    Annotation a = fresh_annotation(model, v);
    if (std::holds_alternative<ann::Credits>(a)) a = ann::Credits{below(4)};
    return a;
  };

  auto make_alloc = [&]() -> std::vector<AccessAction> {
    std::vector<std::pair<std::string, ValuePtr>> thunks;
    // Under the debit models an argument may point into an unaccessed
    // speculation; a program could not hold such a value, so skip it.
    std::optional<Heap> visible;
    if (debit) visible = erase(h, model);
    auto usable = [&](const ValuePtr& arg) {
      if (!visible) return true;
      std::vector<Pointer> ps;
      collect_pointers(arg, ps);
      return std::all_of(ps.begin(), ps.end(), [&](const Pointer& q) { return visible->contains(q); });
    };
    h.for_each([&](const Pointer&, const Cell& c) {
      if (const auto* l = std::get_if<hv::Lazy>(&c.value)) thunks.emplace_back(l->fn, l->arg);
      if (const auto* d = std::get_if<ann::Debit>(&c.ann)) {
        if (usable(d->arg)) thunks.emplace_back(d->fn, d->arg);
      }
    });
    if (!thunks.empty() && below(2) == 0) {
      auto& [fn, arg] = thunks[below(thunks.size())];
      if (debit) {
        std::optional<std::uint64_t> split;
        if (model == Model::debit_inherit) split = 0;
        return {act::LazySpeculate{fn, arg, split}};
      }
      HeapValue v = hv::Lazy{fn, arg, std::nullopt};
      return {act::Alloc{v, fresh_credits(v)}};
    }
    HeapValue v = below(2) == 0 ? HeapValue{hv::Fold{build::unit()}} : HeapValue{hv::Memo{build::unit()}};
    return {act::Alloc{v, fresh_credits(v)}};
  };

  auto pick = [&](const std::vector<Pointer>& ps) { return ps[below(ps.size())]; };

  for (std::size_t attempt = 0; out.size() < count && attempt < count * 4 + 4; ++attempt) {
    std::uint64_t roll = below(100);
    std::vector<AccessAction> cand;
    if (roll < 40) {
      cand = make_alloc();
    } else if (roll < 70) {
      if (model == Model::bankers) {
        if (auto ps = cells(any_cell); !ps.empty()) cand = {act::Save{pick(ps), 1 + below(4)}};
      } else if (is_credit(model)) {
        if (auto ps = cells(thunk_cell); !ps.empty()) cand = {act::Save{pick(ps), 1 + below(4)}};
      } else if (debit) {
        if (auto ps = cells(record); !ps.empty()) cand = {act::Pay{pick(ps), 1 + below(3)}};
      }
    } else if (roll < 90) {
      if (debit) {
        if (auto ps = cells(record); !ps.empty()) {
          Pointer p = pick(ps);
          std::int64_t d = std::get<ann::Debit>(h.find(p)->ann).debits;
          if (d > 0) cand.push_back(act::Pay{p, static_cast<std::uint64_t>(d)});
          cand.push_back(act::Access{p});
        }
      } else if (auto ps = cells(lazy_cell); !ps.empty()) {
        Pointer p = pick(ps);
        if (!is_credit(model)) {
          cand = {act::Force{p}};
        } else {
          // Top the thunk up one credit at a time until its force goes through.
          for (std::uint64_t extra = 0; extra <= 48; ++extra) {
            std::vector<AccessAction> trial;
            if (extra > 0) trial.push_back(act::Save{p, extra});
            trial.push_back(act::Force{p});
            try {
              Heap next = apply_actions(env, h, trial, model);
              h = std::move(next);
              out.insert(out.end(), trial.begin(), trial.end());
              break;
            } catch (const IllegalAction& err) {
              if (err.kind() != StuckKind::insufficient_credits) break;
            }
          }
          continue;
        }
      }
    } else {
      if (model == Model::bankers) {
        if (auto ps = cells(credited); !ps.empty()) {
          Pointer p = pick(ps);
          std::uint64_t n = credits_of(*h.find(p));
          cand = {act::Spend{p, below(2) == 0 ? n : 1 + below(n)}};
        }
      } else if (debit) {
        if (auto ps = cells(record); !ps.empty()) cand = {act::Pay{pick(ps), 1 + below(3)}};
      } else {
        cand = make_alloc();
      }
    }
    if (cand.empty()) continue;
    try {
      Heap next = apply_actions(env, h, cand, model);
      h = std::move(next);
      out.insert(out.end(), cand.begin(), cand.end());
    } catch (const IllegalAction&) {
    }
  }
  return out;
}

std::string_view trial_verdict_name(TrialVerdict v) {
  switch (v) {
    case TrialVerdict::pass: return "PASS";
    case TrialVerdict::fail: return "FAIL";
    case TrialVerdict::skipped: return "SKIPPED";
  }
  return "?";
}

namespace {

PersistenceVerdict finish_trial(const FuncEnv& env, const Heap& h, const ExprPtr& e, Model model,
                                const EvalOutcome& first, const Heap& delta, PersistenceVerdict v) {
  v.n = first.cost;
  Heap start = delta;
  start.set_next_root(h.next_root());
  EvalOutcome second;
  try {
    second = evaluate(env, start, e, model);
  } catch (const StuckError& err) {
    v.rerun_stuck = true;
    v.verdict = TrialVerdict::fail;
    v.detail = std::string("re-run stuck: ") + err.what();
    return v;
  }
  v.k = second.cost;
  v.value_equal = equal(first.value, second.value);
  Heap after = std::move(second.heap);
  after.set_next_root(std::max(after.next_root(), delta.next_root()));
  RefinementReport rep = check_refinement(env, first.heap, after, model);
  v.refines = rep.refines;

  // Uniform persistence (k = n) is only claimed for the credit and debit
  // models; the real and bankers semantics get cheaper after forces.
  bool bound_only = model == Model::real || model == Model::bankers;
  bool cost_ok = bound_only ? v.k->total() <= v.n.total() : *v.k == v.n;
  v.verdict = cost_ok && v.value_equal && v.refines ? TrialVerdict::pass : TrialVerdict::fail;
  if (!v.value_equal) {
    v.detail = "values differ";
  } else if (!cost_ok) {
    v.detail = "re-run cost differs";
  } else if (!v.refines) {
    v.detail = "no refinement: " + rep.first_violation();
  } else if (v.k->total() < v.n.total()) {
    v.detail = "re-run cheaper";
  }
  return v;
}

}  // namespace

PersistenceVerdict persistence_trial(const FuncEnv& env, const Heap& h, const ExprPtr& e, Model model,
                                     std::size_t action_budget, std::uint64_t seed) {
  PersistenceVerdict v;
  v.model = model;
  v.seed = seed;
  EvalOutcome first;
  try {
    first = evaluate(env, h, e, model);
  } catch (const StuckError& err) {
    v.detail = std::string("original run stuck: ") + err.what();
    return v;
  }
  std::mt19937_64 rng(seed);
  Heap delta = h;
  delta.set_next_root(std::max(h.next_root(), first.heap.next_root()));
  std::size_t count = rng() % (action_budget + 1);
  v.actions = random_actions(env, delta, model, count, rng);
  return finish_trial(env, h, e, model, first, delta, std::move(v));
}

PersistenceVerdict persistence_trial_with(const FuncEnv& env, const Heap& h, const ExprPtr& e, Model model,
                                          const std::vector<AccessAction>& acts) {
  PersistenceVerdict v;
  v.model = model;
  v.actions = acts;
  EvalOutcome first;
  try {
    first = evaluate(env, h, e, model);
  } catch (const StuckError& err) {
    v.detail = std::string("original run stuck: ") + err.what();
    return v;
  }
  Heap delta = h;
  delta.set_next_root(std::max(h.next_root(), first.heap.next_root()));
  delta = apply_actions(env, std::move(delta), acts, model);
  return finish_trial(env, h, e, model, first, delta, std::move(v));
}

BankersCounterexample bankers_counterexample() {
  BankersCounterexample c;
  auto [h, a] = alloc(Heap{}, hv::Fold{build::unit()}, ann::Credits{5});
  c.heap = std::move(h);
  c.main = build::spend(5, build::ptr(a), build::ret(build::unit()));
  return c;
}

}  // namespace amortlab
