#include "amortlab/random_program.hpp"

#include <functional>
#include <memory>
#include <optional>
#include <random>

namespace amortlab {

namespace {

struct Type;
using TypeP = std::shared_ptr<const Type>;

struct Type {
  enum Kind { unit, sum, pair, ref, thunk } kind = unit;
  TypeP a, b;
  int fn = -1;  // thunk: index of the suspended function, -1 for a plain memo
};

TypeP mk(Type::Kind k, TypeP a = nullptr, TypeP b = nullptr, int fn = -1) {
  return std::make_shared<const Type>(Type{k, std::move(a), std::move(b), fn});
}

bool same(const TypeP& x, const TypeP& y) {
  if (x->kind != y->kind || x->fn != y->fn) return false;
  if (x->a && !same(x->a, y->a)) return false;
  if (x->b && !same(x->b, y->b)) return false;
  return true;
}

bool is_pointer(const TypeP& t) { return t->kind == Type::ref || t->kind == Type::thunk; }

struct Bnd {
  std::uint64_t lo = 0;
  std::uint64_t hi = 0;
};

Bnd operator+(Bnd x, Bnd y) { return {x.lo + y.lo, x.hi + y.hi}; }
Bnd join(Bnd x, Bnd y) { return {std::min(x.lo, y.lo), std::max(x.hi, y.hi)}; }

struct Sig {
  std::string name;
  bool thunk = false;
  TypeP param;
  TypeP result;
  Bnd body;  // bound of the body alone; a call adds one step
  bool done = false;
};

struct Var {
  std::string name;
  TypeP type;
  std::int64_t prefund = -1;  // bankers: credits known to sit on the cell
  bool local = false;         // bound directly to a cell allocated in this body
};
using Scope = std::vector<Var>;

struct Gen {
  ExprPtr e;
  Bnd b;
  bool fresh = false;
};

Scope without_prefunds(Scope s) {
  for (auto& v : s) v.prefund = -1;
  return s;
}

class Generator {
 public:
  Generator(Model m, std::uint64_t seed, const GeneratorOptions& o) : model_(m), rng_(seed), opts_(o) {}

  GeneratedProgram run() {
    int n = opts_.min_functions + static_cast<int>(below(opts_.max_functions - opts_.min_functions + 1));
    sigs_.resize(n);
    for (int i = n - 1; i >= 0; --i) {
      Sig& s = sigs_[i];
      s.thunk = chance(0.5);
      s.name = (s.thunk ? "T" : "f") + std::to_string(i);
      s.param = random_type(1, i + 1);
      s.result = random_type(1, i + 1);
    }
    GeneratedProgram out;
    for (int i = n - 1; i >= 0; --i) {
      cur_ = i;
      Sig& s = sigs_[i];
      Scope scope{{"p", s.param, -1, false}};
      Gen body = gen(s.result, scope, opts_.max_depth);
      ExprPtr e = body.e;
      if (model_ == Model::credit_inherit && s.thunk) e = with_pass(e, scope);
      s.body = body.b;
      s.done = true;
      out.functions[s.name] = FuncDef{"p", e};
    }
    cur_ = -1;
    build_setup_and_body(out);
    return out;
  }

 private:
  Model model_;
  std::mt19937_64 rng_;
  GeneratorOptions opts_;
  std::vector<Sig> sigs_;
  int cur_ = -1;
  int counter_ = 0;

  std::uint64_t below(std::uint64_t n) { return n == 0 ? 0 : rng_() % n; }
  bool chance(double p) { return static_cast<double>(rng_() >> 11) * 0x1.0p-53 < p; }
  std::string fresh() { return "v" + std::to_string(counter_++); }

  bool funded() const { return model_ != Model::real && model_ != Model::bankers; }
  bool in_body() const { return cur_ >= 0; }

  Bnd save_cost(std::uint64_t m) const {
    if (model_ == Model::real || is_debit(model_)) return {};
    return {m, m};
  }

  TypeP thunk_type(int lo) {
    std::vector<int> cands;
    for (int j = std::max(lo, 0); j < static_cast<int>(sigs_.size()); ++j) {
      if (sigs_[j].thunk && sigs_[j].result) cands.push_back(j);
    }
    if (cands.empty() || chance(0.2)) return mk(Type::thunk, random_type(0, lo));
    int j = cands[below(cands.size())];
    return mk(Type::thunk, sigs_[j].result, nullptr, j);
  }

  TypeP random_type(int depth, int lo) {
    if (depth <= 0) {
      switch (below(4)) {
        case 0: return mk(Type::unit);
        case 1: return mk(Type::sum, mk(Type::unit), mk(Type::unit));
        case 2: return mk(Type::ref, mk(Type::unit));
        default: return thunk_type(lo);
      }
    }
    switch (below(6)) {
      case 0: return mk(Type::unit);
      case 1: return mk(Type::sum, random_type(depth - 1, lo), random_type(depth - 1, lo));
      case 2: return mk(Type::pair, random_type(depth - 1, lo), random_type(depth - 1, lo));
      case 3:
      case 4: return mk(Type::ref, random_type(depth - 1, lo));
      default: return thunk_type(lo);
    }
  }

  template <class Pred>
  std::vector<const Var*> vars(const Scope& s, Pred pred) const {
    std::vector<const Var*> out;
    for (const auto& v : s) {
      if (pred(v)) out.push_back(&v);
    }
    return out;
  }

  const Var* pick(const std::vector<const Var*>& vs) { return vs.empty() ? nullptr : vs[below(vs.size())]; }

  ValuePtr value(const TypeP& t, const Scope& s) {
    auto m = vars(s, [&](const Var& v) { return same(v.type, t); });
    if (!m.empty() && (is_pointer(t) || chance(0.5))) return build::var(pick(m)->name);
    switch (t->kind) {
      case Type::unit: return build::unit();
      case Type::sum: {
        bool left = chance(0.5);
        if (auto v = value(left ? t->a : t->b, s)) return left ? build::inl(v) : build::inr(v);
        if (auto v = value(left ? t->b : t->a, s)) return left ? build::inr(v) : build::inl(v);
        return nullptr;
      }
      case Type::pair: {
        auto x = value(t->a, s);
        if (!x) return nullptr;
        auto y = value(t->b, s);
        if (!y) return nullptr;
        return build::pair(x, y);
      }
      default:
        return nullptr;
    }
  }

  using Cont = std::function<Gen(ValuePtr, const Scope&)>;

  Gen with_value(const TypeP& t, const Scope& s, const Cont& k) {
    if (auto v = value(t, s)) return k(v, s);
    Gen bound = construct(t, s);
    std::string y = fresh();
    Scope s2 = s;
    s2.push_back({y, t, -1, bound.fresh});
    Gen body = k(build::var(y), s2);
    return {build::let(y, bound.e, body.e), bound.b + body.b, body.fresh};
  }

  // Always succeeds; pointer types get a freshly allocated cell.
  Gen construct(const TypeP& t, const Scope& s) {
    switch (t->kind) {
      case Type::unit:
        return {build::ret(build::unit()), {}};
      case Type::sum: {
        if (auto v = value(t, s)) return {build::ret(v), {}};
        bool left = chance(0.5);
        return with_value(left ? t->a : t->b, s, [&](ValuePtr v, const Scope&) {
          return Gen{build::ret(left ? build::inl(v) : build::inr(v)), {}};
        });
      }
      case Type::pair:
        return with_value(t->a, s, [&](ValuePtr x, const Scope& s1) {
          return with_value(t->b, s1, [&](ValuePtr y, const Scope&) { return Gen{build::ret(build::pair(x, y)), {}}; });
        });
      case Type::ref:
        return with_value(t->a, s, [&](ValuePtr v, const Scope&) { return Gen{build::fold(v), {}, true}; });
      case Type::thunk:
        if (t->fn < 0) {
          return with_value(t->a, s, [&](ValuePtr v, const Scope&) { return Gen{build::memo(v), {}, true}; });
        }
        return with_value(sigs_[t->fn].param, s, [&](ValuePtr v, const Scope&) {
          const Sig& f = sigs_[t->fn];
          if (model_ == Model::debit_inherit) {
            // The unshared cost of f is at least the call step plus the body's minimum.
            std::uint64_t k1 = below(f.body.lo + 2);
            return Gen{build::lazy_split(k1, f.name, v), {k1, k1}, true};
          }
          return Gen{build::lazy(f.name, v), {}, true};
        });
    }
    return {build::ret(build::unit()), {}};
  }

  Gen gen(const TypeP& t, const Scope& s, int depth) {
    for (int attempt = 0; attempt < 4; ++attempt) {
      std::uint64_t w = below(depth > 0 ? 100 : 40);
      std::optional<Gen> g;
      if (w < 12) g = p_ret(t, s);
      else if (w < 20) g = p_unfold(t, s);
      else if (w < 30) g = p_force(t, s);
      else if (w < 40) g = p_call(t, s);
      else if (w < 58) g = p_let(t, s, depth);
      else if (w < 68) g = p_case(t, s, depth);
      else if (w < 76) g = p_split(t, s, depth);
      else if (w < 82) g = p_app(t, s, depth);
      else if (w < 92) g = p_save(t, s, depth);
      else g = p_spend(t, s, depth);
      if (g) return *g;
    }
    return construct(t, s);
  }

  std::optional<Gen> p_ret(const TypeP& t, const Scope& s) {
    auto v = value(t, s);
    if (!v) return std::nullopt;
    return Gen{build::ret(v), {}};
  }

  std::optional<Gen> p_unfold(const TypeP& t, const Scope& s) {
    const Var* r = pick(vars(s, [&](const Var& v) { return v.type->kind == Type::ref && same(v.type->a, t); }));
    if (!r) return std::nullopt;
    return Gen{build::unfold(build::var(r->name)), {}};
  }

  std::optional<Gen> p_force(const TypeP& t, const Scope& s) {
    // Under the debit models a speculated body may only force cells it
    // allocated itself; forcing an outer record would make the speculation
    // visible in the erased heap.
    const Var* th = pick(vars(s, [&](const Var& v) {
      if (v.type->kind != Type::thunk || !same(v.type->a, t)) return false;
      return !(is_debit(model_) && in_body() && v.type->fn >= 0 && !v.local);
    }));
    if (!th) return std::nullopt;
    ExprPtr force = build::force(build::var(th->name));
    if (th->type->fn < 0 || !funded()) return Gen{force, {}};
    std::uint64_t m = sigs_[th->type->fn].body.hi + 1;
    // Prepaid by the setup: the potential pays for this force.
    if (th->prefund >= static_cast<std::int64_t>(m) && chance(0.7)) return Gen{force, {}};
    if (m > 0 && chance(opts_.underfund_rate)) --m;
    return Gen{build::let(fresh(), build::save(m, build::var(th->name)), force), save_cost(m)};
  }

  std::optional<Gen> p_call(const TypeP& t, const Scope& s) {
    std::vector<int> cands;
    for (int j = cur_ + 1; j < static_cast<int>(sigs_.size()); ++j) {
      if (!sigs_[j].thunk && sigs_[j].done && same(sigs_[j].result, t)) cands.push_back(j);
    }
    if (cands.empty()) return std::nullopt;
    const Sig& f = sigs_[cands[below(cands.size())]];
    Bnd cost = Bnd{1, 1} + f.body;
    return with_value(f.param, s, [&](ValuePtr v, const Scope&) { return Gen{build::call(f.name, v), cost}; });
  }

  std::optional<Gen> p_let(const TypeP& t, const Scope& s, int depth) {
    if (depth <= 0) return std::nullopt;
    TypeP sigma = random_type(1, cur_ + 1);
    std::optional<Gen> work;
    if (chance(0.5)) work = any_work(s, sigma);
    Gen bound = work ? *work : gen(sigma, without_prefunds(s), depth - 1);
    std::string y = fresh();
    Scope s2 = s;
    s2.push_back({y, sigma, -1, bound.fresh});
    Gen body = gen(t, s2, depth - 1);
    return Gen{build::let(y, bound.e, body.e), bound.b + body.b};
  }

  // A call or force of any result type; sets sigma to that type.
  std::optional<Gen> any_work(const Scope& s, TypeP& sigma) {
    std::vector<TypeP> targets;
    for (int j = cur_ + 1; j < static_cast<int>(sigs_.size()); ++j) {
      if (!sigs_[j].thunk && sigs_[j].done) targets.push_back(sigs_[j].result);
    }
    for (const auto& v : s) {
      if (v.type->kind == Type::thunk) targets.push_back(v.type->a);
    }
    if (targets.empty()) return std::nullopt;
    TypeP t = targets[below(targets.size())];
    Scope plain = without_prefunds(s);
    std::optional<Gen> g = chance(0.5) ? p_call(t, plain) : p_force(t, s);
    if (!g) g = p_call(t, plain);
    if (!g) g = p_force(t, s);
    if (g) sigma = t;
    return g;
  }

  std::optional<Gen> p_case(const TypeP& t, const Scope& s, int depth) {
    if (depth <= 0) return std::nullopt;
    const Var* sv = pick(vars(s, [](const Var& v) { return v.type->kind == Type::sum; }));
    if (!sv) return std::nullopt;
    std::string l = fresh();
    std::string r = fresh();
    Scope sl = s;
    sl.push_back({l, sv->type->a});
    Scope sr = s;
    sr.push_back({r, sv->type->b});
    Gen left = gen(t, sl, depth - 1);
    Gen right = gen(t, sr, depth - 1);
    return Gen{build::case_of(build::var(sv->name), l, left.e, r, right.e), join(left.b, right.b)};
  }

  std::optional<Gen> p_split(const TypeP& t, const Scope& s, int depth) {
    if (depth <= 0) return std::nullopt;
    const Var* pv = pick(vars(s, [](const Var& v) { return v.type->kind == Type::pair; }));
    if (!pv) return std::nullopt;
    std::string a = fresh();
    std::string b = fresh();
    Scope s2 = s;
    s2.push_back({a, pv->type->a});
    s2.push_back({b, pv->type->b});
    Gen body = gen(t, s2, depth - 1);
    return Gen{build::split(a, b, build::var(pv->name), body.e), body.b};
  }

  std::optional<Gen> p_app(const TypeP& t, const Scope& s, int depth) {
    if (depth <= 0) return std::nullopt;
    TypeP sigma = random_type(1, cur_ + 1);
    std::string y = fresh();
    Scope inner = without_prefunds(s);
    inner.push_back({y, sigma});
    Gen body = gen(t, inner, depth - 1);
    return with_value(sigma, s, [&](ValuePtr v, const Scope&) {
      return Gen{build::app(build::lam(y, body.e), v), Bnd{1, 1} + body.b};
    });
  }

  bool saveable(const Var& v) const {
    if (model_ == Model::real || model_ == Model::bankers) return is_pointer(v.type);
    return v.type->kind == Type::thunk;
  }

  std::optional<Gen> p_save(const TypeP& t, const Scope& s, int depth) {
    if (depth <= 0) return std::nullopt;
    const Var* p = pick(vars(s, [&](const Var& v) { return saveable(v); }));
    if (!p) return std::nullopt;
    std::uint64_t m = 1 + below(3);
    Gen body = gen(t, s, depth - 1);
    return Gen{build::let(fresh(), build::save(m, build::var(p->name)), body.e), save_cost(m) + body.b};
  }

  std::optional<Gen> p_spend(const TypeP& t, const Scope& s, int depth) {
    if (depth <= 0 || (model_ != Model::bankers && model_ != Model::real)) return std::nullopt;
    auto funded_vars = vars(s, [](const Var& v) { return v.prefund > 0; });
    if (!funded_vars.empty() && chance(0.7)) {
      const Var* p = pick(funded_vars);
      std::uint64_t m = 1 + below(static_cast<std::uint64_t>(p->prefund));
      if (chance(opts_.overspend_rate)) m = static_cast<std::uint64_t>(p->prefund) + 1;
      Scope s2 = s;
      for (auto& v : s2) {
        if (v.name == p->name) v.prefund = std::max<std::int64_t>(0, v.prefund - static_cast<std::int64_t>(m));
      }
      Gen body = gen(t, s2, depth - 1);
      return Gen{build::spend(m, build::var(p->name), body.e), spend_bound(body.b, m)};
    }
    const Var* p = pick(vars(s, [](const Var& v) { return is_pointer(v.type); }));
    if (!p) return std::nullopt;
    std::uint64_t m = 1 + below(3);
    std::uint64_t take = chance(opts_.overspend_rate) ? m + 1 : m;
    Gen body = gen(t, s, depth - 1);
    ExprPtr e = build::let(fresh(), build::save(m, build::var(p->name)), build::spend(take, build::var(p->name), body.e));
    return Gen{e, save_cost(m) + spend_bound(body.b, take)};
  }

  Bnd spend_bound(Bnd b, std::uint64_t m) const {
    if (model_ == Model::real) return b;
    return {b.lo > m ? b.lo - m : 0, b.hi > m ? b.hi - m : 0};
  }

  // Credit inheritance: the body passes an heir before returning, so any
  // surplus credits move on instead of making the force stuck.
  ExprPtr with_pass(const ExprPtr& body, const Scope& scope) {
    std::string r = fresh();
    const Var* h = pick(vars(scope, [](const Var& v) { return v.type->kind == Type::thunk; }));
    if (h && chance(0.6)) {
      return build::let(r, body, build::let(fresh(), build::pass(build::var(h->name)), build::ret(build::var(r))));
    }
    Gen heir = construct(thunk_type(cur_ + 1), scope);
    std::string hv = fresh();
    return build::let(hv, heir.e,
                      build::let(r, body, build::let(fresh(), build::pass(build::var(hv)), build::ret(build::var(r)))));
  }

  TypeP component_type() {
    switch (below(5)) {
      case 0: return mk(Type::ref, random_type(1, 0));
      case 1: return mk(Type::ref, mk(Type::unit));
      case 2:
      case 3: return thunk_type(0);
      default: return random_type(1, 0);
    }
  }

  void build_setup_and_body(GeneratedProgram& out) {
    int n = 1 + static_cast<int>(below(3));
    std::vector<Var> comps;
    std::vector<std::pair<std::string, ExprPtr>> lets;
    Scope scope;
    for (int i = 0; i < n; ++i) {
      TypeP t = component_type();
      Gen g = gen(t, scope, 2);
      Var v{fresh(), t, -1, false};
      lets.emplace_back(v.name, g.e);
      scope.push_back(v);
      comps.push_back(v);
    }
    std::vector<std::pair<std::string, ExprPtr>> saves;
    if (model_ != Model::real) {
      for (auto& c : comps) {
        std::uint64_t m = 0;
        if (model_ == Model::bankers && is_pointer(c.type)) {
          m = 2 + below(4);
        } else if (funded() && c.type->kind == Type::thunk && c.type->fn >= 0) {
          m = sigs_[c.type->fn].body.hi + 1;
        } else {
          continue;
        }
        c.prefund = static_cast<std::int64_t>(m);
        saves.emplace_back(fresh(), build::save(m, build::var(c.name)));
      }
    }

    ValuePtr tuple = build::var(comps.back().name);
    TypeP tuple_type = comps.back().type;
    for (int i = n - 2; i >= 0; --i) {
      tuple = build::pair(build::var(comps[i].name), tuple);
      tuple_type = mk(Type::pair, comps[i].type, tuple_type);
    }
    ExprPtr setup = build::ret(tuple);
    for (auto it = saves.rbegin(); it != saves.rend(); ++it) setup = build::let(it->first, it->second, setup);
    for (auto it = lets.rbegin(); it != lets.rend(); ++it) setup = build::let(it->first, it->second, setup);

    // The body sees the components under fresh names, destructured from
    // the parameter.
    std::string param = fresh();
    Scope body_scope;
    std::vector<std::string> names;
    for (const auto& c : comps) {
      Var v = c;
      v.name = fresh();
      v.local = false;
      names.push_back(v.name);
      body_scope.push_back(v);
    }
    TypeP result = random_type(1, 0);
    Gen body = gen(result, body_scope, opts_.max_depth + 2);
    ExprPtr e = body.e;
    std::string rest = param;
    std::vector<std::pair<std::string, std::string>> splits;  // (first, rest) per level
    for (int i = 0; i + 1 < n; ++i) {
      std::string next = i + 2 < n ? fresh() : names[n - 1];
      splits.emplace_back(names[i], next);
    }
    std::vector<std::string> sources;
    std::string src = param;
    for (const auto& [first, next] : splits) {
      sources.push_back(src);
      src = next;
    }
    for (int i = static_cast<int>(splits.size()) - 1; i >= 0; --i) {
      e = build::split(splits[i].first, splits[i].second, build::var(sources[i]), e);
    }
    if (n == 1) e = build::let(names[0], build::ret(build::var(param)), e);

    out.setup = setup;
    out.param = param;
    out.body = e;
  }
};

}  // namespace

GeneratedProgram generate_program(Model model, std::uint64_t seed, const GeneratorOptions& opts) {
  return Generator(model, seed, opts).run();
}

Program to_program(const GeneratedProgram& g) {
  Program p;
  p.functions = g.functions;
  p.main = build::let(g.param, g.setup, g.body);
  return p;
}

Instance instantiate(const GeneratedProgram& g, Model model) {
  Instance in;
  in.functions = g.functions;
  try {
    EvalOutcome out = evaluate(g.functions, Heap{}, g.setup, model);
    in.heap = std::move(out.heap);
    in.main = substitute(g.body, Subst{{g.param, out.value}});
    in.setup_ok = true;
  } catch (const StuckError& err) {
    in.setup_error = err.what();
  }
  return in;
}

}  // namespace amortlab
