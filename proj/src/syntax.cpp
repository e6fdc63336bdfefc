#include "amortlab/syntax.hpp"

#include <cctype>

namespace amortlab {

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

}  // namespace

// ---------------------------------------------------------------------------
// Equality

bool equal(const ValuePtr& a, const ValuePtr& b) {
  if (a == b) return true;
  if (!a || !b) return false;
  return equal(*a, *b);
}

bool equal(const ExprPtr& a, const ExprPtr& b) {
  if (a == b) return true;
  if (!a || !b) return false;
  return equal(*a, *b);
}

bool equal(const Value& a, const Value& b) {
  if (a.node.index() != b.node.index()) return false;
  return std::visit(
      overloaded{
          [&](const val::Var& x) { return x.name == b.as<val::Var>()->name; },
          [&](const val::Ptr& x) { return x.ptr == b.as<val::Ptr>()->ptr; },
          [&](const val::Unit&) { return true; },
          [&](const val::Inl& x) { return equal(x.inner, b.as<val::Inl>()->inner); },
          [&](const val::Inr& x) { return equal(x.inner, b.as<val::Inr>()->inner); },
          [&](const val::Pair& x) {
            const auto* y = b.as<val::Pair>();
            return equal(x.first, y->first) && equal(x.second, y->second);
          },
          [&](const val::Lam& x) {
            const auto* y = b.as<val::Lam>();
            return x.param == y->param && equal(x.body, y->body);
          },
      },
      a.node);
}

bool equal(const HeapValue& a, const HeapValue& b) {
  if (a.index() != b.index()) return false;
  return std::visit(
      overloaded{
          [&](const hv::Fold& x) { return equal(x.value, std::get<hv::Fold>(b).value); },
          [&](const hv::Memo& x) { return equal(x.value, std::get<hv::Memo>(b).value); },
          [&](const hv::Lazy& x) {
            const auto& y = std::get<hv::Lazy>(b);
            return x.fn == y.fn && x.split == y.split && equal(x.arg, y.arg);
          },
      },
      a);
}

bool equal(const Expr& a, const Expr& b) {
  if (a.node.index() != b.node.index()) return false;
  return std::visit(
      overloaded{
          [&](const ex::Return& x) { return equal(x.value, b.as<ex::Return>()->value); },
          [&](const ex::Alloc& x) { return equal(x.value, b.as<ex::Alloc>()->value); },
          [&](const ex::Let& x) {
            const auto* y = b.as<ex::Let>();
            return x.name == y->name && equal(x.bound, y->bound) && equal(x.body, y->body);
          },
          [&](const ex::Case& x) {
            const auto* y = b.as<ex::Case>();
            return x.left_name == y->left_name && x.right_name == y->right_name &&
                   equal(x.scrutinee, y->scrutinee) && equal(x.left, y->left) &&
                   equal(x.right, y->right);
          },
          [&](const ex::Split& x) {
            const auto* y = b.as<ex::Split>();
            return x.first == y->first && x.second == y->second && equal(x.pair, y->pair) &&
                   equal(x.body, y->body);
          },
          [&](const ex::App& x) {
            const auto* y = b.as<ex::App>();
            return equal(x.fn, y->fn) && equal(x.arg, y->arg);
          },
          [&](const ex::Call& x) {
            const auto* y = b.as<ex::Call>();
            return x.fn == y->fn && equal(x.arg, y->arg);
          },
          [&](const ex::Unfold& x) { return equal(x.target, b.as<ex::Unfold>()->target); },
          [&](const ex::Force& x) { return equal(x.target, b.as<ex::Force>()->target); },
          [&](const ex::Save& x) {
            const auto* y = b.as<ex::Save>();
            return x.amount == y->amount && equal(x.target, y->target);
          },
          [&](const ex::Spend& x) {
            const auto* y = b.as<ex::Spend>();
            return x.amount == y->amount && equal(x.target, y->target) && equal(x.body, y->body);
          },
          [&](const ex::Pass& x) { return equal(x.heir, b.as<ex::Pass>()->heir); },
      },
      a.node);
}

bool equal(const FuncEnv& a, const FuncEnv& b) {
  if (a.size() != b.size()) return false;
  for (auto ia = a.begin(), ib = b.begin(); ia != a.end(); ++ia, ++ib) {
    if (ia->first != ib->first || ia->second.param != ib->second.param ||
        !equal(ia->second.body, ib->second.body)) {
      return false;
    }
  }
  return true;
}

bool equal(const Program& a, const Program& b) {
  if (!equal(a.functions, b.functions) || !equal(a.main, b.main)) return false;
  if (a.heap.size() != b.heap.size()) return false;
  for (std::size_t i = 0; i < a.heap.size(); ++i) {
    if (a.heap[i].name != b.heap[i].name || a.heap[i].count != b.heap[i].count ||
        !equal(a.heap[i].value, b.heap[i].value)) {
      return false;
    }
  }
  return true;
}

// ---------------------------------------------------------------------------
// Free variables

namespace {

void fv(const ValuePtr& v, std::set<std::string>& bound, std::set<std::string>& out);
void fv(const ExprPtr& e, std::set<std::string>& bound, std::set<std::string>& out);

void fv_under(const std::string& x, const ExprPtr& e, std::set<std::string>& bound,
              std::set<std::string>& out) {
  bool fresh = bound.insert(x).second;
  fv(e, bound, out);
  if (fresh) bound.erase(x);
}

void fv(const HeapValue& h, std::set<std::string>& bound, std::set<std::string>& out) {
  std::visit(overloaded{
                 [&](const hv::Fold& x) { fv(x.value, bound, out); },
                 [&](const hv::Memo& x) { fv(x.value, bound, out); },
                 [&](const hv::Lazy& x) { fv(x.arg, bound, out); },
             },
             h);
}

void fv(const ValuePtr& v, std::set<std::string>& bound, std::set<std::string>& out) {
  std::visit(overloaded{
                 [&](const val::Var& x) {
                   if (!bound.count(x.name)) out.insert(x.name);
                 },
                 [&](const val::Ptr&) {},
                 [&](const val::Unit&) {},
                 [&](const val::Inl& x) { fv(x.inner, bound, out); },
                 [&](const val::Inr& x) { fv(x.inner, bound, out); },
                 [&](const val::Pair& x) {
                   fv(x.first, bound, out);
                   fv(x.second, bound, out);
                 },
                 [&](const val::Lam& x) { fv_under(x.param, x.body, bound, out); },
             },
             v->node);
}

void fv(const ExprPtr& e, std::set<std::string>& bound, std::set<std::string>& out) {
  std::visit(overloaded{
                 [&](const ex::Return& x) { fv(x.value, bound, out); },
                 [&](const ex::Alloc& x) { fv(x.value, bound, out); },
                 [&](const ex::Let& x) {
                   fv(x.bound, bound, out);
                   fv_under(x.name, x.body, bound, out);
                 },
                 [&](const ex::Case& x) {
                   fv(x.scrutinee, bound, out);
                   fv_under(x.left_name, x.left, bound, out);
                   fv_under(x.right_name, x.right, bound, out);
                 },
                 [&](const ex::Split& x) {
                   fv(x.pair, bound, out);
                   bool f1 = bound.insert(x.first).second;
                   bool f2 = bound.insert(x.second).second;
                   fv(x.body, bound, out);
                   if (f1) bound.erase(x.first);
                   if (f2) bound.erase(x.second);
                 },
                 [&](const ex::App& x) {
                   fv(x.fn, bound, out);
                   fv(x.arg, bound, out);
                 },
                 [&](const ex::Call& x) { fv(x.arg, bound, out); },
                 [&](const ex::Unfold& x) { fv(x.target, bound, out); },
                 [&](const ex::Force& x) { fv(x.target, bound, out); },
                 [&](const ex::Save& x) { fv(x.target, bound, out); },
                 [&](const ex::Spend& x) {
                   fv(x.target, bound, out);
                   fv(x.body, bound, out);
                 },
                 [&](const ex::Pass& x) { fv(x.heir, bound, out); },
             },
             e->node);
}

}  // namespace

std::set<std::string> free_vars(const ExprPtr& e) {
  std::set<std::string> bound, out;
  fv(e, bound, out);
  return out;
}

std::set<std::string> free_vars(const ValuePtr& v) {
  std::set<std::string> bound, out;
  fv(v, bound, out);
  return out;
}

std::set<std::string> free_vars(const HeapValue& h) {
  std::set<std::string> bound, out;
  fv(h, bound, out);
  return out;
}

// ---------------------------------------------------------------------------
// Pointer and call collection

void collect_pointers(const ValuePtr& v, std::vector<Pointer>& out) {
  std::visit(overloaded{
                 [&](const val::Var&) {},
                 [&](const val::Ptr& x) { out.push_back(x.ptr); },
                 [&](const val::Unit&) {},
                 [&](const val::Inl& x) { collect_pointers(x.inner, out); },
                 [&](const val::Inr& x) { collect_pointers(x.inner, out); },
                 [&](const val::Pair& x) {
                   collect_pointers(x.first, out);
                   collect_pointers(x.second, out);
                 },
                 [&](const val::Lam& x) { collect_pointers(x.body, out); },
             },
             v->node);
}

void collect_pointers(const HeapValue& h, std::vector<Pointer>& out) {
  std::visit(overloaded{
                 [&](const hv::Fold& x) { collect_pointers(x.value, out); },
                 [&](const hv::Memo& x) { collect_pointers(x.value, out); },
                 [&](const hv::Lazy& x) { collect_pointers(x.arg, out); },
             },
             h);
}

void collect_pointers(const ExprPtr& e, std::vector<Pointer>& out) {
  std::visit(overloaded{
                 [&](const ex::Return& x) { collect_pointers(x.value, out); },
                 [&](const ex::Alloc& x) { collect_pointers(x.value, out); },
                 [&](const ex::Let& x) {
                   collect_pointers(x.bound, out);
                   collect_pointers(x.body, out);
                 },
                 [&](const ex::Case& x) {
                   collect_pointers(x.scrutinee, out);
                   collect_pointers(x.left, out);
                   collect_pointers(x.right, out);
                 },
                 [&](const ex::Split& x) {
                   collect_pointers(x.pair, out);
                   collect_pointers(x.body, out);
                 },
                 [&](const ex::App& x) {
                   collect_pointers(x.fn, out);
                   collect_pointers(x.arg, out);
                 },
                 [&](const ex::Call& x) { collect_pointers(x.arg, out); },
                 [&](const ex::Unfold& x) { collect_pointers(x.target, out); },
                 [&](const ex::Force& x) { collect_pointers(x.target, out); },
                 [&](const ex::Save& x) { collect_pointers(x.target, out); },
                 [&](const ex::Spend& x) {
                   collect_pointers(x.target, out);
                   collect_pointers(x.body, out);
                 },
                 [&](const ex::Pass& x) { collect_pointers(x.heir, out); },
             },
             e->node);
}

namespace {

void collect_calls(const ValuePtr& v, std::set<std::string>& out) {
  std::visit(overloaded{
                 [&](const val::Inl& x) { collect_calls(x.inner, out); },
                 [&](const val::Inr& x) { collect_calls(x.inner, out); },
                 [&](const val::Pair& x) {
                   collect_calls(x.first, out);
                   collect_calls(x.second, out);
                 },
                 [&](const val::Lam& x) { collect_calls(x.body, out); },
                 [&](const auto&) {},
             },
             v->node);
}

}  // namespace

void collect_calls(const ExprPtr& e, std::set<std::string>& out) {
  std::visit(overloaded{
                 [&](const ex::Return& x) { collect_calls(x.value, out); },
                 [&](const ex::Alloc& x) {
                   if (const auto* l = std::get_if<hv::Lazy>(&x.value)) {
                     out.insert(l->fn);
                     collect_calls(l->arg, out);
                   } else if (const auto* f = std::get_if<hv::Fold>(&x.value)) {
                     collect_calls(f->value, out);
                   } else {
                     collect_calls(std::get<hv::Memo>(x.value).value, out);
                   }
                 },
                 [&](const ex::Let& x) {
                   collect_calls(x.bound, out);
                   collect_calls(x.body, out);
                 },
                 [&](const ex::Case& x) {
                   collect_calls(x.scrutinee, out);
                   collect_calls(x.left, out);
                   collect_calls(x.right, out);
                 },
                 [&](const ex::Split& x) {
                   collect_calls(x.pair, out);
                   collect_calls(x.body, out);
                 },
                 [&](const ex::App& x) {
                   collect_calls(x.fn, out);
                   collect_calls(x.arg, out);
                 },
                 [&](const ex::Call& x) {
                   out.insert(x.fn);
                   collect_calls(x.arg, out);
                 },
                 [&](const ex::Unfold& x) { collect_calls(x.target, out); },
                 [&](const ex::Force& x) { collect_calls(x.target, out); },
                 [&](const ex::Save& x) { collect_calls(x.target, out); },
                 [&](const ex::Spend& x) {
                   collect_calls(x.target, out);
                   collect_calls(x.body, out);
                 },
                 [&](const ex::Pass& x) { collect_calls(x.heir, out); },
             },
             e->node);
}

std::string fresh_name(const std::string& base, const std::set<std::string>& avoid) {
  std::string stem = base;
  auto dollar = stem.rfind('$');
  if (dollar != std::string::npos && dollar + 1 < stem.size()) {
    bool digits = true;
    for (std::size_t i = dollar + 1; i < stem.size(); ++i) {
      digits = digits && std::isdigit(static_cast<unsigned char>(stem[i]));
    }
    if (digits) stem.resize(dollar);
  }
  for (std::uint64_t n = 1;; ++n) {
    std::string candidate = stem + "$" + std::to_string(n);
    if (!avoid.count(candidate)) return candidate;
  }
}

// ---------------------------------------------------------------------------
// Substitution

namespace {

class Substituter {
 public:
  explicit Substituter(const Subst& top) {
    for (const auto& [name, value] : top) {
      auto names = free_vars(value);
      value_fv_.insert(names.begin(), names.end());
    }
  }

  ValuePtr value(const ValuePtr& v, const Subst& s) {
    if (s.empty()) return v;
    return std::visit(
        overloaded{
            [&](const val::Var& x) -> ValuePtr {
              auto it = s.find(x.name);
              return it == s.end() ? v : it->second;
            },
            [&](const val::Ptr&) -> ValuePtr { return v; },
            [&](const val::Unit&) -> ValuePtr { return v; },
            [&](const val::Inl& x) -> ValuePtr {
              auto inner = value(x.inner, s);
              return inner == x.inner ? v : build::inl(inner);
            },
            [&](const val::Inr& x) -> ValuePtr {
              auto inner = value(x.inner, s);
              return inner == x.inner ? v : build::inr(inner);
            },
            [&](const val::Pair& x) -> ValuePtr {
              auto a = value(x.first, s);
              auto b = value(x.second, s);
              return (a == x.first && b == x.second) ? v : build::pair(a, b);
            },
            [&](const val::Lam& x) -> ValuePtr {
              std::vector<std::string> binders{x.param};
              Subst inner = enter(binders, s, x.body);
              auto body = expr(x.body, inner);
              if (binders[0] == x.param && body == x.body) return v;
              return build::lam(binders[0], body);
            },
        },
        v->node);
  }

  HeapValue heap_value(const HeapValue& h, const Subst& s) {
    return std::visit(overloaded{
                          [&](const hv::Fold& x) -> HeapValue { return hv::Fold{value(x.value, s)}; },
                          [&](const hv::Memo& x) -> HeapValue { return hv::Memo{value(x.value, s)}; },
                          [&](const hv::Lazy& x) -> HeapValue {
                            return hv::Lazy{x.fn, value(x.arg, s), x.split};
                          },
                      },
                      h);
  }

  ExprPtr expr(const ExprPtr& e, const Subst& s) {
    if (s.empty()) return e;
    return std::visit(
        overloaded{
            [&](const ex::Return& x) -> ExprPtr {
              auto v = value(x.value, s);
              return v == x.value ? e : build::ret(v);
            },
            [&](const ex::Alloc& x) -> ExprPtr { return build::alloc(heap_value(x.value, s)); },
            [&](const ex::Let& x) -> ExprPtr {
              auto bound = expr(x.bound, s);
              std::vector<std::string> binders{x.name};
              Subst inner = enter(binders, s, x.body);
              auto body = expr(x.body, inner);
              if (bound == x.bound && body == x.body && binders[0] == x.name) return e;
              return build::let(binders[0], bound, body);
            },
            [&](const ex::Case& x) -> ExprPtr {
              auto scrutinee = value(x.scrutinee, s);
              std::vector<std::string> lb{x.left_name};
              Subst ls = enter(lb, s, x.left);
              auto left = expr(x.left, ls);
              std::vector<std::string> rb{x.right_name};
              Subst rs = enter(rb, s, x.right);
              auto right = expr(x.right, rs);
              if (scrutinee == x.scrutinee && left == x.left && right == x.right &&
                  lb[0] == x.left_name && rb[0] == x.right_name) {
                return e;
              }
              return build::case_of(scrutinee, lb[0], left, rb[0], right);
            },
            [&](const ex::Split& x) -> ExprPtr {
              auto pair = value(x.pair, s);
              std::vector<std::string> binders{x.first, x.second};
              Subst inner = enter(binders, s, x.body);
              auto body = expr(x.body, inner);
              if (pair == x.pair && body == x.body && binders[0] == x.first &&
                  binders[1] == x.second) {
                return e;
              }
              return build::split(binders[0], binders[1], pair, body);
            },
            [&](const ex::App& x) -> ExprPtr { return build::app(value(x.fn, s), value(x.arg, s)); },
            [&](const ex::Call& x) -> ExprPtr { return build::call(x.fn, value(x.arg, s)); },
            [&](const ex::Unfold& x) -> ExprPtr { return build::unfold(value(x.target, s)); },
            [&](const ex::Force& x) -> ExprPtr { return build::force(value(x.target, s)); },
            [&](const ex::Save& x) -> ExprPtr { return build::save(x.amount, value(x.target, s)); },
            [&](const ex::Spend& x) -> ExprPtr {
              return build::spend(x.amount, value(x.target, s), expr(x.body, s));
            },
            [&](const ex::Pass& x) -> ExprPtr { return build::pass(value(x.heir, s)); },
        },
        e->node);
  }

 private:
  // Drops shadowed names from `s` and renames any binder that would capture
  // a free variable of a substituted value. `binders` is updated in place.
  Subst enter(std::vector<std::string>& binders, const Subst& s, const ExprPtr& body) {
    Subst inner = s;
    for (const auto& b : binders) inner.erase(b);
    if (inner.empty() || value_fv_.empty()) return inner;

    bool clash = false;
    for (const auto& b : binders) clash = clash || value_fv_.count(b);
    if (!clash) return inner;

    auto body_fv = free_vars(body);
    bool live = false;
    for (const auto& [name, _] : inner) live = live || body_fv.count(name);
    if (!live) return inner;

    std::set<std::string> avoid = value_fv_;
    avoid.insert(body_fv.begin(), body_fv.end());
    for (const auto& [name, _] : s) avoid.insert(name);
    for (const auto& b : binders) avoid.insert(b);
    for (auto& b : binders) {
      if (!value_fv_.count(b)) continue;
      std::string renamed = fresh_name(b, avoid);
      avoid.insert(renamed);
      inner[b] = build::var(renamed);
      b = renamed;
    }
    return inner;
  }

  std::set<std::string> value_fv_;
};

}  // namespace

ExprPtr substitute(const ExprPtr& e, const Subst& binding) {
  Substituter s(binding);
  return s.expr(e, binding);
}

ValuePtr substitute(const ValuePtr& v, const Subst& binding) {
  Substituter s(binding);
  return s.value(v, binding);
}

HeapValue substitute(const HeapValue& h, const Subst& binding) {
  Substituter s(binding);
  return s.heap_value(h, binding);
}

// ---------------------------------------------------------------------------
// Builders

namespace build {

namespace {
ValuePtr make_value(decltype(Value::node) node) { return std::make_shared<const Value>(Value{std::move(node)}); }
ExprPtr make_expr(decltype(Expr::node) node) { return std::make_shared<const Expr>(Expr{std::move(node)}); }
}  // namespace

ValuePtr var(std::string name) { return make_value(val::Var{std::move(name)}); }
ValuePtr ptr(Pointer p) { return make_value(val::Ptr{std::move(p)}); }
ValuePtr unit() {
  static const ValuePtr u = make_value(val::Unit{});
  return u;
}
ValuePtr inl(ValuePtr v) { return make_value(val::Inl{std::move(v)}); }
ValuePtr inr(ValuePtr v) { return make_value(val::Inr{std::move(v)}); }
ValuePtr pair(ValuePtr a, ValuePtr b) { return make_value(val::Pair{std::move(a), std::move(b)}); }
ValuePtr lam(std::string param, ExprPtr body) {
  return make_value(val::Lam{std::move(param), std::move(body)});
}

ExprPtr ret(ValuePtr v) { return make_expr(ex::Return{std::move(v)}); }
ExprPtr fold(ValuePtr v) { return alloc(hv::Fold{std::move(v)}); }
ExprPtr lazy(std::string fn, ValuePtr arg) {
  return alloc(hv::Lazy{std::move(fn), std::move(arg), std::nullopt});
}
ExprPtr lazy_split(std::uint64_t k1, std::string fn, ValuePtr arg) {
  return alloc(hv::Lazy{std::move(fn), std::move(arg), k1});
}
ExprPtr memo(ValuePtr v) { return alloc(hv::Memo{std::move(v)}); }
ExprPtr alloc(HeapValue h) { return make_expr(ex::Alloc{std::move(h)}); }
ExprPtr let(std::string name, ExprPtr bound, ExprPtr body) {
  return make_expr(ex::Let{std::move(name), std::move(bound), std::move(body)});
}
ExprPtr case_of(ValuePtr v, std::string left_name, ExprPtr left, std::string right_name,
                ExprPtr right) {
  return make_expr(ex::Case{std::move(v), std::move(left_name), std::move(left),
                            std::move(right_name), std::move(right)});
}
ExprPtr split(std::string first, std::string second, ValuePtr pair, ExprPtr body) {
  return make_expr(ex::Split{std::move(first), std::move(second), std::move(pair), std::move(body)});
}
ExprPtr app(ValuePtr fn, ValuePtr arg) { return make_expr(ex::App{std::move(fn), std::move(arg)}); }
ExprPtr call(std::string fn, ValuePtr arg) { return make_expr(ex::Call{std::move(fn), std::move(arg)}); }
ExprPtr unfold(ValuePtr v) { return make_expr(ex::Unfold{std::move(v)}); }
ExprPtr force(ValuePtr v) { return make_expr(ex::Force{std::move(v)}); }
ExprPtr save(std::uint64_t amount, ValuePtr v) { return make_expr(ex::Save{amount, std::move(v)}); }
ExprPtr spend(std::uint64_t amount, ValuePtr v, ExprPtr body) {
  return make_expr(ex::Spend{amount, std::move(v), std::move(body)});
}
ExprPtr pass(ValuePtr v) { return make_expr(ex::Pass{std::move(v)}); }

ValuePtr end() { return inl(unit()); }
ValuePtr cons(ValuePtr bit, ValuePtr tail) { return inr(pair(std::move(bit), std::move(tail))); }
ValuePtr zero() { return inl(unit()); }
ValuePtr one() { return inr(unit()); }

}  // namespace build

}  // namespace amortlab
