#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <variant>
#include <vector>

#include "amortlab/pointer.hpp"

namespace amortlab {

struct Value;
struct Expr;
using ValuePtr = std::shared_ptr<const Value>;
using ExprPtr = std::shared_ptr<const Expr>;

namespace val {
struct Var { std::string name; };
struct Ptr { Pointer ptr; };
struct Unit {};
struct Inl { ValuePtr inner; };
struct Inr { ValuePtr inner; };
struct Pair { ValuePtr first; ValuePtr second; };
struct Lam { std::string param; ExprPtr body; };
}  // namespace val

struct Value {
  std::variant<val::Var, val::Ptr, val::Unit, val::Inl, val::Inr, val::Pair, val::Lam> node;

  template <class T>
  const T* as() const { return std::get_if<T>(&node); }
};

namespace hv {
struct Fold { ValuePtr value; };
// `split` is the unshared cost reported by a `lazy!` node; only the
// debit-inheritance model reads it.
struct Lazy { std::string fn; ValuePtr arg; std::optional<std::uint64_t> split; };
struct Memo { ValuePtr value; };
}  // namespace hv

using HeapValue = std::variant<hv::Fold, hv::Lazy, hv::Memo>;

namespace ex {
struct Return { ValuePtr value; };
struct Alloc { HeapValue value; };
struct Let { std::string name; ExprPtr bound; ExprPtr body; };
struct Case {
  ValuePtr scrutinee;
  std::string left_name;
  ExprPtr left;
  std::string right_name;
  ExprPtr right;
};
struct Split { std::string first; std::string second; ValuePtr pair; ExprPtr body; };
struct App { ValuePtr fn; ValuePtr arg; };
struct Call { std::string fn; ValuePtr arg; };
struct Unfold { ValuePtr target; };
struct Force { ValuePtr target; };
struct Save { std::uint64_t amount; ValuePtr target; };
struct Spend { std::uint64_t amount; ValuePtr target; ExprPtr body; };
struct Pass { ValuePtr heir; };
}  // namespace ex

struct Expr {
  std::variant<ex::Return, ex::Alloc, ex::Let, ex::Case, ex::Split, ex::App, ex::Call,
               ex::Unfold, ex::Force, ex::Save, ex::Spend, ex::Pass>
      node;

  template <class T>
  const T* as() const { return std::get_if<T>(&node); }
};

struct FuncDef {
  std::string param;
  ExprPtr body;
};
using FuncEnv = std::map<std::string, FuncDef>;

// One entry of the optional (heap ...) block. Entry i is bound to root
// pointer i; `count` is the credit or debit annotation.
struct HeapEntry {
  std::string name;
  std::int64_t count = 0;
  HeapValue value;
};

struct Program {
  FuncEnv functions;
  ExprPtr main;
  std::vector<HeapEntry> heap;
};

// Structural equality. Lambda bodies compare syntactically, not up to
// alpha-equivalence.
bool equal(const Value& a, const Value& b);
bool equal(const Expr& a, const Expr& b);
bool equal(const HeapValue& a, const HeapValue& b);
bool equal(const ValuePtr& a, const ValuePtr& b);
bool equal(const ExprPtr& a, const ExprPtr& b);
bool equal(const FuncEnv& a, const FuncEnv& b);
bool equal(const Program& a, const Program& b);

using Subst = std::map<std::string, ValuePtr>;

ExprPtr substitute(const ExprPtr& e, const Subst& binding);
ValuePtr substitute(const ValuePtr& v, const Subst& binding);
HeapValue substitute(const HeapValue& h, const Subst& binding);

std::set<std::string> free_vars(const ExprPtr& e);
std::set<std::string> free_vars(const ValuePtr& v);
std::set<std::string> free_vars(const HeapValue& h);

void collect_pointers(const ValuePtr& v, std::vector<Pointer>& out);
void collect_pointers(const HeapValue& h, std::vector<Pointer>& out);
void collect_pointers(const ExprPtr& e, std::vector<Pointer>& out);

// Function names referenced by call and lazy nodes.
void collect_calls(const ExprPtr& e, std::set<std::string>& out);

// Smallest "base$N" not in `avoid`; an existing "$N" suffix on `base` is
// dropped first.
std::string fresh_name(const std::string& base, const std::set<std::string>& avoid);

namespace build {
ValuePtr var(std::string name);
ValuePtr ptr(Pointer p);
ValuePtr unit();
ValuePtr inl(ValuePtr v);
ValuePtr inr(ValuePtr v);
ValuePtr pair(ValuePtr a, ValuePtr b);
ValuePtr lam(std::string param, ExprPtr body);

ExprPtr ret(ValuePtr v);
ExprPtr fold(ValuePtr v);
ExprPtr lazy(std::string fn, ValuePtr arg);
ExprPtr lazy_split(std::uint64_t k1, std::string fn, ValuePtr arg);
ExprPtr memo(ValuePtr v);
ExprPtr alloc(HeapValue h);
ExprPtr let(std::string name, ExprPtr bound, ExprPtr body);
ExprPtr case_of(ValuePtr v, std::string left_name, ExprPtr left, std::string right_name,
                ExprPtr right);
ExprPtr split(std::string first, std::string second, ValuePtr pair, ExprPtr body);
ExprPtr app(ValuePtr fn, ValuePtr arg);
ExprPtr call(std::string fn, ValuePtr arg);
ExprPtr unfold(ValuePtr v);
ExprPtr force(ValuePtr v);
ExprPtr save(std::uint64_t amount, ValuePtr v);
ExprPtr spend(std::uint64_t amount, ValuePtr v, ExprPtr body);
ExprPtr pass(ValuePtr v);

// End = inl unit, Cons(b, a) = inr (pair b a), Zero = inl unit, One = inr unit.
ValuePtr end();
ValuePtr cons(ValuePtr bit, ValuePtr tail);
ValuePtr zero();
ValuePtr one();
}  // namespace build

}  // namespace amortlab
