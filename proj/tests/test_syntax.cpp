#include <gtest/gtest.h>

#include "amortlab/parse.hpp"
#include "amortlab/pointer.hpp"
#include "amortlab/syntax.hpp"

using namespace amortlab;
using namespace amortlab::build;

TEST(Pointer, PathsAndOwnership) {
  Pointer r = Pointer::root(3);
  Pointer c = r.child(0).child(1);
  EXPECT_EQ(c.str(), "3.0.1");
  EXPECT_EQ(c.parent(), r.child(0));
  EXPECT_TRUE(c.is_under(r));
  EXPECT_FALSE(r.is_under(r));
  EXPECT_FALSE(Pointer::root(4).is_under(r));
  EXPECT_EQ(Pointer::parse("3.0.1"), c);
  EXPECT_FALSE(Pointer::parse("3..1"));
  EXPECT_FALSE(Pointer::parse(""));
  EXPECT_LT(Pointer::root(2), Pointer::root(10));
}

TEST(Syntax, StructuralEquality) {
  EXPECT_TRUE(equal(pair(unit(), inl(unit())), pair(unit(), inl(unit()))));
  EXPECT_FALSE(equal(inl(unit()), inr(unit())));
  EXPECT_TRUE(equal(let("x", ret(unit()), ret(var("x"))), let("x", ret(unit()), ret(var("x")))));
  EXPECT_FALSE(equal(let("x", ret(unit()), ret(var("x"))), let("y", ret(unit()), ret(var("y")))));
  EXPECT_TRUE(equal(HeapValue{hv::Lazy{"F", unit(), 2}}, HeapValue{hv::Lazy{"F", unit(), 2}}));
  EXPECT_FALSE(equal(HeapValue{hv::Lazy{"F", unit(), 2}}, HeapValue{hv::Lazy{"F", unit(), std::nullopt}}));
}

TEST(Syntax, FreeVariables) {
  ExprPtr e = let("x", ret(var("a")), case_of(var("x"), "l", ret(var("l")), "r", ret(var("b"))));
  EXPECT_EQ(free_vars(e), (std::set<std::string>{"a", "b"}));
  EXPECT_EQ(free_vars(lam("y", app(var("y"), var("z")))), std::set<std::string>{"z"});
  EXPECT_EQ(free_vars(split("p", "q", var("s"), ret(pair(var("p"), var("q"))))), std::set<std::string>{"s"});
}

TEST(Syntax, SubstitutionReplacesFreeOccurrencesOnly) {
  ExprPtr e = let("x", ret(var("x")), ret(var("x")));
  ExprPtr s = substitute(e, Subst{{"x", unit()}});
  EXPECT_TRUE(equal(s, let("x", ret(unit()), ret(var("x")))));
}

TEST(Syntax, SubstitutionAvoidsCapture) {
  // (lam y (app x y))[y/x] must not capture the substituted y.
  ValuePtr f = lam("y", app(var("x"), var("y")));
  ValuePtr out = substitute(f, Subst{{"x", var("y")}});
  const auto* l = out->as<val::Lam>();
  ASSERT_NE(l, nullptr);
  EXPECT_NE(l->param, "y");
  EXPECT_TRUE(equal(l->body, app(var("y"), var(l->param))));
  EXPECT_EQ(free_vars(out), std::set<std::string>{"y"});
}

TEST(Syntax, SubstitutionLeavesUntouchedBindersAlone) {
  ValuePtr f = lam("y", app(var("x"), var("y")));
  ValuePtr out = substitute(f, Subst{{"x", unit()}});
  EXPECT_TRUE(equal(out, lam("y", app(unit(), var("y")))));
}

TEST(Syntax, SubstitutionIntoLambdaThroughCaseBinders) {
  ExprPtr e = case_of(var("s"), "a", ret(pair(var("a"), var("b"))), "b", ret(var("b")));
  ExprPtr out = substitute(e, Subst{{"b", var("a")}});
  const auto* c = out->as<ex::Case>();
  ASSERT_NE(c, nullptr);
  // Left branch binds a, so the substituted a forces a rename there.
  EXPECT_NE(c->left_name, "a");
  EXPECT_TRUE(equal(c->left, ret(pair(var(c->left_name), var("a")))));
  // Right branch rebinds b: nothing to substitute.
  EXPECT_TRUE(equal(c->right, ret(var("b"))));
}

TEST(Syntax, FreshNameIsDeterministic) {
  EXPECT_EQ(fresh_name("x", {}), "x$1");
  EXPECT_EQ(fresh_name("x", {"x$1", "x$2"}), "x$3");
  EXPECT_EQ(fresh_name("x$7", {"x$1"}), "x$2");
}

TEST(Syntax, CollectsPointersAndCalls) {
  ExprPtr e = let("t", lazy("F", ptr(Pointer::root(1))), let("y", call("G", var("t")), force(ptr(Pointer::root(2)))));
  std::vector<Pointer> ps;
  collect_pointers(e, ps);
  EXPECT_EQ(ps.size(), 2u);
  std::set<std::string> calls;
  collect_calls(e, calls);
  EXPECT_EQ(calls, (std::set<std::string>{"F", "G"}));
}
