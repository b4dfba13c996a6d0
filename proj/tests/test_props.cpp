#include <doctest.h>

#include <cmath>

#include "fixtures.hpp"
#include "rnncert/props.hpp"
#include "rnncert/rng.hpp"

using namespace rnncert;

namespace {

LinConstraint parse_upper(VarId v, double coef_t, double rhs) {
  // v <= coef_t * t + rhs  ->  v - coef_t t - rhs <= 0
  LinExpr e;
  e.add(v, 1.0).add(VarId::time(), -coef_t);
  return LinConstraint::make(e, Rel::LessEq, rhs);
}

LinExpr random_expr(SplitMix64& rng, const std::vector<VarId>& vars) {
  LinExpr e;
  for (const auto& v : vars)
    if (rng.uniform() < 0.7) e.add(v, rng.uniform(-3.0, 3.0));
  e.constant = rng.uniform(-2.0, 2.0);
  return e;
}

}  // namespace

TEST_SUITE("props") {

TEST_CASE("instantiation leaves t-free constraints alone") {
  auto cs = box_constraints(VarId::input(0), -3.0, 3.0);
  auto inst = instantiate_at(cs, 4, 5);
  std::map<VarId, double> a{{VarId::input(0), -3.0}};
  CHECK(inst[0].satisfied(a));
  CHECK(inst[1].satisfied(a));
  a[VarId::input(0)] = 3.2;
  CHECK(!inst[1].satisfied(a));
}

TEST_CASE("instantiating a memory bound folds t into the constant") {
  // v^m <= 3 (t-1), at t=5: v^m <= 12.
  LinConstraint c = parse_upper(VarId::memory(1, 0), 3.0, -3.0);
  LinConstraint at5 = instantiate_at(c, 5, 5);
  CHECK(at5.lhs.terms.count(VarId::time()) == 0);
  std::map<VarId, double> a{{VarId::memory(1, 0), 12.0}};
  CHECK(at5.satisfied(a));
  a[VarId::memory(1, 0)] = 12.1;
  CHECK(!at5.satisfied(a));
}

TEST_CASE("affine-in-t input bounds instantiate to shifted boxes") {
  // 4t <= x <= 5t at t=2 -> 8 <= x <= 10.
  LinExpr lo_e;
  lo_e.add(VarId::input(0), 1.0).add(VarId::time(), -4.0);
  LinExpr hi_e;
  hi_e.add(VarId::input(0), 1.0).add(VarId::time(), -5.0);
  std::vector<LinConstraint> cs{LinConstraint{lo_e, Rel::GreaterEq},
                                LinConstraint{hi_e, Rel::LessEq}};
  auto inst = instantiate_at(cs, 2, 5);
  std::map<VarId, double> a{{VarId::input(0), 8.0}};
  CHECK(inst[0].satisfied(a));
  CHECK(inst[1].satisfied(a));
  a[VarId::input(0)] = 10.0;
  CHECK(inst[1].satisfied(a));
  a[VarId::input(0)] = 10.5;
  CHECK(!inst[1].satisfied(a));
  CHECK_THROWS_AS(instantiate_at(cs, 6, 5), StructureError);
}

TEST_CASE("instantiate-then-evaluate commutes with evaluate-then-substitute") {
  SplitMix64 rng(21);
  std::vector<VarId> vars{VarId::input(0), VarId::input(1), VarId::memory(1, 0), VarId::time()};
  for (int iter = 0; iter < 200; ++iter) {
    LinExpr e = random_expr(rng, vars);
    LinConstraint c{e, Rel::LessEq};
    int t = rng.uniform_int(1, 6);
    std::map<VarId, double> a;
    for (const auto& v : vars) a[v] = rng.uniform(-4.0, 4.0);
    a[VarId::time()] = t;
    LinConstraint inst = instantiate_at(c, t, 6);
    std::map<VarId, double> a_no_t = a;
    a_no_t.erase(VarId::time());
    a_no_t[VarId::time()] = 0.0;  // coefficient removed; value irrelevant
    CHECK(std::fabs(inst.lhs.evaluate(a) - c.lhs.evaluate(a)) < 1e-12);
  }
}

TEST_CASE("negation flips the relation and keeps the expression") {
  LinConstraint c = parse_upper(VarId::hidden(1, 0), 3.0, 0.0);  // v <= 3t
  LinConstraint n = negate_bound(c);
  CHECK(n.rel == Rel::GreaterEq);
  CHECK(n.lhs.coef(VarId::time()) == -3.0);

  LinExpr ge;
  ge.add(VarId::output(0), 1.0);
  LinConstraint c2 = LinConstraint::make(ge, Rel::GreaterEq, 0.0);
  CHECK(negate_bound(c2).rel == Rel::LessEq);

  LinExpr mixed;
  mixed.add(VarId::hidden(1, 0), 2.0).add(VarId::time(), -1.0);
  LinConstraint c3 = LinConstraint::make(mixed, Rel::LessEq, 5.0);
  LinConstraint n3 = negate_bound(c3);
  CHECK(n3.rel == Rel::GreaterEq);
  CHECK(n3.lhs.constant == c3.lhs.constant);

  LinConstraint eq{LinExpr{}, Rel::Equal};
  CHECK_THROWS_AS(negate_bound(eq), StructureError);
}

TEST_CASE("negation is an involution") {
  SplitMix64 rng(22);
  std::vector<VarId> vars{VarId::output(0), VarId::time()};
  for (int i = 0; i < 100; ++i) {
    LinConstraint c{random_expr(rng, vars), rng.uniform_int(0, 1) ? Rel::LessEq : Rel::GreaterEq};
    LinConstraint nn = negate_bound(negate_bound(c));
    CHECK(nn.rel == c.rel);
    CHECK(nn.lhs.constant == c.lhs.constant);
    CHECK(nn.lhs.terms == c.lhs.terms);
  }
}

TEST_CASE("box derivation on a plain interval") {
  auto cs = box_constraints(VarId::input(0), -3.0, 3.0);
  Box box = derive_box(cs, std::pair{1.0, 5.0});
  CHECK(box.intervals.at(VarId::input(0)).lo == doctest::Approx(-3.0));
  CHECK(box.intervals.at(VarId::input(0)).hi == doctest::Approx(3.0));
  CHECK(box.intervals.at(VarId::time()).lo == doctest::Approx(1.0));
  CHECK(box.intervals.at(VarId::time()).hi == doctest::Approx(5.0));
}

TEST_CASE("box derivation solves the coupled memory bound by LP") {
  // v^m <= 3(t-1) and v^m >= 0 with t in [1,5] -> v^m in [0, 12].
  std::vector<LinConstraint> cs;
  cs.push_back(parse_upper(VarId::memory(1, 0), 3.0, -3.0));
  LinExpr lo;
  lo.add(VarId::memory(1, 0), 1.0);
  cs.push_back(LinConstraint::make(lo, Rel::GreaterEq, 0.0));
  Box box = derive_box(cs, std::pair{1.0, 5.0});
  CHECK(box.intervals.at(VarId::memory(1, 0)).lo == doctest::Approx(0.0));
  CHECK(box.intervals.at(VarId::memory(1, 0)).hi == doctest::Approx(12.0));
}

TEST_CASE("missing lower bound raises UnboundedVariable") {
  LinExpr e;
  e.add(VarId::input(0), 1.0);
  std::vector<LinConstraint> cs{LinConstraint::make(e, Rel::LessEq, 5.0)};
  CHECK_THROWS_AS(derive_box(cs, std::nullopt), UnboundedVariableError);
}

TEST_CASE("derived boxes contain sampled satisfying assignments") {
  SplitMix64 rng(23);
  for (int iter = 0; iter < 10; ++iter) {
    // A random box plus redundant diagonal cuts; sample from the core box.
    int n = rng.uniform_int(1, 3);
    std::vector<LinConstraint> cs;
    std::vector<std::pair<double, double>> core;
    for (int j = 0; j < n; ++j) {
      double lo = rng.uniform(-4.0, 0.0), hi = lo + rng.uniform(0.5, 5.0);
      core.push_back({lo, hi});
      auto b = box_constraints(VarId::input(j), lo - rng.uniform(0.0, 2.0),
                               hi + rng.uniform(0.0, 2.0));
      cs.insert(cs.end(), b.begin(), b.end());
      auto tight = box_constraints(VarId::input(j), lo, hi);
      cs.insert(cs.end(), tight.begin(), tight.end());
    }
    LinExpr diag;
    for (int j = 0; j < n; ++j) diag.add(VarId::input(j), 1.0);
    cs.push_back(LinConstraint::make(diag, Rel::LessEq, 100.0));
    Box box = derive_box(cs, std::nullopt);
    for (int s = 0; s < 1000; ++s) {
      for (int j = 0; j < n; ++j) {
        double v = rng.uniform(core[j].first, core[j].second);
        CHECK(box.intervals.at(VarId::input(j)).contains(v));
      }
    }
  }
}

TEST_CASE("query validation") {
  auto net = std::make_shared<RnnNetwork>(test::make_single_memory_toy());
  InputProperty p{box_constraints(VarId::input(0), -3.0, 3.0)};
  LinExpr q;
  q.add(VarId::output(0), 1.0);
  OutputProperty out = OutputProperty::any_step({{LinConstraint::make(q, Rel::GreaterEq, 16.0)}});
  CHECK_NOTHROW(RnnQuery(p, net, out, 5));
  CHECK_THROWS_AS(RnnQuery(p, net, out, 0), StructureError);
  CHECK_THROWS_AS(RnnQuery(p, net, OutputProperty::any_step({}), 5), StructureError);
  CHECK_THROWS_AS(RnnQuery(p, net, OutputProperty::fixed(out.disjuncts, 9), 5), StructureError);
}

TEST_CASE("invariant sets expose their membership constraints") {
  InvariantSet inv;
  inv.set({1, 0, 0.0, 3.0});
  auto cs = inv.constraints();
  REQUIRE(cs.size() == 2);
  std::map<VarId, double> a{{VarId::memory(1, 0), 11.9}, {VarId::time(), 5.0}};
  CHECK(cs[0].satisfied(a));
  a[VarId::memory(1, 0)] = 12.1;
  CHECK(!cs[0].satisfied(a));
  a[VarId::memory(1, 0)] = -0.1;
  CHECK(!cs[1].satisfied(a));
  CHECK_THROWS_AS(inv.set({1, 1, 2.0, 1.0}), StructureError);
}

}  // TEST_SUITE
