#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "ogre/logic.hpp"
#include "support/random_formula.hpp"

#include <random>

using namespace ogre;
using namespace ogre::testsupport;

namespace {

VarDecls xyz_decls() {
  VarDecls d;
  d.declare("x", Sort::Int);
  d.declare("y", Sort::Int);
  d.declare("z", Sort::Int);
  return d;
}

} // namespace

TEST_CASE("parse basic terms") {
  VarDecls d = xyz_decls();
  Formula f = parse_formula("(> x 0)", d);
  CHECK(f.kind() == Kind::Gt);
  CHECK(f.to_string() == "(> x 0)");

  Formula g = parse_formula("(and (<= y x) (> x 1))", d);
  CHECK(g.kind() == Kind::And);
  CHECK(g.arity() == 2);
  CHECK(g.to_string() == "(and (<= y x) (> x 1))");
}

TEST_CASE("parse errors carry positions") {
  VarDecls d = xyz_decls();
  CHECK_THROWS_AS(parse_formula("(> x true)", d), SortError);
  CHECK_THROWS_AS(parse_formula("(> x", d), ParseError);
  CHECK_THROWS_AS(parse_formula("(> x w)", d), ParseError);
  try {
    parse_formula("(and (> x 0)\n  (< y ))", d);
    CHECK(false);
  } catch (const ParseError& e) {
    CHECK(e.line == 2);
  }
}

TEST_CASE("interning gives identity equality") {
  VarDecls d = xyz_decls();
  Formula a = parse_formula("(and (> x 0) (< y 2))", d);
  Formula b = parse_formula("(and (> x 0) (< y 2))", d);
  CHECK(a == b);
  CHECK(a.id() == b.id());
}

TEST_CASE("canonicalization: flattening and constant collapse") {
  VarDecls d = xyz_decls();
  Formula nested = parse_formula("(and (> x 0) (and (> y 0) (> z 0)))", d);
  Formula flat = parse_formula("(and (> x 0) (> y 0) (> z 0))", d);
  CHECK(nested == flat);

  CHECK(parse_formula("(and (> x 0) true)", d) == parse_formula("(> x 0)", d));
  CHECK(parse_formula("(and (> x 0) false)", d).is_false());
  CHECK(parse_formula("(or (> x 0) true)", d).is_true());
  CHECK(parse_formula("(+ 1 2)", d) == mk_int(3));
  CHECK(parse_formula("(> 1 0)", d).is_true());
  // no rewriting beyond that: implications of constants inside stay put
  Formula imp = parse_formula("(=> (> x 0) (> x 0))", d);
  CHECK(imp.kind() == Kind::Implies);
}

TEST_CASE("empty conjunction and disjunction conventions") {
  CHECK(mk_and({}).is_true());
  CHECK(mk_or({}).is_false());
}

TEST_CASE("dag_size counts distinct nodes") {
  VarDecls d = xyz_decls();
  CHECK(mk_true().dag_size() == 1);
  CHECK(parse_formula("(> x 0)", d).dag_size() == 3);
  Formula atom = parse_formula("(> x 0)", d);
  Formula conj = mk_and({atom, atom});
  CHECK(conj.arity() == 2);
  CHECK(conj.dag_size() == 4); // shared subterm counted once
}

TEST_CASE("round-trip: parse(print(f)) is identical") {
  VarDecls d;
  FormulaGen gen(20250810, 3, 2);
  for (const Formula& v : gen.int_vars)
    d.declare(v.var_name(), Sort::Int);
  for (const Formula& v : gen.bool_vars)
    d.declare(v.var_name(), Sort::Bool);
  gen.allow_divmod = true;
  for (int i = 0; i < 300; ++i) {
    Formula f = gen.bool_term(3);
    Formula g = parse_formula(f.to_string(), d);
    REQUIRE(f == g);
    CHECK(f.dag_size() == g.dag_size());
  }
}

TEST_CASE("substitution") {
  VarDecls d = xyz_decls();
  Formula x = *d.lookup("x"), y = *d.lookup("y");
  Formula f = parse_formula("(<= y x)", d);
  Formula g = substitute(f, {{x, parse_formula("(+ x 1)", d)}});
  CHECK(g == parse_formula("(<= y (+ x 1))", d));
  CHECK(substitute(f, {}) == f);

  Formula h = parse_formula("(and (> x 2) (< y x))", d);
  Formula h2 = substitute(h, {{x, parse_formula("(+ x 1)", d)}});
  CHECK(h2 == parse_formula("(and (> (+ x 1) 2) (< y (+ x 1)))", d));

  CHECK_THROWS_AS(substitute(f, {{x, mk_true()}}), SortError);
  (void)y;
}

TEST_CASE("substitute is a homomorphism under eval") {
  FormulaGen gen(42, 3, 1);
  std::mt19937 rng(7);
  for (int round = 0; round < 50; ++round) {
    Formula f = gen.bool_term(3);
    std::map<Formula, Formula> sub;
    sub[gen.int_vars[0]] = gen.int_term(2);
    sub[gen.int_vars[1]] = gen.int_term(1);
    Formula g = substitute(f, sub);
    // eval(sub(f), v) == eval(f, v') where v'(x) = eval(sub(x), v)
    std::vector<Formula> vars(gen.int_vars);
    vars.insert(vars.end(), gen.bool_vars.begin(), gen.bool_vars.end());
    Valuation v;
    for (const Formula& var : vars) {
      if (var.sort() == Sort::Int)
        v.set(var, (int64_t)(rng() % 9) - 4);
      else
        v.set(var, (rng() & 1) == 0);
    }
    Valuation vprime = v;
    for (const auto& [var, expr] : sub)
      vprime.set(var, eval(expr, v));
    CHECK(eval_bool(g, v) == eval_bool(f, vprime));
  }
}

TEST_CASE("eval semantics") {
  VarDecls d = xyz_decls();
  Formula x = *d.lookup("x"), y = *d.lookup("y"), z = *d.lookup("z");
  Valuation v;
  v.set(x, int64_t(1));
  CHECK(eval_bool(parse_formula("(> x 0)", d), v));

  Valuation v2;
  v2.set(x, int64_t(2));
  v2.set(y, int64_t(2));
  CHECK(eval_bool(parse_formula("(and (<= y x) (> x 1))", d), v2));

  Valuation v3;
  v3.set(z, int64_t(7));
  v3.set(x, int64_t(2));
  CHECK(std::get<int64_t>(eval(parse_formula("(div z x)", d), v3)) == 3);

  Valuation v4;
  v4.set(z, int64_t(7));
  v4.set(x, int64_t(0));
  CHECK_THROWS_AS(eval(parse_formula("(div z x)", d), v4), EvalError);
}

TEST_CASE("euclidean division follows the SMT-LIB convention") {
  CHECK(euclidean_div(7, 2) == 3);
  CHECK(euclidean_mod(7, 2) == 1);
  CHECK(euclidean_div(-7, 2) == -4);
  CHECK(euclidean_mod(-7, 2) == 1);
  CHECK(euclidean_div(7, -2) == -3);
  CHECK(euclidean_mod(7, -2) == 1);
  CHECK(euclidean_div(-7, -2) == 4);
  CHECK(euclidean_mod(-7, -2) == 1);
  // identity a = b*q + r with 0 <= r < |b|
  for (int64_t a = -20; a <= 20; ++a) {
    for (int64_t b = -5; b <= 5; ++b) {
      if (b == 0)
        continue;
      int64_t q = euclidean_div(a, b), r = euclidean_mod(a, b);
      CHECK(a == b * q + r);
      CHECK(r >= 0);
      CHECK(r < (b < 0 ? -b : b));
    }
  }
}

TEST_CASE("statements validate their invariants") {
  VarDecls d = xyz_decls();
  Formula x = *d.lookup("x");
  CHECK_THROWS_AS(Statement(mk_true(), {{x, parse_formula("(+ x 1)", d)}},
                            {x}),
                  SortError);
  CHECK_THROWS_AS(Statement(parse_formula("x", d), {}, {}), SortError);
}

TEST_CASE("wp") {
  VarDecls d = xyz_decls();
  Formula x = *d.lookup("x"), y = *d.lookup("y"), z = *d.lookup("z");
  (void)y;

  // blocked guard: wp(assume x>0, false) = x>0 => false
  Statement st = Statement::assume(parse_formula("(> x 0)", d));
  WpResult w = wp(st, mk_false());
  CHECK(w.formula == mk_implies(parse_formula("(> x 0)", d), mk_false()));
  CHECK(w.universals.empty());

  // substitution case, checked below by brute force as well
  Statement inc = Statement::assign(x, parse_formula("(+ x 1)", d));
  WpResult w2 = wp(inc, parse_formula("(< y x)", d));
  CHECK(w2.formula ==
        mk_implies(mk_true(), parse_formula("(< y (+ x 1))", d)));

  // havoc of a variable the postcondition ignores
  Statement hav(mk_true(), {}, {z});
  WpResult w3 = wp(hav, parse_formula("(> x 0)", d));
  CHECK(w3.formula == mk_implies(mk_true(), parse_formula("(> x 0)", d)));
  CHECK(w3.universals.empty());

  // havoc that matters introduces a universal fresh symbol
  WpResult w4 = wp(hav, parse_formula("(> z 0)", d));
  CHECK(w4.universals.size() == 1);
}

TEST_CASE("wp agrees with operational semantics on small valuations") {
  // wp(st, post) holds in v  iff  every st-successor of v satisfies post
  VarDecls d = xyz_decls();
  Formula x = *d.lookup("x"), y = *d.lookup("y");
  Statement inc = Statement::assign(x, parse_formula("(+ x 1)", d));
  Formula post = parse_formula("(< y x)", d);
  WpResult w = wp(inc, post);
  std::vector<Formula> vars{x, y};
  for_all_valuations(vars, 4, [&](const Valuation& v) {
    bool wp_holds = eval_bool(w.formula, v);
    Valuation succ = v;
    succ.set(x, std::get<int64_t>(v.get(x)) + 1);
    bool post_holds = eval_bool(post, succ);
    CHECK(wp_holds == post_holds);
    return true;
  });
}
