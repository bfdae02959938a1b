#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "ogre/lia.hpp"
#include "support/random_formula.hpp"

using namespace ogre;
using namespace ogre::testsupport;

namespace {

VarDecls decls_xy() {
  VarDecls d;
  d.declare("x", Sort::Int);
  d.declare("y", Sort::Int);
  return d;
}

lia::Result decide_str(const std::string& s, VarDecls& d) {
  return lia::decide(parse_formula(s, d));
}

} // namespace

TEST_CASE("ground and trivial cases") {
  VarDecls d = decls_xy();
  CHECK(lia::decide(mk_true()).status == lia::Status::Sat);
  CHECK(lia::decide(mk_false()).status == lia::Status::Unsat);
  CHECK(decide_str("(and (> x 0) (< x 1))", d).status == lia::Status::Unsat);
  auto r = decide_str("(> x 0)", d);
  REQUIRE(r.status == lia::Status::Sat);
  CHECK(std::get<int64_t>(r.model.get(*d.lookup("x"))) >= 1);
}

TEST_CASE("integrality is respected") {
  VarDecls d = decls_xy();
  // 2x = 2y + 1 has rational but no integer solutions
  CHECK(decide_str("(= (* 2 x) (+ (* 2 y) 1))", d).status ==
        lia::Status::Unsat);
  // 3x in [2,4] forces x = 1
  auto r = decide_str("(and (>= (* 3 x) 2) (<= (* 3 x) 4))", d);
  REQUIRE(r.status == lia::Status::Sat);
  CHECK(std::get<int64_t>(r.model.get(*d.lookup("x"))) == 1);
  // 5x in [3,4] has no integer solution
  CHECK(decide_str("(and (>= (* 5 x) 3) (<= (* 5 x) 4))", d).status ==
        lia::Status::Unsat);
}

TEST_CASE("equalities with non-unit coefficients") {
  VarDecls d = decls_xy();
  CHECK(decide_str("(= (+ (* 2 x) (* 4 y)) 7)", d).status ==
        lia::Status::Unsat);
  // 3x + 5y = 7 with x,y >= 0 has no integer solutions
  CHECK(decide_str("(and (= (+ (* 3 x) (* 5 y)) 7) (>= x 0) (>= y 0))", d)
            .status == lia::Status::Unsat);
  auto r = decide_str("(and (= (+ (* 3 x) (* 5 y)) 8) (>= x 0) (>= y 0))", d);
  REQUIRE(r.status == lia::Status::Sat);
  int64_t x = std::get<int64_t>(r.model.get(*d.lookup("x")));
  int64_t y = std::get<int64_t>(r.model.get(*d.lookup("y")));
  CHECK(3 * x + 5 * y == 8);
  CHECK(x >= 0);
  CHECK(y >= 0);
}

TEST_CASE("disequalities split correctly") {
  VarDecls d = decls_xy();
  CHECK(decide_str("(and (>= x 0) (<= x 2) (distinct x 0) (distinct x 1) "
                   "(distinct x 2))",
                   d)
            .status == lia::Status::Unsat);
  auto r = decide_str("(and (>= x 0) (<= x 2) (distinct x 0) (distinct x 2))",
                      d);
  REQUIRE(r.status == lia::Status::Sat);
  CHECK(std::get<int64_t>(r.model.get(*d.lookup("x"))) == 1);
}

TEST_CASE("boolean structure with theory atoms") {
  VarDecls d = decls_xy();
  d.declare("p", Sort::Bool);
  auto r = decide_str("(and (or p (> x 3)) (or (not p) (< x 0)) (= x 1))", d);
  CHECK(r.status == lia::Status::Unsat);
  auto r2 = decide_str("(and (or p (> x 3)) (or (not p) (< x 2)) (= x 1))", d);
  REQUIRE(r2.status == lia::Status::Sat);
  CHECK(std::get<bool>(r2.model.get(*d.lookup("p"))));
}

TEST_CASE("ite terms are handled") {
  VarDecls d = decls_xy();
  d.declare("g", Sort::Int);
  auto r = decide_str("(and (= x (ite (= g 1) 2 (ite (= g 3) 5 g))) (= g 3))",
                      d);
  REQUIRE(r.status == lia::Status::Sat);
  CHECK(std::get<int64_t>(r.model.get(*d.lookup("x"))) == 5);
  CHECK(decide_str(
            "(and (= x (ite (= g 1) 2 g)) (= g 1) (distinct x 2))", d)
            .status == lia::Status::Unsat);
}

TEST_CASE("div and mod by constants") {
  VarDecls d = decls_xy();
  CHECK(decide_str("(and (= x (div 7 2)) (distinct x 3))", d).status ==
        lia::Status::Unsat);
  CHECK(decide_str("(and (= x (mod (- 7) 2)) (distinct x 1))", d).status ==
        lia::Status::Unsat);
  auto r = decide_str("(and (= (div x 3) 2) (= (mod x 3) 1))", d);
  REQUIRE(r.status == lia::Status::Sat);
  CHECK(std::get<int64_t>(r.model.get(*d.lookup("x"))) == 7);
}

TEST_CASE("dead nonlinear definitions do not block a verdict") {
  VarDecls d = decls_xy();
  d.declare("z", Sort::Int);
  d.declare("zp", Sort::Int);
  // z' = z div x is dead: no other occurrence of z'
  auto r = decide_str("(and (> x 0) (= zp (div z x)) (< x 3))", d);
  REQUIRE(r.status == lia::Status::Sat);
  // and the model satisfies the definition
  CHECK(std::get<int64_t>(r.model.get(*d.lookup("zp"))) ==
        euclidean_div(std::get<int64_t>(r.model.get(*d.lookup("z"))),
                      std::get<int64_t>(r.model.get(*d.lookup("x")))));

  auto r2 = decide_str("(and (> x 0) (= zp (div z x)) (< x 0))", d);
  CHECK(r2.status == lia::Status::Unsat);
}

TEST_CASE("live nonlinear constraints: sound answers only") {
  VarDecls d = decls_xy();
  // x*y = 6 with x,y in [2,3]: sat, model must check out
  auto r = decide_str("(and (= (* x y) 6) (>= x 2) (<= x 3) (>= y 2) (<= y 3))",
                      d);
  if (r.status == lia::Status::Sat) {
    int64_t x = std::get<int64_t>(r.model.get(*d.lookup("x")));
    int64_t y = std::get<int64_t>(r.model.get(*d.lookup("y")));
    CHECK(x * y == 6);
  } else {
    CHECK(r.status == lia::Status::Unknown);
  }
}

TEST_CASE("random formulas agree with brute-force enumeration") {
  // The enumeration is the independent oracle: whenever it finds a model in
  // the box, the solver must answer Sat; whenever the solver claims Sat the
  // model must evaluate to true; and the solver must never claim Unsat when
  // the box contains a model.
  FormulaGen gen(987654321, 3, 2);
  gen.allow_divmod = true;
  std::vector<Formula> vars(gen.int_vars);
  vars.insert(vars.end(), gen.bool_vars.begin(), gen.bool_vars.end());

  int sat_seen = 0, unsat_seen = 0;
  for (int round = 0; round < 400; ++round) {
    Formula f = gen.bool_term(3);
    bool box_model = false;
    for_all_valuations(vars, 3, [&](const Valuation& v) {
      try {
        if (eval_bool(f, v)) {
          box_model = true;
          return false;
        }
      } catch (const EvalError&) {
        // division by zero on this valuation; skip it
      }
      return true;
    });
    lia::Result r = lia::decide(f);
    if (box_model) {
      REQUIRE_MESSAGE(r.status == lia::Status::Sat,
                      "solver lost a model for: " << f.to_string());
      ++sat_seen;
    }
    if (r.status == lia::Status::Sat) {
      try {
        CHECK_MESSAGE(eval_bool(f, r.model),
                      "bad model for: " << f.to_string());
      } catch (const EvalError&) {
        // model touches an underspecified division; acceptable
      }
    } else if (r.status == lia::Status::Unsat) {
      CHECK_MESSAGE(!box_model, "wrong unsat for: " << f.to_string());
      ++unsat_seen;
    }
  }
  // sanity: the generator exercises both outcomes
  CHECK(sat_seen > 50);
  CHECK(unsat_seen > 20);
}

TEST_CASE("splinter-heavy systems") {
  VarDecls d = decls_xy();
  // Pugh's classic: no integer solutions despite a dense rational region
  CHECK(decide_str("(and (<= 27 (+ (* 11 x) (* 13 y))) "
                   "(<= (+ (* 11 x) (* 13 y)) 45) "
                   "(<= (- 10) (- (* 7 x) (* 9 y))) "
                   "(<= (- (* 7 x) (* 9 y)) 4))",
                   d)
            .status == lia::Status::Unsat);
  auto r = decide_str("(and (<= 27 (+ (* 11 x) (* 13 y))) "
                      "(<= (+ (* 11 x) (* 13 y)) 45) "
                      "(<= (- 10) (- (* 7 x) (* 9 y))) "
                      "(<= (- (* 7 x) (* 9 y)) 5))",
                      d);
  REQUIRE(r.status == lia::Status::Sat);
  int64_t x = std::get<int64_t>(r.model.get(*d.lookup("x")));
  int64_t y = std::get<int64_t>(r.model.get(*d.lookup("y")));
  CHECK(11 * x + 13 * y >= 27);
  CHECK(11 * x + 13 * y <= 45);
  CHECK(7 * x - 9 * y >= -10);
  CHECK(7 * x - 9 * y <= 5);
}
