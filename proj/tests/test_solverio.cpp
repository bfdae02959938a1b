#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "ogre/solverio.hpp"

using namespace ogre;

namespace {

SolverConfig smt_config() {
  SolverConfig cfg;
  cfg.command = OGRE_SMT_BIN;
  return cfg;
}

VarDecls decls_xy() {
  VarDecls d;
  d.declare("x", Sort::Int);
  d.declare("y", Sort::Int);
  return d;
}

} // namespace

TEST_CASE("unsat over the pipe") {
  VarDecls d = decls_xy();
  with_session(smt_config(), [&](SmtSession& s) {
    auto r = s.check_sat({parse_formula("(and (> x 0) (< x 1))", d)},
                         {*d.lookup("x")});
    CHECK(r.status == SatStatus::Unsat);
    return 0;
  });
}

TEST_CASE("sat with model") {
  VarDecls d = decls_xy();
  with_session(smt_config(), [&](SmtSession& s) {
    auto r = s.check_sat({parse_formula("(> x 0)", d)}, {*d.lookup("x")});
    REQUIRE(r.status == SatStatus::Sat);
    CHECK(std::get<int64_t>(r.model.get(*d.lookup("x"))) >= 1);
    return 0;
  });
}

TEST_CASE("negative model values are parsed") {
  VarDecls d = decls_xy();
  with_session(smt_config(), [&](SmtSession& s) {
    auto r = s.check_sat({parse_formula("(< x (- 5))", d)}, {*d.lookup("x")});
    REQUIRE(r.status == SatStatus::Sat);
    CHECK(std::get<int64_t>(r.model.get(*d.lookup("x"))) < -5);
    return 0;
  });
}

TEST_CASE("query isolation: sequential queries share no assertions") {
  VarDecls d = decls_xy();
  with_session(smt_config(), [&](SmtSession& s) {
    auto r1 = s.check_sat({parse_formula("(= x 5)", d)}, {*d.lookup("x")});
    REQUIRE(r1.status == SatStatus::Sat);
    // if the previous assertion leaked this would be unsat
    auto r2 = s.check_sat({parse_formula("(= x 6)", d)}, {*d.lookup("x")});
    CHECK(r2.status == SatStatus::Sat);
    auto r3 = s.check_sat({parse_formula("(= x 5)", d),
                           parse_formula("(= x 6)", d)},
                          {*d.lookup("x")});
    CHECK(r3.status == SatStatus::Unsat);
    return 0;
  });
}

TEST_CASE("order independence across a session") {
  VarDecls d = decls_xy();
  Formula a = parse_formula("(and (> x 0) (< x 0))", d);
  Formula b = parse_formula("(> y 3)", d);
  std::vector<Formula> decls{*d.lookup("x"), *d.lookup("y")};
  SatStatus first_a, second_a;
  with_session(smt_config(), [&](SmtSession& s) {
    first_a = s.check_sat({a}, decls).status;
    s.check_sat({b}, decls);
    second_a = s.check_sat({a}, decls).status;
    return 0;
  });
  CHECK(first_a == SatStatus::Unsat);
  CHECK(second_a == SatStatus::Unsat);
}

TEST_CASE("dead command yields Unknown, never a verdict") {
  VarDecls d = decls_xy();
  SolverConfig cfg;
  cfg.command = "true"; // exits immediately without answering
  cfg.timeout_ms = 500;
  with_session(cfg, [&](SmtSession& s) {
    auto r = s.check_sat({parse_formula("(> x 0)", d)}, {*d.lookup("x")});
    CHECK(r.status == SatStatus::Unknown);
    CHECK(!r.diagnostic.empty());
    return 0;
  });
}

TEST_CASE("timeout yields Unknown") {
  VarDecls d = decls_xy();
  SolverConfig cfg;
  cfg.command = "sleep 30"; // accepts input, never answers
  cfg.timeout_ms = 100;
  with_session(cfg, [&](SmtSession& s) {
    auto r = s.check_sat({parse_formula("(> x 0)", d)}, {*d.lookup("x")});
    CHECK(r.status == SatStatus::Unknown);
    return 0;
  });
}

TEST_CASE("body throwing still reaps the process") {
  VarDecls d = decls_xy();
  CHECK_THROWS_AS(with_session(smt_config(),
                               [&](SmtSession&) -> int {
                                 throw std::runtime_error("boom");
                               }),
                  std::runtime_error);
}

TEST_CASE("nonpositive timeout is rejected") {
  SolverConfig cfg = smt_config();
  cfg.timeout_ms = 0;
  CHECK_THROWS_AS(SmtSession{cfg}, std::invalid_argument);
}

TEST_CASE("logic derivation") {
  VarDecls d = decls_xy();
  CHECK(derive_logic({parse_formula("(> (+ x 1) y)", d)}) == "QF_LIA");
  CHECK(derive_logic({parse_formula("(> (* 2 x) y)", d)}) == "QF_LIA");
  CHECK(derive_logic({parse_formula("(> (* x y) 1)", d)}) == "QF_NIA");
  CHECK(derive_logic({parse_formula("(= y (div x y))", d)}) == "QF_NIA");
  CHECK(derive_logic({parse_formula("(= y (div x 2))", d)}) == "QF_LIA");
}

TEST_CASE("solver process backend matches the internal backend") {
  VarDecls d = decls_xy();
  SmtProcessSolver ext(smt_config());
  InternalSolver internal;
  std::vector<std::string> queries = {
      "(and (> x 0) (<= x 3) (= y (* 2 x)))",
      "(and (> x 0) (< x 0))",
      "(=> (> x 2) (> x 1))",
      "(and (distinct x y) (= x y))",
  };
  for (const auto& q : queries) {
    Formula f = parse_formula(q, d);
    std::vector<Formula> decls{*d.lookup("x"), *d.lookup("y")};
    CHECK(ext.check({f}, decls).status == internal.check({f}, decls).status);
  }
}
