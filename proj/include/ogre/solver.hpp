#pragma once

#include "ogre/lia.hpp"
#include "ogre/logic.hpp"

#include <memory>
#include <string>
#include <vector>

namespace ogre {

enum class SatStatus { Sat, Unsat, Unknown };

struct SatAnswer {
  SatStatus status = SatStatus::Unknown;
  Valuation model; // populated on Sat
  std::string diagnostic;
};

// Satisfiability backend. Queries are independent of each other: a backend
// holds no assertions between check() calls.
class Solver {
public:
  virtual ~Solver() = default;
  // Checks satisfiability of the conjunction of `assertions`. `decls` lists
  // the variables the model must cover (a superset of the free variables).
  virtual SatAnswer check(const std::vector<Formula>& assertions,
                          const std::vector<Formula>& decls) = 0;
  virtual std::string name() const = 0;

  SatAnswer check(Formula assertion, const std::vector<Formula>& decls) {
    return check(std::vector<Formula>{assertion}, decls);
  }
};

// In-process backend over the bundled decision procedure.
class InternalSolver final : public Solver {
public:
  SatAnswer check(const std::vector<Formula>& assertions,
                  const std::vector<Formula>& decls) override;
  std::string name() const override { return "internal"; }
};

// ---------------------------------------------------------------------------
// Hoare triples via relational encoding

enum class HoareStatus { Holds, Fails, Unknown };

struct HoareAnswer {
  HoareStatus status = HoareStatus::Unknown;
  Valuation pre_state;  // witness on Fails
  Valuation post_state; // witness on Fails
  std::string diagnostic;
};

// Holds iff pre(V) and step(V,V') and not post(V') is unsatisfiable, where
// step encodes the guard on V, primed equalities for assignments, frame
// equalities for untouched variables, and leaves havoced variables free.
HoareAnswer check_hoare(Formula pre, const Statement& st, Formula post,
                        Solver& backend);

// Entailment and equivalence helpers; Unknown propagates.
enum class Truth { Yes, No, Unknown };
Truth entails(Formula lhs, Formula rhs, Solver& backend);
Truth equivalent(Formula lhs, Formula rhs, Solver& backend);

} // namespace ogre
