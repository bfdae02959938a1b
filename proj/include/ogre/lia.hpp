#pragma once

#include "ogre/logic.hpp"

#include <string>
#include <vector>

// Decision procedure for quantifier-free linear integer/boolean formulas:
// DPLL over the boolean skeleton with an Omega-test theory solver for
// conjunctions of linear integer constraints. Nonlinear subterms (variable
// divisors, products of variables) are abstracted by fresh symbols, which
// keeps Unsat answers sound; Sat answers are confirmed by evaluating the
// original formula under the candidate model, otherwise Unknown is returned.

namespace ogre::lia {

enum class Status { Sat, Unsat, Unknown };

struct Result {
  Status status = Status::Unknown;
  Valuation model;        // populated on Sat, total over free vars of input
  std::string diagnostic; // populated on Unknown
};

struct Budget {
  size_t max_theory_conflicts = 200000;
  size_t max_omega_systems = 2000000;
};

Result decide(Formula f, const Budget& budget = {});

} // namespace ogre::lia
