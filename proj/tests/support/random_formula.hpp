#pragma once

#include "ogre/logic.hpp"

#include <random>
#include <vector>

// Random formula generation and brute-force evaluation helpers shared by the
// logic and solver test suites.

namespace ogre::testsupport {

struct FormulaGen {
  std::mt19937 rng;
  std::vector<Formula> int_vars;
  std::vector<Formula> bool_vars;
  bool allow_divmod = false;

  explicit FormulaGen(uint32_t seed, int n_int = 3, int n_bool = 2)
      : rng(seed) {
    for (int i = 0; i < n_int; ++i)
      int_vars.push_back(mk_var("v" + std::to_string(i), Sort::Int));
    for (int i = 0; i < n_bool; ++i)
      bool_vars.push_back(mk_var("b" + std::to_string(i), Sort::Bool));
  }

  int pick(int n) { return std::uniform_int_distribution<int>(0, n - 1)(rng); }

  Formula int_term(int depth) {
    if (depth == 0) {
      if (pick(2) == 0 && !int_vars.empty())
        return int_vars[pick((int)int_vars.size())];
      return mk_int(pick(9) - 4);
    }
    switch (pick(allow_divmod ? 6 : 4)) {
    case 0: return mk_add({int_term(depth - 1), int_term(depth - 1)});
    case 1: return mk_sub({int_term(depth - 1), int_term(depth - 1)});
    case 2: return mk_mul({mk_int(pick(5) - 2), int_term(depth - 1)});
    case 3: return mk_ite(bool_term(depth - 1), int_term(depth - 1),
                          int_term(depth - 1));
    case 4: return mk_div(int_term(depth - 1), mk_int(pick(3) + 1));
    default: return mk_mod(int_term(depth - 1), mk_int(pick(3) + 2));
    }
  }

  Formula bool_term(int depth) {
    if (depth == 0) {
      if (!bool_vars.empty() && pick(3) == 0)
        return bool_vars[pick((int)bool_vars.size())];
      Formula a = int_term(0), b = int_term(0);
      switch (pick(4)) {
      case 0: return mk_lt(a, b);
      case 1: return mk_le(a, b);
      case 2: return mk_eq(a, b);
      default: return mk_gt(a, b);
      }
    }
    switch (pick(6)) {
    case 0: return mk_and({bool_term(depth - 1), bool_term(depth - 1)});
    case 1: return mk_or({bool_term(depth - 1), bool_term(depth - 1)});
    case 2: return mk_not(bool_term(depth - 1));
    case 3: return mk_implies(bool_term(depth - 1), bool_term(depth - 1));
    case 4: {
      Formula a = int_term(depth - 1), b = int_term(depth - 1);
      return pick(2) ? mk_le(a, b) : mk_distinct(a, b);
    }
    default: {
      Formula a = int_term(depth - 1), b = int_term(depth - 1);
      return mk_eq(a, b);
    }
    }
  }
};

// Enumerates all valuations of `vars` with integers in [-bound, bound].
// Calls fn for each; stops early when fn returns false.
template <typename Fn>
void for_all_valuations(const std::vector<Formula>& vars, int bound, Fn&& fn) {
  std::vector<int64_t> idx(vars.size(), 0);
  std::vector<int64_t> radix(vars.size());
  for (size_t i = 0; i < vars.size(); ++i)
    radix[i] = vars[i].sort() == Sort::Int ? 2 * bound + 1 : 2;
  for (;;) {
    Valuation val;
    for (size_t i = 0; i < vars.size(); ++i) {
      if (vars[i].sort() == Sort::Int)
        val.set(vars[i], idx[i] - bound);
      else
        val.set(vars[i], idx[i] == 1);
    }
    if (!fn(val))
      return;
    size_t i = 0;
    for (; i < vars.size(); ++i) {
      if (++idx[i] < radix[i])
        break;
      idx[i] = 0;
    }
    if (i == vars.size())
      return;
  }
}

} // namespace ogre::testsupport
