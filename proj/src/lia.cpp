#include "ogre/lia.hpp"

#include <algorithm>
#include <cassert>
#include <deque>
#include <numeric>
#include <unordered_map>
#include <unordered_set>

namespace ogre::lia {

namespace {

struct BudgetExceeded : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct Overflow : std::runtime_error {
  Overflow() : std::runtime_error("coefficient overflow") {}
};

int64_t checked(__int128 v) {
  if (v > INT64_MAX || v < INT64_MIN)
    throw Overflow();
  return static_cast<int64_t>(v);
}
int64_t add_c(int64_t a, int64_t b) { return checked(__int128(a) + b); }
int64_t mul_c(int64_t a, int64_t b) { return checked(__int128(a) * b); }

int64_t floor_div(int64_t a, int64_t b) {
  assert(b > 0);
  int64_t q = a / b;
  if (a % b != 0 && a < 0)
    --q;
  return q;
}
int64_t ceil_div(int64_t a, int64_t b) {
  assert(b > 0);
  return -floor_div(-a, b);
}

// ---------------------------------------------------------------------------
// Preprocessing at the formula level

// Occurrence counts with DAG multiplicities (number of tree occurrences).
std::unordered_map<uint32_t, uint64_t> var_occurrences(Formula f) {
  // topological multiplicity propagation
  std::unordered_map<uint32_t, uint64_t> mult;
  std::vector<Formula> order;
  {
    std::unordered_set<uint32_t> seen;
    std::vector<std::pair<Formula, bool>> stack{{f, false}};
    while (!stack.empty()) {
      auto [g, done] = stack.back();
      stack.pop_back();
      if (done) {
        order.push_back(g);
        continue;
      }
      if (!seen.insert(g.id()).second)
        continue;
      stack.push_back({g, true});
      for (const Formula& c : g.children())
        stack.push_back({c, false});
    }
  }
  std::reverse(order.begin(), order.end()); // parents before children
  mult[f.id()] = 1;
  std::unordered_map<uint32_t, uint64_t> occ;
  for (const Formula& g : order) {
    uint64_t m = mult[g.id()];
    if (m == 0)
      m = mult[g.id()] = 1; // root duplicates are capped, counts stay sound
    if (g.kind() == Kind::Var)
      occ[g.id()] += m;
    for (const Formula& c : g.children()) {
      uint64_t& cm = mult[c.id()];
      cm = std::min<uint64_t>(cm + m, UINT64_MAX / 2);
    }
  }
  return occ;
}

// Drops top-level conjuncts (= v t) where v occurs nowhere else. Such a
// definition is always satisfiable by choosing v, so it cannot affect the
// verdict; this is what removes dead nonlinear update chains. The dropped
// definitions are reported so models can be repaired afterwards.
Formula drop_dead_definitions(Formula f,
                              std::vector<std::pair<Formula, Formula>>& dropped) {
  if (f.kind() != Kind::And)
    return f;
  bool changed = true;
  while (changed && f.kind() == Kind::And) {
    changed = false;
    auto occ = var_occurrences(f);
    std::vector<Formula> kept;
    for (const Formula& c : f.children()) {
      bool dead = false;
      if (c.kind() == Kind::Eq) {
        for (int side = 0; side < 2 && !dead; ++side) {
          Formula v = c.child(side), t = c.child(1 - side);
          if (v.kind() == Kind::Var && occ[v.id()] == 1 &&
              !t.free_vars().count(v)) {
            dropped.push_back({v, t});
            dead = true;
          }
        }
      }
      if (dead)
        changed = true;
      else
        kept.push_back(c);
    }
    if (changed)
      f = mk_and(std::move(kept));
  }
  return f;
}

// Replaces every occurrence of `target` (a non-variable subterm) in f.
Formula replace_term(Formula f, Formula target, Formula repl,
                     std::unordered_map<uint32_t, Formula>& memo) {
  if (f == target)
    return repl;
  auto it = memo.find(f.id());
  if (it != memo.end())
    return it->second;
  Formula result = f;
  if (f.arity() > 0) {
    std::vector<Formula> kids;
    bool changed = false;
    for (const Formula& c : f.children()) {
      Formula nc = replace_term(c, target, repl, memo);
      changed |= nc != c;
      kids.push_back(nc);
    }
    if (changed) {
      switch (f.kind()) {
      case Kind::Add: result = mk_add(std::move(kids)); break;
      case Kind::Sub: result = mk_sub(std::move(kids)); break;
      case Kind::Neg: result = mk_neg(kids[0]); break;
      case Kind::Mul: result = mk_mul(std::move(kids)); break;
      case Kind::Div: result = mk_div(kids[0], kids[1]); break;
      case Kind::Mod: result = mk_mod(kids[0], kids[1]); break;
      case Kind::Lt: result = mk_lt(kids[0], kids[1]); break;
      case Kind::Le: result = mk_le(kids[0], kids[1]); break;
      case Kind::Gt: result = mk_gt(kids[0], kids[1]); break;
      case Kind::Ge: result = mk_ge(kids[0], kids[1]); break;
      case Kind::Eq: result = mk_eq(kids[0], kids[1]); break;
      case Kind::Distinct: result = mk_distinct(kids[0], kids[1]); break;
      case Kind::And: result = mk_and(std::move(kids)); break;
      case Kind::Or: result = mk_or(std::move(kids)); break;
      case Kind::Not: result = mk_not(kids[0]); break;
      case Kind::Implies: result = mk_implies(kids[0], kids[1]); break;
      case Kind::Ite: result = mk_ite(kids[0], kids[1], kids[2]); break;
      default: break;
      }
    }
  }
  memo.emplace(f.id(), result);
  return result;
}

std::optional<Formula> find_int_ite(Formula f) {
  std::unordered_set<uint32_t> seen;
  std::vector<Formula> stack{f};
  std::optional<Formula> best;
  while (!stack.empty()) {
    Formula g = stack.back();
    stack.pop_back();
    if (!seen.insert(g.id()).second)
      continue;
    if (g.kind() == Kind::Ite && g.sort() == Sort::Int) {
      // prefer an innermost ite so each split strictly shrinks the atom
      std::optional<Formula> inner = find_int_ite(g.child(1));
      if (!inner)
        inner = find_int_ite(g.child(2));
      return inner ? inner : std::optional<Formula>(g);
    }
    for (const Formula& c : g.children())
      stack.push_back(c);
  }
  return best;
}

bool is_atom_kind(Kind k) {
  switch (k) {
  case Kind::Lt:
  case Kind::Le:
  case Kind::Gt:
  case Kind::Ge:
  case Kind::Eq:
  case Kind::Distinct:
    return true;
  default:
    return false;
  }
}

// Pulls integer-sorted ite out of comparison atoms:
//   A[ite(c,a,b)]  becomes  (c and A[a]) or ((not c) and A[b]).
Formula lift_int_ite(Formula f, std::unordered_map<uint32_t, Formula>& memo) {
  auto it = memo.find(f.id());
  if (it != memo.end())
    return it->second;
  Formula result = f;
  if (is_atom_kind(f.kind()) && f.child(0).sort() == Sort::Int) {
    auto ite = find_int_ite(f);
    if (ite) {
      std::unordered_map<uint32_t, Formula> m1, m2;
      Formula then_atom = replace_term(f, *ite, ite->child(1), m1);
      Formula else_atom = replace_term(f, *ite, ite->child(2), m2);
      Formula cond = ite->child(0);
      result = mk_or({mk_and({cond, lift_int_ite(then_atom, memo)}),
                      mk_and({mk_not(cond), lift_int_ite(else_atom, memo)})});
    }
  } else if (f.sort() == Sort::Bool && f.arity() > 0) {
    std::vector<Formula> kids;
    bool changed = false;
    for (const Formula& c : f.children()) {
      Formula nc = c.sort() == Sort::Bool ? lift_int_ite(c, memo) : c;
      changed |= nc != c;
      kids.push_back(nc);
    }
    if (changed) {
      switch (f.kind()) {
      case Kind::And: result = mk_and(std::move(kids)); break;
      case Kind::Or: result = mk_or(std::move(kids)); break;
      case Kind::Not: result = mk_not(kids[0]); break;
      case Kind::Implies: result = mk_implies(kids[0], kids[1]); break;
      case Kind::Ite: result = mk_ite(kids[0], kids[1], kids[2]); break;
      case Kind::Eq: result = mk_eq(kids[0], kids[1]); break;
      case Kind::Distinct: result = mk_distinct(kids[0], kids[1]); break;
      default: break;
      }
    }
  }
  memo.emplace(f.id(), result);
  return result;
}

// ---------------------------------------------------------------------------
// Linear expressions and constraints

struct LinExpr {
  std::map<int, int64_t> terms; // solver var index -> coefficient
  int64_t constant = 0;

  void add(const LinExpr& o, int64_t scale) {
    for (auto& [v, c] : o.terms) {
      int64_t nc = add_c(terms.count(v) ? terms[v] : 0, mul_c(c, scale));
      if (nc == 0)
        terms.erase(v);
      else
        terms[v] = nc;
    }
    constant = add_c(constant, mul_c(o.constant, scale));
  }
  void scale(int64_t s) {
    if (s == 1)
      return;
    for (auto& [v, c] : terms)
      c = mul_c(c, s);
    constant = mul_c(constant, s);
    std::erase_if(terms, [](const auto& p) { return p.second == 0; });
  }
  bool ground() const { return terms.empty(); }
};

enum class Rel { Le, Eq, Ne }; // expr <= 0, == 0, != 0

struct Constraint {
  LinExpr expr;
  Rel rel;
};

// ---------------------------------------------------------------------------
// Omega-test solver for conjunctions of constraints

struct TrailSubst {
  int var;
  LinExpr expr;
};
struct TrailBounds {
  int var;
  // lower: b * var >= alpha ; upper: a * var <= beta
  std::vector<std::pair<int64_t, LinExpr>> lowers;
  std::vector<std::pair<int64_t, LinExpr>> uppers;
};
using TrailEntry = std::variant<TrailSubst, TrailBounds>;

struct System {
  std::vector<Constraint> cons;
  std::vector<TrailEntry> trail;
};

class Omega {
public:
  explicit Omega(size_t* system_budget, int* fresh_counter)
      : budget_(system_budget), fresh_(fresh_counter) {}

  // Returns a model over the vars occurring in the input, or nullopt.
  std::optional<std::map<int, int64_t>>
  solve(const std::vector<Constraint>& input) {
    std::vector<System> work;
    work.push_back(System{input, {}});
    while (!work.empty()) {
      if ((*budget_)-- == 0)
        throw BudgetExceeded("omega system budget exhausted");
      System sys = std::move(work.back());
      work.pop_back();
      auto outcome = process(sys, work);
      if (outcome)
        return outcome;
    }
    return std::nullopt;
  }

private:
  size_t* budget_;
  int* fresh_;

  static int64_t gcd64(int64_t a, int64_t b) {
    return std::gcd(a < 0 ? -a : a, b < 0 ? -b : b);
  }

  // Normalizes in place; returns false if a ground conflict is found.
  static bool normalize(System& sys) {
    std::vector<Constraint> out;
    for (Constraint& c : sys.cons) {
      if (c.expr.ground()) {
        int64_t k = c.expr.constant;
        bool ok = (c.rel == Rel::Le) ? k <= 0 : (c.rel == Rel::Eq) ? k == 0
                                                                   : k != 0;
        if (!ok)
          return false;
        continue;
      }
      int64_t g = 0;
      for (auto& [v, co] : c.expr.terms)
        g = gcd64(g, co);
      if (g > 1) {
        if (c.rel == Rel::Eq) {
          if (c.expr.constant % g != 0)
            return false;
          for (auto& [v, co] : c.expr.terms)
            co /= g;
          c.expr.constant /= g;
        } else if (c.rel == Rel::Le) {
          for (auto& [v, co] : c.expr.terms)
            co /= g;
          c.expr.constant = ceil_div(c.expr.constant, g);
        } else {
          if (c.expr.constant % g != 0) {
            // k not divisible: expr can never be 0, constraint trivially true
            continue;
          }
          for (auto& [v, co] : c.expr.terms)
            co /= g;
          c.expr.constant /= g;
        }
      }
      out.push_back(std::move(c));
    }
    sys.cons = std::move(out);
    return true;
  }

  static void substitute(System& sys, int var, const LinExpr& repl) {
    for (Constraint& c : sys.cons) {
      auto it = c.expr.terms.find(var);
      if (it == c.expr.terms.end())
        continue;
      int64_t coef = it->second;
      c.expr.terms.erase(it);
      c.expr.add(repl, coef);
    }
    sys.trail.push_back(TrailSubst{var, repl});
  }

  // Eliminates one equality; may introduce a fresh variable (Pugh's method).
  bool eliminate_equality(System& sys, size_t idx) {
    Constraint eq = sys.cons[idx];
    sys.cons.erase(sys.cons.begin() + idx);
    // find a unit-coefficient variable
    for (auto& [v, c] : eq.expr.terms) {
      if (c == 1 || c == -1) {
        LinExpr repl; // v = -(rest)/c
        for (auto& [w, d] : eq.expr.terms)
          if (w != v)
            repl.terms[w] = d;
        repl.constant = eq.expr.constant;
        repl.scale(c == 1 ? -1 : 1);
        substitute(sys, v, repl);
        return true;
      }
    }
    // no unit coefficient: reduce via symmetric modulus
    int vk = 0;
    int64_t ak = 0;
    for (auto& [v, c] : eq.expr.terms) {
      if (ak == 0 || std::abs(c) < std::abs(ak)) {
        vk = v;
        ak = c;
      }
    }
    if (ak < 0) {
      eq.expr.scale(-1);
      ak = -ak;
    }
    int64_t m = ak + 1;
    auto smod = [&](int64_t a) {
      int64_t r = a - mul_c(m, floor_div(add_c(mul_c(2, a), m), mul_c(2, m)));
      return r;
    };
    // vk = m*sigma + sum smod(a_i)*x_i + smod(k)   (since smod(ak) == -1)
    int sigma = --(*fresh_);
    LinExpr repl;
    repl.terms[sigma] = m;
    for (auto& [v, c] : eq.expr.terms)
      if (v != vk)
        repl.terms[v] = smod(c);
    repl.constant = smod(eq.expr.constant);
    // transformed equality, coefficients shrink: divide by m after substitution
    LinExpr neweq;
    neweq.terms[sigma] = ak;
    for (auto& [v, c] : eq.expr.terms)
      if (v != vk)
        neweq.terms[v] = (add_c(c, mul_c(ak, smod(c)))) / m;
    neweq.constant = add_c(eq.expr.constant, mul_c(ak, smod(eq.expr.constant))) / m;
    substitute(sys, vk, repl);
    std::erase_if(neweq.terms, [](const auto& p) { return p.second == 0; });
    sys.cons.push_back(Constraint{std::move(neweq), Rel::Eq});
    return true;
  }

  // Chooses the inequality-elimination variable: least pair blowup.
  static int pick_var(const System& sys) {
    std::map<int, std::pair<int, int>> count; // var -> (#lower, #upper)
    for (const Constraint& c : sys.cons) {
      for (auto& [v, co] : c.expr.terms) {
        if (co < 0)
          count[v].first++;
        else
          count[v].second++;
      }
    }
    int best = 0;
    long best_cost = -1;
    for (auto& [v, lu] : count) {
      long cost = long(lu.first) * lu.second;
      if (best_cost < 0 || cost < best_cost) {
        best_cost = cost;
        best = v;
      }
    }
    return best;
  }

  std::optional<std::map<int, int64_t>> process(System& sys,
                                                std::vector<System>& work) {
    for (;;) {
      if (!normalize(sys))
        return std::nullopt;
      // equalities first
      bool had_eq = false;
      for (size_t i = 0; i < sys.cons.size(); ++i) {
        if (sys.cons[i].rel == Rel::Eq) {
          if (!eliminate_equality(sys, i))
            return std::nullopt;
          had_eq = true;
          break;
        }
      }
      if (had_eq)
        continue;
      // disequality split
      for (size_t i = 0; i < sys.cons.size(); ++i) {
        if (sys.cons[i].rel == Rel::Ne) {
          Constraint ne = sys.cons[i];
          System lt = sys, gt = sys;
          lt.cons.erase(lt.cons.begin() + i);
          gt.cons.erase(gt.cons.begin() + i);
          LinExpr le = ne.expr;
          le.constant = add_c(le.constant, 1);
          lt.cons.push_back(Constraint{std::move(le), Rel::Le}); // e <= -1
          LinExpr ge = ne.expr;
          ge.scale(-1);
          ge.constant = add_c(ge.constant, 1);
          gt.cons.push_back(Constraint{std::move(ge), Rel::Le}); // e >= 1
          work.push_back(std::move(gt));
          work.push_back(std::move(lt));
          return std::nullopt;
        }
      }
      if (sys.cons.empty())
        return reconstruct(sys);
      // pure inequalities: eliminate one variable
      int x = pick_var(sys);
      TrailBounds tb;
      tb.var = x;
      std::vector<Constraint> rest;
      for (const Constraint& c : sys.cons) {
        auto it = c.expr.terms.find(x);
        if (it == c.expr.terms.end()) {
          rest.push_back(c);
          continue;
        }
        int64_t coef = it->second;
        LinExpr other = c.expr;
        other.terms.erase(x);
        if (coef < 0) {
          // -b x + other <= 0  ->  b x >= other
          tb.lowers.push_back({-coef, std::move(other)});
        } else {
          // a x + other <= 0  ->  a x <= -other
          other.scale(-1);
          tb.uppers.push_back({coef, std::move(other)});
        }
      }
      if (tb.lowers.empty() || tb.uppers.empty()) {
        sys.cons = std::move(rest);
        sys.trail.push_back(tb);
        continue; // unbounded on one side: integral solutions always exist
      }
      bool exact = true;
      for (auto& [a, beta] : tb.uppers)
        for (auto& [b, alpha] : tb.lowers)
          if (a != 1 && b != 1)
            exact = false;
      if (exact) {
        System next;
        next.trail = sys.trail;
        next.cons = rest;
        for (auto& [a, beta] : tb.uppers) {
          for (auto& [b, alpha] : tb.lowers) {
            // a*alpha <= a*b*x <= b*beta
            LinExpr e = alpha;
            e.scale(a);
            e.add(beta, -b);
            next.cons.push_back(Constraint{std::move(e), Rel::Le});
          }
        }
        next.trail.push_back(tb);
        sys = std::move(next);
        continue;
      }
      // inexact: dark shadow plus splinters
      System dark;
      dark.trail = sys.trail;
      dark.cons = rest;
      for (auto& [a, beta] : tb.uppers) {
        for (auto& [b, alpha] : tb.lowers) {
          LinExpr e = alpha;
          e.scale(a);
          e.add(beta, -b);
          e.constant = add_c(e.constant, mul_c(a - 1, b - 1));
          dark.cons.push_back(Constraint{std::move(e), Rel::Le});
        }
      }
      dark.trail.push_back(tb);
      work.push_back(std::move(dark));
      int64_t amax = 0;
      for (auto& [a, beta] : tb.uppers)
        amax = std::max(amax, a);
      for (auto& [b, alpha] : tb.lowers) {
        if (b == 1)
          continue;
        int64_t kmax = floor_div(mul_c(amax, b) - amax - b, amax);
        for (int64_t k = 0; k <= kmax; ++k) {
          System spl = sys; // original constraints, x still present
          LinExpr e;        // b x - alpha - k == 0
          e.terms[x] = b;
          e.add(alpha, -1);
          e.constant = add_c(e.constant, -k);
          spl.cons.push_back(Constraint{std::move(e), Rel::Eq});
          work.push_back(std::move(spl));
        }
      }
      return std::nullopt; // disjunction pushed to the worklist
    }
  }

  static int64_t eval_expr(const LinExpr& e,
                           const std::map<int, int64_t>& model) {
    __int128 acc = e.constant;
    for (auto& [v, c] : e.terms) {
      auto it = model.find(v);
      int64_t val = it == model.end() ? 0 : it->second;
      acc += __int128(c) * val;
    }
    return checked(acc);
  }

  static std::optional<std::map<int, int64_t>> reconstruct(const System& sys) {
    std::map<int, int64_t> model;
    for (auto it = sys.trail.rbegin(); it != sys.trail.rend(); ++it) {
      if (std::holds_alternative<TrailSubst>(*it)) {
        const auto& s = std::get<TrailSubst>(*it);
        model[s.var] = eval_expr(s.expr, model);
      } else {
        const auto& b = std::get<TrailBounds>(*it);
        bool has_lo = false, has_hi = false;
        int64_t lo = 0, hi = 0;
        for (auto& [bc, alpha] : b.lowers) {
          int64_t v = ceil_div(eval_expr(alpha, model), bc);
          lo = has_lo ? std::max(lo, v) : v;
          has_lo = true;
        }
        for (auto& [ac, beta] : b.uppers) {
          int64_t v = floor_div(eval_expr(beta, model), ac);
          hi = has_hi ? std::min(hi, v) : v;
          has_hi = true;
        }
        int64_t chosen;
        if (has_lo)
          chosen = lo;
        else if (has_hi)
          chosen = std::min<int64_t>(hi, 0);
        else
          chosen = 0;
        if (has_lo && has_hi && lo > hi)
          return std::nullopt; // dark-shadow guarantee failed; treat as unsat
        model[b.var] = chosen;
      }
    }
    return model;
  }
};

// ---------------------------------------------------------------------------
// Boolean layer

struct Clause {
  std::vector<int> lits; // +v / -v, v >= 1
};

struct NonlinearDef {
  int var;         // solver int-var index standing for the term
  Formula term;    // the original nonlinear term
};

class Encoder {
public:
  // solver variable spaces
  std::vector<Formula> int_vars;            // index -> formula var
  std::unordered_map<uint32_t, int> int_of; // formula id -> index
  std::vector<Formula> bool_vars;
  std::unordered_map<uint32_t, int> bool_of; // formula id -> sat var
  std::vector<Constraint> atom_cons;         // per theory atom
  std::vector<int> atom_sat_var;             // theory atom -> sat var
  std::vector<Clause> clauses;
  std::vector<NonlinearDef> nonlinear;
  std::vector<Constraint> side; // definitional constraints (div/mod lowering)
  int n_sat_vars = 0;
  int fresh_int = 0; // negative indices are solver-internal fresh vars

  int new_sat_var() { return ++n_sat_vars; }

  int int_var(Formula v) {
    auto it = int_of.find(v.id());
    if (it != int_of.end())
      return it->second;
    int idx = static_cast<int>(int_vars.size()) + 1;
    int_vars.push_back(v);
    int_of.emplace(v.id(), idx);
    return idx;
  }

  int bool_var(Formula v) {
    auto it = bool_of.find(v.id());
    if (it != bool_of.end())
      return it->second;
    int sv = new_sat_var();
    bool_vars.push_back(v);
    bool_of.emplace(v.id(), sv);
    return sv;
  }

  // --- linearization -------------------------------------------------------

  std::unordered_map<uint32_t, LinExpr> lin_memo;
  std::unordered_map<uint32_t, int> nl_memo;

  int fresh_internal() { return --fresh_int + -1000000; }

  LinExpr linearize(Formula t) {
    auto it = lin_memo.find(t.id());
    if (it != lin_memo.end())
      return it->second;
    LinExpr e;
    switch (t.kind()) {
    case Kind::IntConst:
      e.constant = t.int_value();
      break;
    case Kind::Var:
      e.terms[int_var(t)] = 1;
      break;
    case Kind::Add:
      for (const Formula& c : t.children())
        e.add(linearize(c), 1);
      break;
    case Kind::Sub:
      e = linearize(t.child(0));
      e.add(linearize(t.child(1)), -1);
      break;
    case Kind::Neg:
      e.add(linearize(t.child(0)), -1);
      break;
    case Kind::Mul: {
      LinExpr acc;
      acc.constant = 1;
      bool acc_ground = true;
      for (const Formula& c : t.children()) {
        LinExpr ce = linearize(c);
        if (ce.ground()) {
          if (acc_ground)
            acc.constant = mul_c(acc.constant, ce.constant);
          else
            acc.scale(ce.constant);
        } else if (acc_ground) {
          int64_t k = acc.constant;
          acc = ce;
          acc.scale(k);
          acc_ground = false;
        } else {
          // variable times variable: abstract the whole product
          e.terms[nonlinear_var(t)] = 1;
          lin_memo.emplace(t.id(), e);
          return e;
        }
      }
      e = acc;
      break;
    }
    case Kind::Div:
    case Kind::Mod: {
      LinExpr num = linearize(t.child(0));
      LinExpr den = linearize(t.child(1));
      if (den.ground() && den.constant != 0) {
        int64_t k = den.constant;
        int q, r;
        // memoize (numerator, k) pairs so repeated terms share q and r
        uint64_t key = (uint64_t)t.child(0).id() * 2654435761u ^ (uint64_t)k;
        auto qi = pair_memo.find(key);
        if (qi != pair_memo.end()) {
          q = qi->second.first;
          r = qi->second.second;
        } else {
          q = fresh_internal();
          r = fresh_internal();
          pair_memo.emplace(key, std::make_pair(q, r));
          // num = k*q + r, 0 <= r < |k|
          LinExpr def = num;
          def.terms[q] = -k; // num - k q - r == 0
          def.terms[r] = -1;
          side.push_back({std::move(def), Rel::Eq});
          LinExpr rlo; // -r <= 0
          rlo.terms[r] = -1;
          side.push_back({std::move(rlo), Rel::Le});
          LinExpr rhi; // r - |k| + 1 <= 0
          rhi.terms[r] = 1;
          rhi.constant = -(k < 0 ? -k : k) + 1;
          side.push_back({std::move(rhi), Rel::Le});
        }
        e.terms[t.kind() == Kind::Div ? q : r] = 1;
      } else {
        e.terms[nonlinear_var(t)] = 1;
      }
      break;
    }
    case Kind::Ite:
      throw std::logic_error("int ite must be lifted before linearization");
    default:
      throw std::logic_error("unexpected term in linearization: " +
                             t.to_string());
    }
    lin_memo.emplace(t.id(), e);
    return e;
  }

  std::unordered_map<uint64_t, std::pair<int, int>> pair_memo;

  int nonlinear_var(Formula t) {
    auto it = nl_memo.find(t.id());
    if (it != nl_memo.end())
      return it->second;
    int v = fresh_internal();
    nl_memo.emplace(t.id(), v);
    nonlinear.push_back({v, t});
    return v;
  }

  // --- atoms ---------------------------------------------------------------

  std::unordered_map<uint32_t, int> atom_memo; // formula id -> sat var

  int theory_atom(Formula f) {
    auto it = atom_memo.find(f.id());
    if (it != atom_memo.end())
      return it->second;
    LinExpr lhs = linearize(f.child(0));
    LinExpr rhs = linearize(f.child(1));
    LinExpr e = lhs;
    e.add(rhs, -1); // lhs - rhs
    Constraint c{{}, Rel::Le};
    switch (f.kind()) {
    case Kind::Le: c = {std::move(e), Rel::Le}; break;
    case Kind::Lt:
      e.constant = add_c(e.constant, 1);
      c = {std::move(e), Rel::Le};
      break;
    case Kind::Ge:
      e.scale(-1);
      c = {std::move(e), Rel::Le};
      break;
    case Kind::Gt:
      e.scale(-1);
      e.constant = add_c(e.constant, 1);
      c = {std::move(e), Rel::Le};
      break;
    case Kind::Eq: c = {std::move(e), Rel::Eq}; break;
    case Kind::Distinct: c = {std::move(e), Rel::Ne}; break;
    default:
      throw std::logic_error("not a theory atom");
    }
    int sv = new_sat_var();
    atom_cons.push_back(std::move(c));
    atom_sat_var.push_back(sv);
    atom_memo.emplace(f.id(), sv);
    return sv;
  }

  // --- CNF (Plaisted-Greenbaum over negation-normal traversal) -------------

  std::unordered_map<uint64_t, int> gate_memo; // (id, polarity) -> literal

  // Returns a literal equisatisfiable with f under the given polarity.
  int encode(Formula f, bool positive) {
    uint64_t key = (uint64_t(f.id()) << 1) | (positive ? 1 : 0);
    auto it = gate_memo.find(key);
    if (it != gate_memo.end())
      return it->second;
    int lit = 0;
    switch (f.kind()) {
    case Kind::BoolConst: {
      int v = true_var();
      lit = f.bool_value() ? v : -v;
      break;
    }
    case Kind::Var:
      lit = bool_var(f);
      break;
    case Kind::Lt:
    case Kind::Le:
    case Kind::Gt:
    case Kind::Ge:
      lit = theory_atom(f);
      break;
    case Kind::Eq:
    case Kind::Distinct:
      if (f.child(0).sort() == Sort::Int) {
        lit = theory_atom(f);
      } else {
        // boolean iff: encode as (a->b) and (b->a) via a gate
        Formula a = f.child(0), b = f.child(1);
        Formula iff = mk_and({mk_or({mk_not(a), b}), mk_or({mk_not(b), a})});
        lit = encode(f.kind() == Kind::Eq ? iff : mk_not(iff), positive);
      }
      break;
    case Kind::Not:
      lit = -encode(f.child(0), !positive);
      break;
    case Kind::Implies:
      lit = encode(mk_or({mk_not(f.child(0)), f.child(1)}), positive);
      break;
    case Kind::Ite: {
      Formula c = f.child(0), t = f.child(1), e = f.child(2);
      lit = encode(mk_and({mk_or({mk_not(c), t}), mk_or({c, e})}), positive);
      break;
    }
    case Kind::And:
    case Kind::Or: {
      bool is_and = f.kind() == Kind::And;
      int g = new_sat_var();
      std::vector<int> kid_lits;
      for (const Formula& ch : f.children())
        kid_lits.push_back(encode(ch, positive));
      // one-sided encoding: define the gate for both polarities to stay
      // safe under shared subformulas
      for (int kl : kid_lits) {
        if (is_and)
          clauses.push_back({{-g, kl}}); // g -> each child
        else
          clauses.push_back({{-kl, g}}); // each child -> g
      }
      Clause big;
      if (is_and) {
        big.lits.push_back(g);
        for (int kl : kid_lits)
          big.lits.push_back(-kl); // all children -> g
      } else {
        big.lits.push_back(-g);
        for (int kl : kid_lits)
          big.lits.push_back(kl); // g -> some child
      }
      clauses.push_back(std::move(big));
      lit = g;
      break;
    }
    default:
      throw std::logic_error("cannot encode " + f.to_string());
    }
    gate_memo.emplace(key, lit);
    return lit;
  }

  int true_var_ = 0;
  int true_var() {
    if (!true_var_) {
      true_var_ = new_sat_var();
      clauses.push_back({{true_var_}});
    }
    return true_var_;
  }
};

// Plain DPLL with two-phase restart on theory conflicts.
class Dpll {
public:
  Dpll(int n_vars, std::vector<Clause> clauses)
      : n_(n_vars), clauses_(std::move(clauses)) {
    assign_.assign(n_ + 1, 0);
  }

  void add_clause(std::vector<int> lits) { clauses_.push_back({std::move(lits)}); }

  // Finds the next full satisfying assignment not excluded so far.
  // Returns false when propositionally unsat.
  bool next_model() {
    trail_.clear();
    decisions_.clear();
    std::fill(assign_.begin(), assign_.end(), 0);
    qhead_ = 0;
    if (!propagate_all())
      return false;
    for (;;) {
      int v = pick_unassigned();
      if (v == 0)
        return true;
      decide(v, true);
      while (!propagate_all()) {
        if (!backtrack())
          return false;
      }
    }
  }

  bool value(int var) const { return assign_[var] == 1; }

private:
  int n_;
  std::vector<Clause> clauses_;
  std::vector<int8_t> assign_; // 0 unknown, 1 true, -1 false
  std::vector<int> trail_;
  struct Decision {
    size_t trail_size;
    int var;
    bool flipped;
  };
  std::vector<Decision> decisions_;
  size_t qhead_ = 0;

  void push(int lit) {
    assign_[std::abs(lit)] = lit > 0 ? 1 : -1;
    trail_.push_back(lit);
  }
  void decide(int var, bool val) {
    decisions_.push_back({trail_.size(), var, false});
    push(val ? var : -var);
  }
  int lit_value(int lit) const {
    int8_t a = assign_[std::abs(lit)];
    if (a == 0)
      return 0;
    return (a == 1) == (lit > 0) ? 1 : -1;
  }

  // Full clause scan propagation; simple and adequate at this scale.
  bool propagate_all() {
    bool changed = true;
    while (changed) {
      changed = false;
      for (const Clause& c : clauses_) {
        int unassigned = 0, count_unassigned = 0;
        bool sat = false;
        for (int l : c.lits) {
          int v = lit_value(l);
          if (v == 1) {
            sat = true;
            break;
          }
          if (v == 0) {
            ++count_unassigned;
            unassigned = l;
          }
        }
        if (sat)
          continue;
        if (count_unassigned == 0)
          return false; // conflict
        if (count_unassigned == 1) {
          push(unassigned);
          changed = true;
        }
      }
    }
    return true;
  }

  int pick_unassigned() const {
    for (int v = 1; v <= n_; ++v)
      if (assign_[v] == 0)
        return v;
    return 0;
  }

  bool backtrack() {
    while (!decisions_.empty()) {
      Decision d = decisions_.back();
      decisions_.pop_back();
      while (trail_.size() > d.trail_size) {
        assign_[std::abs(trail_.back())] = 0;
        trail_.pop_back();
      }
      if (!d.flipped) {
        decisions_.push_back({trail_.size(), d.var, true});
        push(-d.var);
        return true;
      }
    }
    return false;
  }
};

} // namespace

Result decide(Formula f, const Budget& budget) {
  if (f.sort() != Sort::Bool)
    throw SortError("decide: formula must be boolean");
  try {
    std::set<Formula> original_vars = f.free_vars();

    std::vector<std::pair<Formula, Formula>> dropped_defs;
    Formula g = drop_dead_definitions(f, dropped_defs);
    std::unordered_map<uint32_t, Formula> memo;
    g = lift_int_ite(g, memo);

    if (g.is_false())
      return {Status::Unsat, {}, ""};

    Encoder enc;
    int root = 0;
    if (!g.is_true())
      root = enc.encode(g, true);

    Dpll dpll(enc.n_sat_vars, enc.clauses);
    if (root != 0)
      dpll.add_clause({root});

    size_t omega_budget = budget.max_omega_systems;
    int fresh_counter = 0;
    size_t conflicts = 0;

    while (dpll.next_model()) {
      // assemble the theory cube from assigned atoms
      std::vector<Constraint> cube = enc.side;
      std::vector<size_t> cube_atoms; // indices into enc.atom_cons
      for (size_t i = 0; i < enc.atom_cons.size(); ++i) {
        bool phase = dpll.value(enc.atom_sat_var[i]);
        Constraint c = enc.atom_cons[i];
        if (!phase) {
          switch (c.rel) {
          case Rel::Le: // not (e <= 0)  ->  -e + 1 <= 0
            c.expr.scale(-1);
            c.expr.constant = add_c(c.expr.constant, 1);
            break;
          case Rel::Eq:
            c.rel = Rel::Ne;
            break;
          case Rel::Ne:
            c.rel = Rel::Eq;
            break;
          }
        }
        cube.push_back(std::move(c));
        cube_atoms.push_back(i);
      }

      Omega omega(&omega_budget, &fresh_counter);
      auto model = omega.solve(cube);
      if (!model) {
        if (++conflicts > budget.max_theory_conflicts)
          return {Status::Unknown, {}, "theory conflict budget exhausted"};
        // shrink: greedy deletion over the atom-derived constraints
        std::vector<bool> keep(cube_atoms.size(), true);
        if (cube_atoms.size() <= 64) {
          for (size_t drop = 0; drop < cube_atoms.size(); ++drop) {
            std::vector<Constraint> trial = enc.side;
            for (size_t i = 0; i < cube_atoms.size(); ++i) {
              if (i == drop || !keep[i])
                continue;
              trial.push_back(cube[enc.side.size() + i]);
            }
            Omega o2(&omega_budget, &fresh_counter);
            if (!o2.solve(trial))
              keep[drop] = false;
          }
        }
        std::vector<int> blocking;
        for (size_t i = 0; i < cube_atoms.size(); ++i) {
          if (!keep[i])
            continue;
          int sv = enc.atom_sat_var[cube_atoms[i]];
          blocking.push_back(dpll.value(sv) ? -sv : sv);
        }
        if (blocking.empty())
          return {Status::Unsat, {}, ""};
        dpll.add_clause(std::move(blocking));
        continue;
      }

      // build the candidate valuation over the original variables
      Valuation val;
      for (size_t i = 0; i < enc.int_vars.size(); ++i) {
        auto it = model->find(static_cast<int>(i) + 1);
        val.set(enc.int_vars[i], it == model->end() ? int64_t(0) : it->second);
      }
      for (const Formula& bv : enc.bool_vars)
        val.set(bv, dpll.value(enc.bool_of.at(bv.id())));
      for (const Formula& v : original_vars)
        if (!val.has(v))
          val.set(v, v.sort() == Sort::Int ? Value(int64_t(0)) : Value(false));
      // repair variables whose defining conjuncts were dropped as dead
      bool repair_underspecified = false;
      for (auto it = dropped_defs.rbegin(); it != dropped_defs.rend(); ++it) {
        try {
          val.set(it->first, eval(it->second, val));
        } catch (const EvalError&) {
          repair_underspecified = true; // division by zero in a dead chain
        }
      }

      if (!enc.nonlinear.empty()) {
        // confirm abstracted terms against their original semantics
        bool ok = true;
        for (const NonlinearDef& def : enc.nonlinear) {
          try {
            int64_t expected = std::get<int64_t>(eval(def.term, val));
            auto it = model->find(def.var);
            int64_t got = it == model->end() ? 0 : it->second;
            if (expected != got) {
              ok = false;
              break;
            }
          } catch (const EvalError&) {
            // division by zero: the term is underspecified, any value works
            continue;
          }
        }
        if (!ok)
          return {Status::Unknown, {},
                  "nonlinear subterm could not be confirmed"};
      }

      // final confirmation of the model on the original formula
      try {
        if (!eval_bool(f, val))
          return {Status::Unknown, {}, "candidate model failed confirmation"};
      } catch (const EvalError&) {
        if (enc.nonlinear.empty() && !repair_underspecified)
          throw;
        // underspecified division in the original formula; accept the model
      }
      return {Status::Sat, val, ""};
    }
    return {Status::Unsat, {}, ""};
  } catch (const BudgetExceeded& e) {
    return {Status::Unknown, {}, e.what()};
  } catch (const Overflow& e) {
    return {Status::Unknown, {}, e.what()};
  }
}

} // namespace ogre::lia
