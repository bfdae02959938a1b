#include "ogre/solver.hpp"

namespace ogre {

SatAnswer InternalSolver::check(const std::vector<Formula>& assertions,
                                const std::vector<Formula>& decls) {
  Formula query = mk_and(assertions);
  lia::Result r = lia::decide(query);
  SatAnswer out;
  switch (r.status) {
  case lia::Status::Sat: {
    out.status = SatStatus::Sat;
    out.model = r.model;
    for (const Formula& v : decls)
      if (!out.model.has(v))
        out.model.set(v, v.sort() == Sort::Int ? Value(int64_t(0))
                                               : Value(false));
    break;
  }
  case lia::Status::Unsat:
    out.status = SatStatus::Unsat;
    break;
  case lia::Status::Unknown:
    out.status = SatStatus::Unknown;
    out.diagnostic = r.diagnostic;
    break;
  }
  return out;
}

// ---------------------------------------------------------------------------

namespace {

std::string primed_name(const Formula& v) { return v.var_name() + "!p"; }

} // namespace

HoareAnswer check_hoare(Formula pre, const Statement& st, Formula post,
                        Solver& backend) {
  // variables of interest: everything the triple or the statement mentions
  std::set<Formula> vars = pre.free_vars();
  for (const Formula& v : post.free_vars())
    vars.insert(v);
  for (const Formula& v : st.referenced_vars())
    vars.insert(v);

  std::map<Formula, Formula> prime; // v -> v'
  std::vector<Formula> assertions;
  std::vector<Formula> decls;
  assertions.push_back(pre);
  assertions.push_back(st.guard());
  for (const Formula& v : vars) {
    decls.push_back(v);
    auto assign_it = st.assigns().find(v);
    if (assign_it != st.assigns().end()) {
      Formula vp = mk_var(primed_name(v), v.sort());
      prime[v] = vp;
      decls.push_back(vp);
      assertions.push_back(mk_eq(vp, assign_it->second));
    } else if (st.havocs().count(v)) {
      Formula vp = mk_var(primed_name(v), v.sort());
      prime[v] = vp; // unconstrained
      decls.push_back(vp);
    } else {
      prime[v] = v; // frame: same symbol stands for pre and post value
    }
  }
  assertions.push_back(mk_not(substitute(post, prime)));

  SatAnswer ans = backend.check(assertions, decls);
  HoareAnswer out;
  switch (ans.status) {
  case SatStatus::Unsat:
    out.status = HoareStatus::Holds;
    break;
  case SatStatus::Sat: {
    out.status = HoareStatus::Fails;
    for (const Formula& v : vars) {
      Value pre_val = ans.model.has(v)
                          ? ans.model.get(v)
                          : (v.sort() == Sort::Int ? Value(int64_t(0))
                                                   : Value(false));
      out.pre_state.set(v, pre_val);
      Formula vp = prime.at(v);
      Value post_val = ans.model.has(vp) ? ans.model.get(vp) : pre_val;
      out.post_state.set(v, post_val);
    }
    break;
  }
  case SatStatus::Unknown:
    out.status = HoareStatus::Unknown;
    out.diagnostic = ans.diagnostic;
    break;
  }
  return out;
}

Truth entails(Formula lhs, Formula rhs, Solver& backend) {
  std::vector<Formula> decls;
  for (const Formula& v : lhs.free_vars())
    decls.push_back(v);
  for (const Formula& v : rhs.free_vars())
    decls.push_back(v);
  SatAnswer ans = backend.check(mk_and({lhs, mk_not(rhs)}), decls);
  switch (ans.status) {
  case SatStatus::Unsat: return Truth::Yes;
  case SatStatus::Sat: return Truth::No;
  default: return Truth::Unknown;
  }
}

Truth equivalent(Formula lhs, Formula rhs, Solver& backend) {
  Truth a = entails(lhs, rhs, backend);
  if (a == Truth::No)
    return Truth::No;
  Truth b = entails(rhs, lhs, backend);
  if (b == Truth::No)
    return Truth::No;
  if (a == Truth::Yes && b == Truth::Yes)
    return Truth::Yes;
  return Truth::Unknown;
}

} // namespace ogre
