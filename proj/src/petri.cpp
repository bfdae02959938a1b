#include "ogre/petri.hpp"

#include <algorithm>
#include <deque>
#include <functional>
#include <sstream>

namespace ogre {

PlaceIdx PetriProgram::place_index(const std::string& name) const {
  for (size_t i = 0; i < places.size(); ++i)
    if (places[i] == name)
      return static_cast<PlaceIdx>(i);
  throw std::out_of_range("unknown place: " + name);
}

TransIdx PetriProgram::transition_index(const std::string& id) const {
  for (size_t i = 0; i < transitions.size(); ++i)
    if (transitions[i].id == id)
      return static_cast<TransIdx>(i);
  throw std::out_of_range("unknown transition: " + id);
}

bool PetriProgram::is_error_place(PlaceIdx p) const {
  return std::binary_search(error_places.begin(), error_places.end(), p);
}

std::string PetriProgram::marking_to_string(const Marking& m) const {
  std::ostringstream os;
  os << "{";
  for (size_t i = 0; i < m.size(); ++i)
    os << (i ? "," : "") << places[m[i]];
  os << "}";
  return os.str();
}

bool is_enabled(const Marking& m, const Transition& t) {
  return std::includes(m.begin(), m.end(), t.pre.begin(), t.pre.end());
}

Marking fire(const Marking& m, const Transition& t) {
  if (!is_enabled(m, t))
    throw NotEnabledError("transition " + t.id + " is not enabled");
  Marking rest;
  std::set_difference(m.begin(), m.end(), t.pre.begin(), t.pre.end(),
                      std::back_inserter(rest));
  Marking out;
  std::set_union(rest.begin(), rest.end(), t.succ.begin(), t.succ.end(),
                 std::back_inserter(out));
  return out;
}

namespace {

// Detects the place that would receive a second token when firing t in m.
std::optional<PlaceIdx> token_collision(const Marking& m, const Transition& t) {
  Marking rest;
  std::set_difference(m.begin(), m.end(), t.pre.begin(), t.pre.end(),
                      std::back_inserter(rest));
  for (PlaceIdx p : t.succ)
    if (std::binary_search(rest.begin(), rest.end(), p))
      return p;
  return std::nullopt;
}

} // namespace

Reachability reachable_markings(const PetriProgram& program) {
  Reachability out;
  Marking init = program.initial_marking;
  out.markings.push_back(init);
  out.index.emplace(init, 0);
  std::vector<int> parent_edge(1, -1);
  std::deque<int> queue{0};
  while (!queue.empty()) {
    int cur = queue.front();
    queue.pop_front();
    Marking m = out.markings[cur];
    for (size_t ti = 0; ti < program.transitions.size(); ++ti) {
      const Transition& t = program.transitions[ti];
      if (!is_enabled(m, t))
        continue;
      if (auto clash = token_collision(m, t)) {
        // reconstruct the firing sequence leading here, then the clash
        std::vector<TransIdx> seq;
        for (int node = cur; parent_edge[node] >= 0;) {
          const auto& e = out.edges[parent_edge[node]];
          seq.push_back(e.transition);
          node = e.from;
        }
        std::reverse(seq.begin(), seq.end());
        seq.push_back(static_cast<TransIdx>(ti));
        out.violation = OneSafetyViolation{std::move(seq), *clash};
        return out;
      }
      Marking next = fire(m, t);
      auto [it, inserted] = out.index.emplace(next, (int)out.markings.size());
      if (inserted) {
        out.markings.push_back(next);
        parent_edge.push_back((int)out.edges.size());
        queue.push_back(it->second);
      }
      out.edges.push_back({cur, (TransIdx)ti, it->second});
    }
  }
  return out;
}

ProgramDiagnostics validate_program(const PetriProgram& program) {
  ProgramDiagnostics diag;
  for (size_t ti = 0; ti < program.transitions.size(); ++ti) {
    const Transition& t = program.transitions[ti];
    if (t.pre.empty())
      diag.structural.push_back("transition " + t.id + " has an empty pre set");
    if (t.succ.empty())
      diag.structural.push_back("transition " + t.id +
                                " has an empty succ set");
    for (const Formula& v : t.statement.referenced_vars()) {
      if (!program.variables.contains(v))
        diag.structural.push_back("transition " + t.id +
                                  " references undeclared variable " +
                                  v.var_name());
    }
  }
  if (!diag.structural.empty())
    return diag;

  Reachability reach = reachable_markings(program);
  if (reach.violation) {
    diag.one_safety = reach.violation;
    return diag;
  }
  std::vector<bool> enabled_somewhere(program.transitions.size(), false);
  for (const auto& e : reach.edges)
    enabled_somewhere[e.transition] = true;
  for (size_t ti = 0; ti < program.transitions.size(); ++ti)
    if (!enabled_somewhere[ti])
      diag.never_enabled.push_back((TransIdx)ti);
  return diag;
}

std::vector<std::string>
ProgramDiagnostics::messages(const PetriProgram& program) const {
  std::vector<std::string> out = structural;
  if (one_safety) {
    std::ostringstream os;
    os << "one-safety violated at place "
       << program.place_name(one_safety->place) << " after firing";
    for (TransIdx t : one_safety->firing_sequence)
      os << " " << program.transitions[t].id;
    out.push_back(os.str());
  }
  for (TransIdx t : never_enabled)
    out.push_back("transition " + program.transitions[t].id +
                  " is never enabled");
  return out;
}

CoRelation::CoRelation(const PetriProgram& program, const Reachability& reach)
    : n_places_((int)program.places.size()),
      n_trans_((int)program.transitions.size()) {
  related_.assign((size_t)n_places_ * n_places_, false);
  marked_.assign((size_t)n_places_ * n_trans_, false);
  for (const Marking& m : reach.markings) {
    for (size_t i = 0; i < m.size(); ++i)
      for (size_t j = i + 1; j < m.size(); ++j) {
        related_[(size_t)m[i] * n_places_ + m[j]] = true;
        related_[(size_t)m[j] * n_places_ + m[i]] = true;
      }
    for (int ti = 0; ti < n_trans_; ++ti) {
      const Transition& t = program.transitions[ti];
      if (!is_enabled(m, t))
        continue;
      for (PlaceIdx p : m)
        if (!std::binary_search(t.pre.begin(), t.pre.end(), p))
          marked_[(size_t)p * n_trans_ + ti] = true;
    }
  }
}

bool CoRelation::co_related(PlaceIdx a, PlaceIdx b) const {
  if (a == b)
    return false;
  return related_[(size_t)a * n_places_ + b];
}
bool CoRelation::co_marked(PlaceIdx p, TransIdx t) const {
  return marked_[(size_t)p * n_trans_ + t];
}
std::vector<std::pair<PlaceIdx, TransIdx>> CoRelation::co_marked_pairs() const {
  std::vector<std::pair<PlaceIdx, TransIdx>> out;
  for (PlaceIdx p = 0; p < n_places_; ++p)
    for (TransIdx t = 0; t < n_trans_; ++t)
      if (co_marked(p, t))
        out.push_back({p, t});
  return out;
}
std::vector<std::pair<PlaceIdx, PlaceIdx>> CoRelation::co_related_pairs() const {
  std::vector<std::pair<PlaceIdx, PlaceIdx>> out;
  for (PlaceIdx a = 0; a < n_places_; ++a)
    for (PlaceIdx b = a + 1; b < n_places_; ++b)
      if (co_related(a, b))
        out.push_back({a, b});
  return out;
}

// ---------------------------------------------------------------------------
// Bounded feasibility

std::vector<Formula> encode_trace(const PetriProgram& program,
                                  const std::vector<TransIdx>& trace,
                                  std::vector<Formula>* decls) {
  // SSA-style unrolling: stage k names the state after k steps
  std::map<Formula, Formula> current; // program var -> current symbol
  for (const Formula& v : program.variables.all())
    current[v] = v;
  if (decls)
    for (const Formula& v : program.variables.all())
      decls->push_back(v);

  std::vector<Formula> assertions;
  int stage = 0;
  for (TransIdx ti : trace) {
    const Statement& st = program.transitions[ti].statement;
    ++stage;
    assertions.push_back(substitute(st.guard(), current));
    std::map<Formula, Formula> next = current;
    for (const auto& [var, rhs] : st.assigns()) {
      Formula sym =
          mk_var(var.var_name() + "!" + std::to_string(stage), var.sort());
      assertions.push_back(mk_eq(sym, substitute(rhs, current)));
      next[var] = sym;
      if (decls)
        decls->push_back(sym);
    }
    for (const Formula& var : st.havocs()) {
      Formula sym =
          mk_var(var.var_name() + "!" + std::to_string(stage), var.sort());
      next[var] = sym;
      if (decls)
        decls->push_back(sym);
    }
    current = std::move(next);
  }
  return assertions;
}

FeasibilityResult bounded_feasibility_oracle(const PetriProgram& program,
                                             size_t max_len, Solver& backend) {
  FeasibilityResult result;
  Marking init = program.initial_marking;
  auto is_error_marked = [&](const Marking& m) {
    for (PlaceIdx p : m)
      if (program.is_error_place(p))
        return true;
    return false;
  };

  // minimal distance to an error-marked marking, for pruning
  Reachability reach = reachable_markings(program);
  if (reach.violation) {
    result.verdict = FeasibilityVerdict::Unknown;
    result.diagnostic = "program is not one-safe";
    return result;
  }
  std::vector<int> dist(reach.markings.size(), -1);
  {
    std::deque<int> queue;
    for (size_t i = 0; i < reach.markings.size(); ++i)
      if (is_error_marked(reach.markings[i])) {
        dist[i] = 0;
        queue.push_back((int)i);
      }
    std::vector<std::vector<int>> preds(reach.markings.size());
    for (const auto& e : reach.edges)
      preds[e.to].push_back(e.from);
    while (!queue.empty()) {
      int cur = queue.front();
      queue.pop_front();
      for (int p : preds[cur])
        if (dist[p] < 0) {
          dist[p] = dist[cur] + 1;
          queue.push_back(p);
        }
    }
  }

  bool saw_unknown = false;
  std::string unknown_diag;
  std::vector<TransIdx> trace;

  // depth-first enumeration, stopping at the first error-marked marking of
  // each branch (a feasible longer trace has a feasible such prefix)
  std::function<bool(const Marking&)> explore = [&](const Marking& m) -> bool {
    if (is_error_marked(m)) {
      std::vector<Formula> decls;
      std::vector<Formula> assertions = encode_trace(program, trace, &decls);
      SatAnswer ans = backend.check(assertions, decls);
      if (ans.status == SatStatus::Sat) {
        result.verdict = FeasibilityVerdict::FeasibleErrorTrace;
        result.trace = trace;
        return true;
      }
      if (ans.status == SatStatus::Unknown) {
        saw_unknown = true;
        unknown_diag = ans.diagnostic;
      }
      return false;
    }
    if (trace.size() >= max_len)
      return false;
    int at = reach.index.at(m);
    if (dist[at] < 0 || trace.size() + (size_t)dist[at] > max_len)
      return false;
    for (size_t ti = 0; ti < program.transitions.size(); ++ti) {
      const Transition& t = program.transitions[ti];
      if (!is_enabled(m, t))
        continue;
      trace.push_back((TransIdx)ti);
      bool found = explore(fire(m, t));
      trace.pop_back();
      if (found)
        return true;
    }
    return false;
  };

  if (explore(init))
    return result;
  if (saw_unknown) {
    result.verdict = FeasibilityVerdict::Unknown;
    result.diagnostic = unknown_diag;
  } else {
    result.verdict = FeasibilityVerdict::NoFeasibleErrorTrace;
  }
  return result;
}

} // namespace ogre
