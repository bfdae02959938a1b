#pragma once

#include "ogre/logic.hpp"
#include "ogre/solver.hpp"

#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

// Petri-program model and its concrete control-flow semantics: firing,
// explicit reachability, one-safety, co-related and co-marked relations.
// Reachable markings of one-safe programs are identified with place sets.

namespace ogre {

using PlaceIdx = int;
using TransIdx = int;
using Marking = std::vector<PlaceIdx>; // sorted, duplicate-free

struct Transition {
  std::string id;
  std::vector<PlaceIdx> pre;  // sorted, nonempty
  std::vector<PlaceIdx> succ; // sorted, nonempty
  Statement statement;
};

struct PetriProgram {
  VarDecls variables;
  std::vector<std::string> places;
  std::vector<Transition> transitions;
  Marking initial_marking;
  std::vector<PlaceIdx> error_places; // sorted

  PlaceIdx place_index(const std::string& name) const;
  TransIdx transition_index(const std::string& id) const;
  const std::string& place_name(PlaceIdx p) const { return places[p]; }
  bool is_error_place(PlaceIdx p) const;

  std::string marking_to_string(const Marking& m) const;
};

struct NotEnabledError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

bool is_enabled(const Marking& m, const Transition& t);

// (m minus pre(t)) union succ(t); throws NotEnabledError if pre(t) is not
// contained in m.
Marking fire(const Marking& m, const Transition& t);

struct OneSafetyViolation {
  std::vector<TransIdx> firing_sequence; // from the initial marking
  PlaceIdx place;                        // place that received a second token
};

struct Reachability {
  std::vector<Marking> markings; // BFS order from the initial marking
  std::map<Marking, int> index;
  struct Edge {
    int from;
    TransIdx transition;
    int to;
  };
  std::vector<Edge> edges;
  std::optional<OneSafetyViolation> violation; // set if exploration aborted

  bool contains(const Marking& m) const { return index.count(m) != 0; }
};

// Exact fixed point of breadth-first exploration from the initial marking,
// in place/transition declaration order. Stops at the first one-safety
// violation and reports the offending firing sequence.
Reachability reachable_markings(const PetriProgram& program);

struct ProgramDiagnostics {
  std::optional<OneSafetyViolation> one_safety;
  std::vector<TransIdx> never_enabled;
  std::vector<std::string> structural; // empty pre/succ, undeclared vars, ...
  bool ok() const {
    return !one_safety && never_enabled.empty() && structural.empty();
  }
  std::vector<std::string> messages(const PetriProgram& program) const;
};

ProgramDiagnostics validate_program(const PetriProgram& program);

// Symmetric irreflexive relation: two distinct places jointly covered by
// some reachable marking.
class CoRelation {
public:
  CoRelation(const PetriProgram& program, const Reachability& reach);
  bool co_related(PlaceIdx a, PlaceIdx b) const;
  // place co-marked with transition: p not in pre(t), and some reachable
  // marking contains p and enables t
  bool co_marked(PlaceIdx p, TransIdx t) const;
  std::vector<std::pair<PlaceIdx, TransIdx>> co_marked_pairs() const;
  std::vector<std::pair<PlaceIdx, PlaceIdx>> co_related_pairs() const;

private:
  int n_places_;
  std::vector<bool> related_; // n x n
  std::vector<bool> marked_;  // n x |T|
  int n_trans_;
};

enum class FeasibilityVerdict { NoFeasibleErrorTrace, FeasibleErrorTrace, Unknown };

struct FeasibilityResult {
  FeasibilityVerdict verdict = FeasibilityVerdict::NoFeasibleErrorTrace;
  std::vector<TransIdx> trace; // on FeasibleErrorTrace
  std::string diagnostic;
};

// Bounded testing oracle: enumerates firing sequences of length <= max_len
// that first reach an error-marked marking and checks each for feasibility
// by a sequential relational encoding. Solver Unknown propagates.
FeasibilityResult bounded_feasibility_oracle(const PetriProgram& program,
                                             size_t max_len, Solver& backend);

// Renders one trace's feasibility query (also used by the oracle itself).
std::vector<Formula> encode_trace(const PetriProgram& program,
                                  const std::vector<TransIdx>& trace,
                                  std::vector<Formula>* decls);

} // namespace ogre
