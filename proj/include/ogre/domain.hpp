#pragma once

#include "ogre/petri.hpp"
#include "ogre/solver.hpp"

#include <map>
#include <optional>
#include <string>
#include <vector>

// Invariant domains: the interleaving-based proof input. A domain is a
// product of components; each component is a finite formula set with a post
// table relating formulas across transitions via Hoare triples.

namespace ogre {

enum class PostMode { Table, Strongest, Predicates };

struct DomainError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

class DomainComponent {
public:
  // formulas must contain true and false; explicit entries map
  // (formula index, transition id) to a formula index and override the
  // computed post in Strongest mode.
  DomainComponent(std::vector<Formula> formulas, PostMode mode,
                  std::map<std::pair<int, std::string>, int> entries = {});

  // Predicates mode: the element set is all conjunctions of predicate
  // subsets (bitmask order) plus false; `formulas` is derived.
  static DomainComponent from_predicates(std::vector<Formula> predicates);

  const std::vector<Formula>& formulas() const { return formulas_; }
  PostMode mode() const { return mode_; }
  const std::vector<Formula>& predicates() const { return predicates_; }
  int top_index() const { return top_; }
  int bottom_index() const { return bottom_; }
  int size() const { return (int)formulas_.size(); }

  // Materializes the total post table; must be called once before post().
  // Throws DomainError on missing Table entries, on Strongest results with
  // no representative element, and on solver Unknown.
  void close(const PetriProgram& program, Solver& backend);
  bool closed() const { return closed_; }

  int post(int formula_index, TransIdx t) const;
  const std::map<std::pair<int, std::string>, int>& entries() const {
    return entries_;
  }

private:
  std::vector<Formula> formulas_;
  PostMode mode_;
  std::vector<Formula> predicates_;
  std::map<std::pair<int, std::string>, int> entries_;
  int top_ = -1;
  int bottom_ = -1;
  bool closed_ = false;
  int n_trans_ = 0;
  std::vector<int> table_; // formula-major: [i * n_trans + t]

  int compute_strongest(int i, const Transition& t, const PetriProgram& program,
                        Solver& backend) const;
  int compute_predicate_post(int i, const Transition& t,
                             const PetriProgram& program,
                             Solver& backend) const;
};

// Law vector: one formula index per component, or the distinguished bottom.
class LawVector {
public:
  static LawVector bottom() { return LawVector(); }
  explicit LawVector(std::vector<int> indices)
      : indices_(std::move(indices)), bottom_(false) {}

  bool is_bottom() const { return bottom_; }
  const std::vector<int>& indices() const { return indices_; }
  int component(size_t i) const { return indices_[i]; }

  bool operator==(const LawVector& o) const {
    return bottom_ == o.bottom_ && indices_ == o.indices_;
  }
  bool operator<(const LawVector& o) const {
    if (bottom_ != o.bottom_)
      return bottom_ < o.bottom_;
    return indices_ < o.indices_;
  }

private:
  LawVector() : bottom_(true) {}
  std::vector<int> indices_;
  bool bottom_;
};

class InvariantDomain {
public:
  explicit InvariantDomain(std::vector<DomainComponent> components);

  size_t arity() const { return components_.size(); }
  const DomainComponent& component(size_t i) const { return components_[i]; }
  std::vector<DomainComponent>& components() { return components_; }
  const std::vector<DomainComponent>& components() const { return components_; }

  void close(const PetriProgram& program, Solver& backend);

  // Componentwise post with bottom absorption; post(bottom, t) = bottom.
  LawVector post(const LawVector& law, TransIdx t) const;

  LawVector top_law() const;

  // Conjunction of component formulas in component order; bottom -> false.
  Formula law_formula(const LawVector& law) const;
  Formula component_formula(size_t i, int index) const {
    return components_[i].formulas()[index];
  }

private:
  std::vector<DomainComponent> components_;
};

struct CertificationIssue {
  size_t component;
  int formula_index;
  TransIdx transition;
  int post_index;
  bool unknown; // true: solver could not decide; false: obligation fails
  Valuation witness_pre, witness_post; // on failure
};

struct CertificationReport {
  std::vector<CertificationIssue> violations;
  std::vector<CertificationIssue> unknowns;
  bool ok() const { return violations.empty() && unknowns.empty(); }
};

// Checks every Hoare obligation <phi> t <post(phi,t)> of every component.
CertificationReport certify_domain(const PetriProgram& program,
                                   const InvariantDomain& domain,
                                   Solver& backend);

DomainComponent predicate_abstraction_domain(const PetriProgram& program,
                                             std::vector<Formula> predicates,
                                             Solver& backend);

struct AbstractConfiguration {
  Marking marking;
  LawVector law;
  bool operator<(const AbstractConfiguration& o) const {
    if (marking != o.marking)
      return marking < o.marking;
    return law < o.law;
  }
  bool operator==(const AbstractConfiguration& o) const {
    return marking == o.marking && law == o.law;
  }
};

// Least fixed point of abstract configurations from <m_init, top>.
std::vector<AbstractConfiguration> abstract_reach(const PetriProgram& program,
                                                  const InvariantDomain& domain);

struct SafetyReport {
  bool safe = false;
  std::vector<AbstractConfiguration> offending; // error-marked with law != bottom
};

SafetyReport is_safe(const PetriProgram& program, const InvariantDomain& domain,
                     const std::vector<AbstractConfiguration>& reach);
SafetyReport is_safe(const PetriProgram& program,
                     const InvariantDomain& domain);

} // namespace ogre
