#include "ogre/domain.hpp"

#include <algorithm>
#include <deque>
#include <sstream>

namespace ogre {

DomainComponent::DomainComponent(
    std::vector<Formula> formulas, PostMode mode,
    std::map<std::pair<int, std::string>, int> entries)
    : formulas_(std::move(formulas)), mode_(mode), entries_(std::move(entries)) {
  for (size_t i = 0; i < formulas_.size(); ++i) {
    if (formulas_[i].is_true() && top_ < 0)
      top_ = (int)i;
    if (formulas_[i].is_false() && bottom_ < 0)
      bottom_ = (int)i;
  }
  if (top_ < 0 || bottom_ < 0)
    throw DomainError("domain component must contain true and false");
  for (const auto& [key, to] : entries_) {
    if (key.first < 0 || key.first >= size() || to < 0 || to >= size())
      throw DomainError("post table entry index out of range");
  }
}

DomainComponent DomainComponent::from_predicates(std::vector<Formula> preds) {
  if (preds.size() > 16)
    throw DomainError("too many predicates for subset construction");
  std::vector<Formula> formulas;
  size_t n = preds.size();
  for (size_t mask = 0; mask < (size_t(1) << n); ++mask) {
    std::vector<Formula> conj;
    for (size_t j = 0; j < n; ++j)
      if (mask & (size_t(1) << j))
        conj.push_back(preds[j]);
    formulas.push_back(mk_and(std::move(conj)));
  }
  formulas.push_back(mk_false());
  DomainComponent c(std::move(formulas), PostMode::Predicates);
  c.predicates_ = std::move(preds);
  return c;
}

void DomainComponent::close(const PetriProgram& program, Solver& backend) {
  n_trans_ = (int)program.transitions.size();
  table_.assign((size_t)size() * n_trans_, -1);
  for (int i = 0; i < size(); ++i) {
    for (int ti = 0; ti < n_trans_; ++ti) {
      const Transition& t = program.transitions[ti];
      int result;
      if (i == bottom_) {
        result = bottom_; // post(false, t) = false, globally
      } else if (auto it = entries_.find({i, t.id}); it != entries_.end()) {
        result = it->second;
      } else {
        switch (mode_) {
        case PostMode::Table:
          throw DomainError("post table is missing an entry for (" +
                            formulas_[i].to_string() + ", " + t.id + ")");
        case PostMode::Strongest:
          result = compute_strongest(i, t, program, backend);
          break;
        case PostMode::Predicates:
          result = compute_predicate_post(i, t, program, backend);
          break;
        default:
          throw DomainError("unreachable");
        }
      }
      table_[(size_t)i * n_trans_ + ti] = result;
    }
  }
  closed_ = true;
}

int DomainComponent::post(int i, TransIdx t) const {
  if (!closed_)
    throw DomainError("domain component has not been closed");
  return table_[(size_t)i * n_trans_ + t];
}

int DomainComponent::compute_strongest(int i, const Transition& t,
                                       const PetriProgram&,
                                       Solver& backend) const {
  std::vector<Formula> valid;
  for (int j = 0; j < size(); ++j) {
    HoareAnswer h = check_hoare(formulas_[i], t.statement, formulas_[j], backend);
    if (h.status == HoareStatus::Unknown)
      throw DomainError("solver could not decide post obligation for (" +
                        formulas_[i].to_string() + ", " + t.id + "): " +
                        h.diagnostic);
    if (h.status == HoareStatus::Holds)
      valid.push_back(formulas_[j]);
  }
  Formula conj = mk_and(valid);
  for (int j = 0; j < size(); ++j) {
    Truth eq = equivalent(conj, formulas_[j], backend);
    if (eq == Truth::Unknown)
      throw DomainError("solver could not decide representative equivalence");
    if (eq == Truth::Yes)
      return j;
  }
  throw DomainError("strongest post of (" + formulas_[i].to_string() + ", " +
                    t.id + ") has no representative element: " +
                    conj.to_string());
}

int DomainComponent::compute_predicate_post(int i, const Transition& t,
                                            const PetriProgram&,
                                            Solver& backend) const {
  Formula pre = formulas_[i];
  HoareAnswer blocked = check_hoare(pre, t.statement, mk_false(), backend);
  if (blocked.status == HoareStatus::Unknown)
    throw DomainError("solver could not decide predicate post: " +
                      blocked.diagnostic);
  if (blocked.status == HoareStatus::Holds)
    return bottom_;
  size_t mask = 0;
  for (size_t j = 0; j < predicates_.size(); ++j) {
    HoareAnswer h = check_hoare(pre, t.statement, predicates_[j], backend);
    if (h.status == HoareStatus::Unknown)
      throw DomainError("solver could not decide predicate post: " +
                        h.diagnostic);
    if (h.status == HoareStatus::Holds)
      mask |= size_t(1) << j;
  }
  return (int)mask;
}

// ---------------------------------------------------------------------------

InvariantDomain::InvariantDomain(std::vector<DomainComponent> components)
    : components_(std::move(components)) {
  if (components_.empty())
    throw DomainError("invariant domain needs at least one component");
}

void InvariantDomain::close(const PetriProgram& program, Solver& backend) {
  for (DomainComponent& c : components_)
    c.close(program, backend);
}

LawVector InvariantDomain::top_law() const {
  std::vector<int> idx;
  idx.reserve(components_.size());
  for (const DomainComponent& c : components_)
    idx.push_back(c.top_index());
  return LawVector(std::move(idx));
}

LawVector InvariantDomain::post(const LawVector& law, TransIdx t) const {
  if (law.is_bottom())
    return LawVector::bottom();
  std::vector<int> out(components_.size());
  for (size_t i = 0; i < components_.size(); ++i) {
    int next = components_[i].post(law.component(i), t);
    if (next == components_[i].bottom_index())
      return LawVector::bottom();
    out[i] = next;
  }
  return LawVector(std::move(out));
}

Formula InvariantDomain::law_formula(const LawVector& law) const {
  if (law.is_bottom())
    return mk_false();
  std::vector<Formula> conj;
  for (size_t i = 0; i < components_.size(); ++i)
    conj.push_back(components_[i].formulas()[law.component(i)]);
  return mk_and(std::move(conj));
}

CertificationReport certify_domain(const PetriProgram& program,
                                   const InvariantDomain& domain,
                                   Solver& backend) {
  CertificationReport report;
  for (size_t ci = 0; ci < domain.arity(); ++ci) {
    const DomainComponent& c = domain.component(ci);
    for (int i = 0; i < c.size(); ++i) {
      for (size_t ti = 0; ti < program.transitions.size(); ++ti) {
        int j = c.post(i, (TransIdx)ti);
        HoareAnswer h = check_hoare(c.formulas()[i],
                                    program.transitions[ti].statement,
                                    c.formulas()[j], backend);
        if (h.status == HoareStatus::Holds)
          continue;
        CertificationIssue issue;
        issue.component = ci;
        issue.formula_index = i;
        issue.transition = (TransIdx)ti;
        issue.post_index = j;
        issue.unknown = h.status == HoareStatus::Unknown;
        if (h.status == HoareStatus::Fails) {
          issue.witness_pre = h.pre_state;
          issue.witness_post = h.post_state;
          report.violations.push_back(std::move(issue));
        } else {
          report.unknowns.push_back(std::move(issue));
        }
      }
    }
  }
  return report;
}

DomainComponent predicate_abstraction_domain(const PetriProgram& program,
                                             std::vector<Formula> predicates,
                                             Solver& backend) {
  DomainComponent c = DomainComponent::from_predicates(std::move(predicates));
  c.close(program, backend);
  return c;
}

std::vector<AbstractConfiguration>
abstract_reach(const PetriProgram& program, const InvariantDomain& domain) {
  std::vector<AbstractConfiguration> order;
  std::set<AbstractConfiguration> seen;
  AbstractConfiguration init{program.initial_marking, domain.top_law()};
  seen.insert(init);
  order.push_back(init);
  std::deque<size_t> queue{0};
  while (!queue.empty()) {
    AbstractConfiguration cur = order[queue.front()];
    queue.pop_front();
    for (size_t ti = 0; ti < program.transitions.size(); ++ti) {
      const Transition& t = program.transitions[ti];
      if (!is_enabled(cur.marking, t))
        continue;
      AbstractConfiguration next{fire(cur.marking, t),
                                 domain.post(cur.law, (TransIdx)ti)};
      if (seen.insert(next).second) {
        order.push_back(next);
        queue.push_back(order.size() - 1);
      }
    }
  }
  return order;
}

SafetyReport is_safe(const PetriProgram& program, const InvariantDomain& domain,
                     const std::vector<AbstractConfiguration>& reach) {
  SafetyReport report;
  report.safe = true;
  for (const AbstractConfiguration& cfg : reach) {
    bool error_marked = false;
    for (PlaceIdx p : cfg.marking)
      if (program.is_error_place(p))
        error_marked = true;
    if (error_marked && !cfg.law.is_bottom()) {
      report.safe = false;
      report.offending.push_back(cfg);
    }
  }
  (void)domain;
  return report;
}

SafetyReport is_safe(const PetriProgram& program,
                     const InvariantDomain& domain) {
  return is_safe(program, domain, abstract_reach(program, domain));
}

} // namespace ogre
