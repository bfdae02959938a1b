#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <variant>
#include <vector>

// Quantifier-free formulas over Int/Bool variables, interned in a global
// term DAG. Terms are canonicalized on construction: nested and/or are
// flattened (child order preserved), literal-only subterms are folded, and
// and/or absorb a true/false child. No other rewriting happens, so printed
// formulas stay recognizable and DAG sizes are reproducible.

namespace ogre {

enum class Sort : uint8_t { Int, Bool };

std::string_view sort_name(Sort s);

enum class Kind : uint8_t {
  Var,
  IntConst,
  BoolConst,
  Add,
  Sub,
  Neg,
  Mul,
  Div,
  Mod,
  Lt,
  Le,
  Gt,
  Ge,
  Eq,       // Int = Int or Bool = Bool
  Distinct, // binary
  And,      // n-ary, flattened
  Or,       // n-ary, flattened
  Not,
  Implies, // binary
  Ite,
};

class Formula;
namespace detail {
struct FormulaFactory;
}

struct SortError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct ParseError : std::runtime_error {
  ParseError(const std::string& msg, int line, int col);
  int line;
  int col;
};
struct EvalError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

using Value = std::variant<int64_t, bool>;

// Total map from variables to values; respects sorts.
class Valuation {
public:
  void set(const Formula& var, Value v);
  Value get(const Formula& var) const;
  bool has(const Formula& var) const;
  const std::map<uint32_t, Value>& entries() const { return values_; }

private:
  std::map<uint32_t, Value> values_;
};

// Immutable handle into the interned term DAG. Syntactic equality is
// identity: two Formula handles are equal iff they carry the same id.
class Formula {
public:
  Formula() : id_(UINT32_MAX) {}
  bool valid() const { return id_ != UINT32_MAX; }
  uint32_t id() const { return id_; }

  Kind kind() const;
  Sort sort() const;
  int64_t int_value() const;     // IntConst
  bool bool_value() const;       // BoolConst
  const std::string& var_name() const; // Var
  std::span<const Formula> children() const;
  Formula child(size_t i) const;
  size_t arity() const;

  bool operator==(const Formula& o) const { return id_ == o.id_; }
  bool operator!=(const Formula& o) const { return id_ != o.id_; }
  bool operator<(const Formula& o) const { return id_ < o.id_; }

  bool is_true() const;
  bool is_false() const;

  // Number of distinct nodes in this term's DAG.
  size_t dag_size() const;

  std::set<Formula> free_vars() const;
  std::string to_string() const; // SMT-LIB2 term

private:
  friend struct detail::FormulaFactory;
  explicit Formula(uint32_t id) : id_(id) {}
  uint32_t id_;
};

// Term builders. All construction goes through these; results are interned.
Formula mk_true();
Formula mk_false();
Formula mk_bool(bool b);
Formula mk_int(int64_t v);
Formula mk_var(const std::string& name, Sort sort);
Formula mk_add(std::vector<Formula> args);
Formula mk_sub(std::vector<Formula> args); // left-assoc fold, unary = negation
Formula mk_neg(Formula a);
Formula mk_mul(std::vector<Formula> args);
Formula mk_div(Formula a, Formula b); // SMT-LIB Euclidean div
Formula mk_mod(Formula a, Formula b);
Formula mk_lt(Formula a, Formula b);
Formula mk_le(Formula a, Formula b);
Formula mk_gt(Formula a, Formula b);
Formula mk_ge(Formula a, Formula b);
Formula mk_eq(Formula a, Formula b);
Formula mk_distinct(Formula a, Formula b);
Formula mk_and(std::vector<Formula> args); // empty -> true
Formula mk_or(std::vector<Formula> args);  // empty -> false
Formula mk_not(Formula a);
Formula mk_implies(Formula a, Formula b);
Formula mk_ite(Formula c, Formula t, Formula e);

// Variable declarations for parsing and program construction.
class VarDecls {
public:
  VarDecls() = default;
  Formula declare(const std::string& name, Sort sort);
  std::optional<Formula> lookup(const std::string& name) const;
  const std::vector<Formula>& all() const { return vars_; }
  bool contains(const Formula& v) const;

private:
  std::vector<Formula> vars_;
  std::unordered_map<std::string, Formula> by_name_;
};

// Parses an SMT-LIB2 term restricted to sorts Int/Bool and the operator set
// above. All free symbols must be declared. Throws ParseError / SortError.
Formula parse_formula(std::string_view text, const VarDecls& decls);

// Simultaneous substitution; keys must be variables, expressions well-sorted.
Formula substitute(Formula f, const std::map<Formula, Formula>& sub);

// Standard semantics; Euclidean div/mod. Throws EvalError on division by
// zero or a missing variable.
Value eval(Formula f, const Valuation& v);
bool eval_bool(Formula f, const Valuation& v);

int64_t euclidean_div(int64_t a, int64_t b);
int64_t euclidean_mod(int64_t a, int64_t b);

// Guarded simultaneous assignment with havoc, executed atomically: block if
// the guard is false, otherwise evaluate all right-hand sides in the
// pre-state, assign simultaneously, and set havoced variables arbitrarily.
class Statement {
public:
  Statement();
  Statement(Formula guard, std::map<Formula, Formula> assigns,
            std::set<Formula> havocs);

  static Statement assume(Formula guard);
  static Statement assign(Formula var, Formula rhs);

  Formula guard() const { return guard_; }
  const std::map<Formula, Formula>& assigns() const { return assigns_; }
  const std::set<Formula>& havocs() const { return havocs_; }

  std::set<Formula> referenced_vars() const;
  std::string to_string() const;

private:
  Formula guard_;
  std::map<Formula, Formula> assigns_;
  std::set<Formula> havocs_;
};

// guard => post[assigns], with havoced variables replaced by fresh symbols
// that the caller must treat as universally interpreted.
struct WpResult {
  Formula formula;
  std::vector<Formula> universals; // fresh symbols introduced for havocs
};
WpResult wp(const Statement& st, Formula post);

} // namespace ogre

template <> struct std::hash<ogre::Formula> {
  size_t operator()(const ogre::Formula& f) const noexcept {
    return std::hash<uint32_t>()(f.id());
  }
};
