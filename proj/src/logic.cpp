#include "ogre/logic.hpp"

#include <algorithm>
#include <cassert>
#include <mutex>
#include <sstream>

namespace ogre {

namespace detail {
struct FormulaFactory {
  static Formula make(uint32_t id) { return Formula(id); }
};
} // namespace detail

std::string_view sort_name(Sort s) { return s == Sort::Int ? "Int" : "Bool"; }

ParseError::ParseError(const std::string& msg, int line, int col)
    : std::runtime_error(msg + " (line " + std::to_string(line) + ", column " +
                         std::to_string(col) + ")"),
      line(line), col(col) {}

namespace {

struct Node {
  Kind kind;
  Sort sort;
  int64_t payload = 0;        // IntConst value / BoolConst flag / var name idx
  std::vector<Formula> children;
};

struct NodeKey {
  Kind kind;
  int64_t payload;
  std::vector<uint32_t> children;
  bool operator==(const NodeKey& o) const {
    return kind == o.kind && payload == o.payload && children == o.children;
  }
};

struct NodeKeyHash {
  size_t operator()(const NodeKey& k) const {
    size_t h = std::hash<int>()(static_cast<int>(k.kind));
    auto mix = [&h](size_t v) {
      h ^= v + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
    };
    mix(std::hash<int64_t>()(k.payload));
    for (uint32_t c : k.children)
      mix(std::hash<uint32_t>()(c));
    return h;
  }
};

// Process-global interner. Guarded by a mutex so concurrent interning is
// safe; reads of already-built nodes go through stable pointers.
class Arena {
public:
  static Arena& instance() {
    static Arena a;
    return a;
  }

  Formula intern(Node n) {
    NodeKey key{n.kind, n.payload, {}};
    key.children.reserve(n.children.size());
    for (const Formula& c : n.children)
      key.children.push_back(c.id());
    std::lock_guard<std::mutex> lock(mutex_);
    auto it = index_.find(key);
    if (it != index_.end())
      return detail::FormulaFactory::make(it->second);
    uint32_t id = static_cast<uint32_t>(nodes_.size());
    nodes_.push_back(new Node(std::move(n)));
    index_.emplace(std::move(key), id);
    return detail::FormulaFactory::make(id);
  }

  Formula intern_var(const std::string& name, Sort sort) {
    std::lock_guard<std::mutex> lock(mutex_);
    auto it = var_index_.find(name);
    if (it != var_index_.end()) {
      const Node* n = nodes_[it->second];
      if (n->sort != sort)
        throw SortError("variable '" + name + "' already declared with sort " +
                        std::string(sort_name(n->sort)));
      return detail::FormulaFactory::make(it->second);
    }
    uint32_t id = static_cast<uint32_t>(nodes_.size());
    Node* n = new Node{Kind::Var, sort, static_cast<int64_t>(var_names_.size()), {}};
    var_names_.push_back(name);
    nodes_.push_back(n);
    var_index_.emplace(name, id);
    return detail::FormulaFactory::make(id);
  }

  const Node& node(uint32_t id) const { return *nodes_[id]; }
  const std::string& var_name(int64_t idx) const { return var_names_[idx]; }

private:
  Arena() = default;
  std::mutex mutex_;
  std::vector<Node*> nodes_; // stable pointers, never freed
  std::unordered_map<NodeKey, uint32_t, NodeKeyHash> index_;
  std::unordered_map<std::string, uint32_t> var_index_;
  std::vector<std::string> var_names_;
};

const Node& node_of(const Formula& f) { return Arena::instance().node(f.id()); }

void require_sort(const Formula& f, Sort s, const char* ctx) {
  if (f.sort() != s)
    throw SortError(std::string(ctx) + ": expected " +
                    std::string(sort_name(s)) + " but got " +
                    std::string(sort_name(f.sort())) + " in " + f.to_string());
}

bool all_literal(const std::vector<Formula>& args) {
  for (const Formula& a : args)
    if (a.kind() != Kind::IntConst && a.kind() != Kind::BoolConst)
      return false;
  return true;
}

} // namespace

Kind Formula::kind() const { return node_of(*this).kind; }
Sort Formula::sort() const { return node_of(*this).sort; }
int64_t Formula::int_value() const {
  assert(kind() == Kind::IntConst);
  return node_of(*this).payload;
}
bool Formula::bool_value() const {
  assert(kind() == Kind::BoolConst);
  return node_of(*this).payload != 0;
}
const std::string& Formula::var_name() const {
  assert(kind() == Kind::Var);
  return Arena::instance().var_name(node_of(*this).payload);
}
std::span<const Formula> Formula::children() const {
  const Node& n = node_of(*this);
  return {n.children.data(), n.children.size()};
}
Formula Formula::child(size_t i) const { return node_of(*this).children[i]; }
size_t Formula::arity() const { return node_of(*this).children.size(); }
bool Formula::is_true() const {
  return kind() == Kind::BoolConst && bool_value();
}
bool Formula::is_false() const {
  return kind() == Kind::BoolConst && !bool_value();
}

size_t Formula::dag_size() const {
  std::set<uint32_t> seen;
  std::vector<Formula> stack{*this};
  while (!stack.empty()) {
    Formula f = stack.back();
    stack.pop_back();
    if (!seen.insert(f.id()).second)
      continue;
    for (const Formula& c : f.children())
      stack.push_back(c);
  }
  return seen.size();
}

std::set<Formula> Formula::free_vars() const {
  std::set<Formula> out;
  std::set<uint32_t> seen;
  std::vector<Formula> stack{*this};
  while (!stack.empty()) {
    Formula f = stack.back();
    stack.pop_back();
    if (!seen.insert(f.id()).second)
      continue;
    if (f.kind() == Kind::Var)
      out.insert(f);
    for (const Formula& c : f.children())
      stack.push_back(c);
  }
  return out;
}

void Valuation::set(const Formula& var, Value v) {
  if (var.kind() != Kind::Var)
    throw EvalError("valuation key is not a variable");
  bool is_int = std::holds_alternative<int64_t>(v);
  if ((var.sort() == Sort::Int) != is_int)
    throw EvalError("valuation value has wrong sort for " + var.var_name());
  values_[var.id()] = v;
}
Value Valuation::get(const Formula& var) const {
  auto it = values_.find(var.id());
  if (it == values_.end())
    throw EvalError("valuation is not total: missing " + var.var_name());
  return it->second;
}
bool Valuation::has(const Formula& var) const {
  return values_.count(var.id()) != 0;
}

Formula mk_true() {
  return Arena::instance().intern({Kind::BoolConst, Sort::Bool, 1, {}});
}
Formula mk_false() {
  return Arena::instance().intern({Kind::BoolConst, Sort::Bool, 0, {}});
}
Formula mk_bool(bool b) { return b ? mk_true() : mk_false(); }
Formula mk_int(int64_t v) {
  return Arena::instance().intern({Kind::IntConst, Sort::Int, v, {}});
}
Formula mk_var(const std::string& name, Sort sort) {
  return Arena::instance().intern_var(name, sort);
}

namespace {

Formula mk_arith(Kind k, std::vector<Formula> args, const char* ctx) {
  for (const Formula& a : args)
    require_sort(a, Sort::Int, ctx);
  if (all_literal(args)) {
    int64_t v = args[0].int_value();
    for (size_t i = 1; i < args.size(); ++i) {
      int64_t w = args[i].int_value();
      switch (k) {
      case Kind::Add: v += w; break;
      case Kind::Sub: v -= w; break;
      case Kind::Mul: v *= w; break;
      default: assert(false);
      }
    }
    return mk_int(v);
  }
  return Arena::instance().intern({k, Sort::Int, 0, std::move(args)});
}

} // namespace

Formula mk_add(std::vector<Formula> args) {
  if (args.size() == 1)
    return args[0];
  return mk_arith(Kind::Add, std::move(args), "+");
}
Formula mk_sub(std::vector<Formula> args) {
  if (args.size() == 1)
    return mk_neg(args[0]);
  if (args.size() == 2)
    return mk_arith(Kind::Sub, std::move(args), "-");
  // left-associative fold for n-ary minus
  Formula acc = args[0];
  for (size_t i = 1; i < args.size(); ++i)
    acc = mk_sub({acc, args[i]});
  return acc;
}
Formula mk_neg(Formula a) {
  require_sort(a, Sort::Int, "-");
  if (a.kind() == Kind::IntConst)
    return mk_int(-a.int_value());
  return Arena::instance().intern({Kind::Neg, Sort::Int, 0, {a}});
}
Formula mk_mul(std::vector<Formula> args) {
  if (args.size() == 1)
    return args[0];
  return mk_arith(Kind::Mul, std::move(args), "*");
}
Formula mk_div(Formula a, Formula b) {
  require_sort(a, Sort::Int, "div");
  require_sort(b, Sort::Int, "div");
  if (a.kind() == Kind::IntConst && b.kind() == Kind::IntConst &&
      b.int_value() != 0)
    return mk_int(euclidean_div(a.int_value(), b.int_value()));
  return Arena::instance().intern({Kind::Div, Sort::Int, 0, {a, b}});
}
Formula mk_mod(Formula a, Formula b) {
  require_sort(a, Sort::Int, "mod");
  require_sort(b, Sort::Int, "mod");
  if (a.kind() == Kind::IntConst && b.kind() == Kind::IntConst &&
      b.int_value() != 0)
    return mk_int(euclidean_mod(a.int_value(), b.int_value()));
  return Arena::instance().intern({Kind::Mod, Sort::Int, 0, {a, b}});
}

namespace {
Formula mk_cmp(Kind k, Formula a, Formula b, const char* ctx) {
  require_sort(a, Sort::Int, ctx);
  require_sort(b, Sort::Int, ctx);
  if (a.kind() == Kind::IntConst && b.kind() == Kind::IntConst) {
    int64_t x = a.int_value(), y = b.int_value();
    switch (k) {
    case Kind::Lt: return mk_bool(x < y);
    case Kind::Le: return mk_bool(x <= y);
    case Kind::Gt: return mk_bool(x > y);
    case Kind::Ge: return mk_bool(x >= y);
    default: assert(false);
    }
  }
  return Arena::instance().intern({k, Sort::Bool, 0, {a, b}});
}
} // namespace

Formula mk_lt(Formula a, Formula b) { return mk_cmp(Kind::Lt, a, b, "<"); }
Formula mk_le(Formula a, Formula b) { return mk_cmp(Kind::Le, a, b, "<="); }
Formula mk_gt(Formula a, Formula b) { return mk_cmp(Kind::Gt, a, b, ">"); }
Formula mk_ge(Formula a, Formula b) { return mk_cmp(Kind::Ge, a, b, ">="); }

Formula mk_eq(Formula a, Formula b) {
  if (a.sort() != b.sort())
    throw SortError("=: operands have different sorts: " + a.to_string() +
                    " vs " + b.to_string());
  if (a.kind() == Kind::IntConst && b.kind() == Kind::IntConst)
    return mk_bool(a.int_value() == b.int_value());
  if (a.kind() == Kind::BoolConst && b.kind() == Kind::BoolConst)
    return mk_bool(a.bool_value() == b.bool_value());
  return Arena::instance().intern({Kind::Eq, Sort::Bool, 0, {a, b}});
}
Formula mk_distinct(Formula a, Formula b) {
  if (a.sort() != b.sort())
    throw SortError("distinct: operands have different sorts");
  if (a.kind() == Kind::IntConst && b.kind() == Kind::IntConst)
    return mk_bool(a.int_value() != b.int_value());
  if (a.kind() == Kind::BoolConst && b.kind() == Kind::BoolConst)
    return mk_bool(a.bool_value() != b.bool_value());
  return Arena::instance().intern({Kind::Distinct, Sort::Bool, 0, {a, b}});
}

namespace {
// Flatten nested and/or (order preserved), absorb true/false children.
Formula mk_nary_bool(Kind k, std::vector<Formula> args) {
  const bool is_and = (k == Kind::And);
  std::vector<Formula> flat;
  for (const Formula& a : args) {
    require_sort(a, Sort::Bool, is_and ? "and" : "or");
    if (a.kind() == k) {
      for (const Formula& c : a.children())
        flat.push_back(c);
    } else if (a.kind() == Kind::BoolConst) {
      if (a.bool_value() == is_and)
        continue; // neutral element
      return mk_bool(!is_and); // absorbing element
    } else {
      flat.push_back(a);
    }
  }
  if (flat.empty())
    return mk_bool(is_and);
  if (flat.size() == 1)
    return flat[0];
  return Arena::instance().intern({k, Sort::Bool, 0, std::move(flat)});
}
} // namespace

Formula mk_and(std::vector<Formula> args) {
  return mk_nary_bool(Kind::And, std::move(args));
}
Formula mk_or(std::vector<Formula> args) {
  return mk_nary_bool(Kind::Or, std::move(args));
}
Formula mk_not(Formula a) {
  require_sort(a, Sort::Bool, "not");
  if (a.kind() == Kind::BoolConst)
    return mk_bool(!a.bool_value());
  return Arena::instance().intern({Kind::Not, Sort::Bool, 0, {a}});
}
Formula mk_implies(Formula a, Formula b) {
  require_sort(a, Sort::Bool, "=>");
  require_sort(b, Sort::Bool, "=>");
  if (a.kind() == Kind::BoolConst && b.kind() == Kind::BoolConst)
    return mk_bool(!a.bool_value() || b.bool_value());
  return Arena::instance().intern({Kind::Implies, Sort::Bool, 0, {a, b}});
}
Formula mk_ite(Formula c, Formula t, Formula e) {
  require_sort(c, Sort::Bool, "ite");
  if (t.sort() != e.sort())
    throw SortError("ite: branches have different sorts");
  if (c.kind() == Kind::BoolConst && t.kind() != Kind::Var &&
      e.kind() != Kind::Var) {
    // fold only when the whole subterm is literal
    bool lit = (t.kind() == Kind::IntConst || t.kind() == Kind::BoolConst) &&
               (e.kind() == Kind::IntConst || e.kind() == Kind::BoolConst);
    if (lit)
      return c.bool_value() ? t : e;
  }
  return Arena::instance().intern({Kind::Ite, t.sort(), 0, {c, t, e}});
}

Formula VarDecls::declare(const std::string& name, Sort sort) {
  auto it = by_name_.find(name);
  if (it != by_name_.end()) {
    if (it->second.sort() != sort)
      throw SortError("redeclaration of '" + name + "' with different sort");
    return it->second;
  }
  Formula v = mk_var(name, sort);
  vars_.push_back(v);
  by_name_.emplace(name, v);
  return v;
}
std::optional<Formula> VarDecls::lookup(const std::string& name) const {
  auto it = by_name_.find(name);
  if (it == by_name_.end())
    return std::nullopt;
  return it->second;
}
bool VarDecls::contains(const Formula& v) const {
  auto it = by_name_.find(v.var_name());
  return it != by_name_.end() && it->second == v;
}

// ---------------------------------------------------------------------------
// Printing


std::string Formula::to_string() const {
  std::ostringstream os;
  struct Printer {
    std::ostream& os;
    void print(const Formula& f) {
      switch (f.kind()) {
      case Kind::Var:
        os << f.var_name();
        return;
      case Kind::IntConst: {
        int64_t v = f.int_value();
        if (v < 0) {
          os << "(- ";
          // avoid overflow on INT64_MIN
          os << static_cast<uint64_t>(-(v + 1)) + 1;
          os << ")";
        } else {
          os << v;
        }
        return;
      }
      case Kind::BoolConst:
        os << (f.bool_value() ? "true" : "false");
        return;
      default:
        break;
      }
      static const std::unordered_map<int, const char*> ops = {
          {(int)Kind::Add, "+"},        {(int)Kind::Sub, "-"},
          {(int)Kind::Neg, "-"},        {(int)Kind::Mul, "*"},
          {(int)Kind::Div, "div"},      {(int)Kind::Mod, "mod"},
          {(int)Kind::Lt, "<"},         {(int)Kind::Le, "<="},
          {(int)Kind::Gt, ">"},         {(int)Kind::Ge, ">="},
          {(int)Kind::Eq, "="},         {(int)Kind::Distinct, "distinct"},
          {(int)Kind::And, "and"},      {(int)Kind::Or, "or"},
          {(int)Kind::Not, "not"},      {(int)Kind::Implies, "=>"},
          {(int)Kind::Ite, "ite"},
      };
      os << "(" << ops.at((int)f.kind());
      for (const Formula& c : f.children()) {
        os << " ";
        print(c);
      }
      os << ")";
    }
  } p{os};
  p.print(*this);
  return os.str();
}

// ---------------------------------------------------------------------------
// Parsing (SMT-LIB2 term subset)

namespace {

struct Token {
  enum Type { LParen, RParen, Symbol, Numeral, End } type;
  std::string text;
  int line;
  int col;
};

class Lexer {
public:
  explicit Lexer(std::string_view text) : text_(text) {}

  Token next() {
    skip_ws();
    int line = line_, col = col_;
    if (pos_ >= text_.size())
      return {Token::End, "", line, col};
    char c = text_[pos_];
    if (c == '(') {
      advance();
      return {Token::LParen, "(", line, col};
    }
    if (c == ')') {
      advance();
      return {Token::RParen, ")", line, col};
    }
    if (std::isdigit(static_cast<unsigned char>(c))) {
      std::string s;
      while (pos_ < text_.size() &&
             std::isdigit(static_cast<unsigned char>(text_[pos_]))) {
        s += text_[pos_];
        advance();
      }
      return {Token::Numeral, s, line, col};
    }
    if (is_symbol_char(c)) {
      std::string s;
      while (pos_ < text_.size() && is_symbol_char(text_[pos_])) {
        s += text_[pos_];
        advance();
      }
      return {Token::Symbol, s, line, col};
    }
    throw ParseError(std::string("unexpected character '") + c + "'", line,
                     col);
  }

private:
  static bool is_symbol_char(char c) {
    if (std::isalnum(static_cast<unsigned char>(c)))
      return true;
    return std::string_view("~!@$%^&*_-+=<>.?/").find(c) !=
           std::string_view::npos;
  }
  void skip_ws() {
    while (pos_ < text_.size()) {
      char c = text_[pos_];
      if (c == ';') { // comment to end of line
        while (pos_ < text_.size() && text_[pos_] != '\n')
          advance();
      } else if (std::isspace(static_cast<unsigned char>(c))) {
        advance();
      } else {
        break;
      }
    }
  }
  void advance() {
    if (text_[pos_] == '\n') {
      ++line_;
      col_ = 1;
    } else {
      ++col_;
    }
    ++pos_;
  }
  std::string_view text_;
  size_t pos_ = 0;
  int line_ = 1;
  int col_ = 1;
};

class TermParser {
public:
  TermParser(std::string_view text, const VarDecls& decls)
      : lexer_(text), decls_(decls) {
    cur_ = lexer_.next();
  }

  Formula parse_full() {
    Formula f = parse_term();
    if (cur_.type != Token::End)
      throw ParseError("trailing input after term", cur_.line, cur_.col);
    return f;
  }

private:
  void bump() { cur_ = lexer_.next(); }

  Formula parse_term() {
    switch (cur_.type) {
    case Token::Numeral: {
      int64_t v = std::stoll(cur_.text);
      bump();
      return mk_int(v);
    }
    case Token::Symbol: {
      std::string sym = cur_.text;
      int line = cur_.line, col = cur_.col;
      bump();
      if (sym == "true")
        return mk_true();
      if (sym == "false")
        return mk_false();
      auto v = decls_.lookup(sym);
      if (!v)
        throw ParseError("undeclared symbol '" + sym + "'", line, col);
      return *v;
    }
    case Token::LParen:
      return parse_application();
    case Token::RParen:
      throw ParseError("unexpected ')'", cur_.line, cur_.col);
    case Token::End:
      throw ParseError("unexpected end of input", cur_.line, cur_.col);
    }
    throw ParseError("unreachable", cur_.line, cur_.col);
  }

  Formula parse_application() {
    bump(); // consume '('
    if (cur_.type != Token::Symbol)
      throw ParseError("expected operator symbol", cur_.line, cur_.col);
    std::string op = cur_.text;
    int line = cur_.line, col = cur_.col;
    bump();
    std::vector<Formula> args;
    while (cur_.type != Token::RParen) {
      if (cur_.type == Token::End)
        throw ParseError("unbalanced '(': missing ')'", cur_.line, cur_.col);
      args.push_back(parse_term());
    }
    bump(); // consume ')'
    auto want = [&](size_t n) {
      if (args.size() != n)
        throw ParseError("operator '" + op + "' expects " + std::to_string(n) +
                             " arguments, got " + std::to_string(args.size()),
                         line, col);
    };
    auto want_least = [&](size_t n) {
      if (args.size() < n)
        throw ParseError("operator '" + op + "' expects at least " +
                             std::to_string(n) + " arguments",
                         line, col);
    };
    try {
      if (op == "+") { want_least(2); return mk_add(std::move(args)); }
      if (op == "-") { want_least(1); return mk_sub(std::move(args)); }
      if (op == "*") { want_least(2); return mk_mul(std::move(args)); }
      if (op == "div") { want(2); return mk_div(args[0], args[1]); }
      if (op == "mod") { want(2); return mk_mod(args[0], args[1]); }
      if (op == "<") { want(2); return mk_lt(args[0], args[1]); }
      if (op == "<=") { want(2); return mk_le(args[0], args[1]); }
      if (op == ">") { want(2); return mk_gt(args[0], args[1]); }
      if (op == ">=") { want(2); return mk_ge(args[0], args[1]); }
      if (op == "=") { want(2); return mk_eq(args[0], args[1]); }
      if (op == "distinct") { want(2); return mk_distinct(args[0], args[1]); }
      if (op == "and") { want_least(1); return mk_and(std::move(args)); }
      if (op == "or") { want_least(1); return mk_or(std::move(args)); }
      if (op == "not") { want(1); return mk_not(args[0]); }
      if (op == "=>") { want(2); return mk_implies(args[0], args[1]); }
      if (op == "ite") { want(3); return mk_ite(args[0], args[1], args[2]); }
    } catch (const SortError&) {
      throw;
    }
    throw ParseError("unknown operator '" + op + "'", line, col);
  }

  Lexer lexer_;
  const VarDecls& decls_;
  Token cur_;
};

} // namespace

Formula parse_formula(std::string_view text, const VarDecls& decls) {
  TermParser p(text, decls);
  return p.parse_full();
}

// ---------------------------------------------------------------------------
// Substitution

namespace {
Formula substitute_rec(Formula f, const std::map<Formula, Formula>& sub,
                       std::unordered_map<uint32_t, Formula>& memo) {
  auto it = memo.find(f.id());
  if (it != memo.end())
    return it->second;
  Formula result;
  if (f.kind() == Kind::Var) {
    auto s = sub.find(f);
    result = (s != sub.end()) ? s->second : f;
  } else if (f.arity() == 0) {
    result = f;
  } else {
    std::vector<Formula> kids;
    kids.reserve(f.arity());
    bool changed = false;
    for (const Formula& c : f.children()) {
      Formula nc = substitute_rec(c, sub, memo);
      changed |= (nc != c);
      kids.push_back(nc);
    }
    if (!changed) {
      result = f;
    } else {
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
      default: assert(false); result = f;
      }
    }
  }
  memo.emplace(f.id(), result);
  return result;
}
} // namespace

Formula substitute(Formula f, const std::map<Formula, Formula>& sub) {
  for (const auto& [var, repl] : sub) {
    if (var.kind() != Kind::Var)
      throw SortError("substitute: key is not a variable");
    if (var.sort() != repl.sort())
      throw SortError("substitute: sort mismatch for " + var.var_name());
  }
  std::unordered_map<uint32_t, Formula> memo;
  return substitute_rec(f, sub, memo);
}

// ---------------------------------------------------------------------------
// Evaluation

int64_t euclidean_div(int64_t a, int64_t b) {
  // SMT-LIB Ints: a = b*q + r with 0 <= r < |b|
  int64_t q = a / b;
  int64_t r = a % b;
  if (r < 0)
    q += (b > 0) ? -1 : 1;
  return q;
}
int64_t euclidean_mod(int64_t a, int64_t b) {
  int64_t r = a % b;
  if (r < 0)
    r += (b > 0) ? b : -b;
  return r;
}

namespace {
Value eval_rec(Formula f, const Valuation& v,
               std::unordered_map<uint32_t, Value>& memo) {
  auto it = memo.find(f.id());
  if (it != memo.end())
    return it->second;
  auto as_int = [&](const Formula& g) {
    return std::get<int64_t>(eval_rec(g, v, memo));
  };
  auto as_bool = [&](const Formula& g) {
    return std::get<bool>(eval_rec(g, v, memo));
  };
  Value result;
  switch (f.kind()) {
  case Kind::Var: result = v.get(f); break;
  case Kind::IntConst: result = f.int_value(); break;
  case Kind::BoolConst: result = f.bool_value(); break;
  case Kind::Add: {
    int64_t acc = 0;
    for (const Formula& c : f.children())
      acc += as_int(c);
    result = acc;
    break;
  }
  case Kind::Sub: result = as_int(f.child(0)) - as_int(f.child(1)); break;
  case Kind::Neg: result = -as_int(f.child(0)); break;
  case Kind::Mul: {
    int64_t acc = 1;
    for (const Formula& c : f.children())
      acc *= as_int(c);
    result = acc;
    break;
  }
  case Kind::Div: {
    int64_t d = as_int(f.child(1));
    if (d == 0)
      throw EvalError("division by zero in " + f.to_string());
    result = euclidean_div(as_int(f.child(0)), d);
    break;
  }
  case Kind::Mod: {
    int64_t d = as_int(f.child(1));
    if (d == 0)
      throw EvalError("modulo by zero in " + f.to_string());
    result = euclidean_mod(as_int(f.child(0)), d);
    break;
  }
  case Kind::Lt: result = as_int(f.child(0)) < as_int(f.child(1)); break;
  case Kind::Le: result = as_int(f.child(0)) <= as_int(f.child(1)); break;
  case Kind::Gt: result = as_int(f.child(0)) > as_int(f.child(1)); break;
  case Kind::Ge: result = as_int(f.child(0)) >= as_int(f.child(1)); break;
  case Kind::Eq:
    if (f.child(0).sort() == Sort::Int)
      result = as_int(f.child(0)) == as_int(f.child(1));
    else
      result = as_bool(f.child(0)) == as_bool(f.child(1));
    break;
  case Kind::Distinct:
    if (f.child(0).sort() == Sort::Int)
      result = as_int(f.child(0)) != as_int(f.child(1));
    else
      result = as_bool(f.child(0)) != as_bool(f.child(1));
    break;
  case Kind::And: {
    bool acc = true;
    for (const Formula& c : f.children())
      acc = as_bool(c) && acc; // evaluate all children (keeps memo total)
    result = acc;
    break;
  }
  case Kind::Or: {
    bool acc = false;
    for (const Formula& c : f.children())
      acc = as_bool(c) || acc;
    result = acc;
    break;
  }
  case Kind::Not: result = !as_bool(f.child(0)); break;
  case Kind::Implies:
    result = !as_bool(f.child(0)) || as_bool(f.child(1));
    break;
  case Kind::Ite:
    result = as_bool(f.child(0)) ? eval_rec(f.child(1), v, memo)
                                 : eval_rec(f.child(2), v, memo);
    break;
  default:
    throw EvalError("cannot evaluate " + f.to_string());
  }
  memo.emplace(f.id(), result);
  return result;
}
} // namespace

Value eval(Formula f, const Valuation& v) {
  std::unordered_map<uint32_t, Value> memo;
  return eval_rec(f, v, memo);
}
bool eval_bool(Formula f, const Valuation& v) {
  return std::get<bool>(eval(f, v));
}

// ---------------------------------------------------------------------------
// Statements and weakest preconditions

Statement::Statement() : guard_(mk_true()) {}
Statement::Statement(Formula guard, std::map<Formula, Formula> assigns,
                     std::set<Formula> havocs)
    : guard_(guard), assigns_(std::move(assigns)), havocs_(std::move(havocs)) {
  require_sort(guard_, Sort::Bool, "statement guard");
  for (const auto& [var, rhs] : assigns_) {
    if (var.kind() != Kind::Var)
      throw SortError("assignment target is not a variable");
    if (var.sort() != rhs.sort())
      throw SortError("assignment sort mismatch for " + var.var_name());
    if (havocs_.count(var))
      throw SortError("variable " + var.var_name() +
                      " both assigned and havoced");
  }
  for (const Formula& h : havocs_)
    if (h.kind() != Kind::Var)
      throw SortError("havoc target is not a variable");
}

Statement Statement::assume(Formula guard) { return Statement(guard, {}, {}); }
Statement Statement::assign(Formula var, Formula rhs) {
  return Statement(mk_true(), {{var, rhs}}, {});
}

std::set<Formula> Statement::referenced_vars() const {
  std::set<Formula> out = guard_.free_vars();
  for (const auto& [var, rhs] : assigns_) {
    out.insert(var);
    auto fv = rhs.free_vars();
    out.insert(fv.begin(), fv.end());
  }
  out.insert(havocs_.begin(), havocs_.end());
  return out;
}

std::string Statement::to_string() const {
  std::ostringstream os;
  bool first = true;
  if (!guard_.is_true() || (assigns_.empty() && havocs_.empty())) {
    os << "assume " << guard_.to_string();
    first = false;
  }
  for (const auto& [var, rhs] : assigns_) {
    if (!first)
      os << "; ";
    os << var.var_name() << " := " << rhs.to_string();
    first = false;
  }
  for (const Formula& h : havocs_) {
    if (!first)
      os << "; ";
    os << "havoc " << h.var_name();
    first = false;
  }
  return os.str();
}

WpResult wp(const Statement& st, Formula post) {
  std::map<Formula, Formula> sub;
  std::vector<Formula> universals;
  for (const auto& [var, rhs] : st.assigns())
    sub[var] = rhs;
  std::set<Formula> post_vars = post.free_vars();
  int fresh_counter = 0;
  for (const Formula& h : st.havocs()) {
    if (!post_vars.count(h))
      continue; // havoc of a variable the postcondition ignores
    Formula fresh =
        mk_var(h.var_name() + "!h" + std::to_string(fresh_counter++), h.sort());
    sub[h] = fresh;
    universals.push_back(fresh);
  }
  Formula body = substitute(post, sub);
  return {mk_implies(st.guard(), body), universals};
}

} // namespace ogre
