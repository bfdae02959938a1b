// Minimal SMT-LIB2 solver over stdin/stdout for the quantifier-free
// integer/boolean fragment this toolchain emits. Intended as a drop-in
// backend for the solver client when no system SMT solver is installed;
// any SMT-LIB2 solver can be used instead.

#include "ogre/lia.hpp"
#include "ogre/logic.hpp"

#include <iostream>
#include <sstream>
#include <string>
#include <vector>

namespace {

using namespace ogre;

struct ReplState {
  VarDecls decls;
  std::vector<Formula> assertions;
  bool have_model = false;
  Valuation model;

  void reset() {
    decls = VarDecls();
    assertions.clear();
    have_model = false;
    model = Valuation();
  }
};

// Splits one command s-expression into its leading symbol and the remainder.
std::pair<std::string, std::string> split_command(const std::string& sexpr) {
  size_t i = 1; // skip '('
  while (i < sexpr.size() && std::isspace((unsigned char)sexpr[i]))
    ++i;
  size_t start = i;
  while (i < sexpr.size() && !std::isspace((unsigned char)sexpr[i]) &&
         sexpr[i] != '(' && sexpr[i] != ')')
    ++i;
  std::string head = sexpr.substr(start, i - start);
  std::string rest = sexpr.substr(i, sexpr.size() - i - 1); // drop final ')'
  return {head, rest};
}

std::vector<std::string> tokenize(const std::string& s) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : s) {
    if (c == '(' || c == ')') {
      if (!cur.empty()) {
        out.push_back(cur);
        cur.clear();
      }
      out.push_back(std::string(1, c));
    } else if (std::isspace((unsigned char)c)) {
      if (!cur.empty()) {
        out.push_back(cur);
        cur.clear();
      }
    } else {
      cur += c;
    }
  }
  if (!cur.empty())
    out.push_back(cur);
  return out;
}

void print_value(std::ostream& os, const Value& v) {
  if (std::holds_alternative<int64_t>(v)) {
    int64_t x = std::get<int64_t>(v);
    if (x < 0)
      os << "(- " << -(x + 1) + 1 << ")";
    else
      os << x;
  } else {
    os << (std::get<bool>(v) ? "true" : "false");
  }
}

void handle(ReplState& st, const std::string& sexpr) {
  auto [head, rest] = split_command(sexpr);
  if (head == "set-option" || head == "set-info" || head == "set-logic")
    return;
  if (head == "reset") {
    st.reset();
    return;
  }
  if (head == "exit")
    std::exit(0);
  if (head == "echo") {
    std::string text = rest;
    size_t a = text.find('"'), b = text.rfind('"');
    if (a != std::string::npos && b > a)
      std::cout << text.substr(a + 1, b - a - 1) << "\n" << std::flush;
    return;
  }
  if (head == "declare-const" || head == "declare-fun") {
    auto toks = tokenize(rest);
    // declare-fun name () Sort; declare-const name Sort
    if (toks.empty())
      throw std::runtime_error("malformed declaration");
    std::string name = toks[0];
    std::string sort_tok;
    if (head == "declare-const") {
      if (toks.size() != 2)
        throw std::runtime_error("malformed declare-const");
      sort_tok = toks[1];
    } else {
      if (toks.size() != 4 || toks[1] != "(" || toks[2] != ")")
        throw std::runtime_error("only zero-arity declare-fun is supported");
      sort_tok = toks[3];
    }
    Sort sort;
    if (sort_tok == "Int")
      sort = Sort::Int;
    else if (sort_tok == "Bool")
      sort = Sort::Bool;
    else
      throw std::runtime_error("unsupported sort " + sort_tok);
    st.decls.declare(name, sort);
    return;
  }
  if (head == "assert") {
    st.assertions.push_back(parse_formula(rest, st.decls));
    return;
  }
  if (head == "check-sat") {
    lia::Result r = lia::decide(mk_and(st.assertions));
    switch (r.status) {
    case lia::Status::Sat:
      st.have_model = true;
      st.model = r.model;
      for (const Formula& v : st.decls.all())
        if (!st.model.has(v))
          st.model.set(v, v.sort() == Sort::Int ? Value(int64_t(0))
                                                : Value(false));
      std::cout << "sat\n" << std::flush;
      break;
    case lia::Status::Unsat:
      std::cout << "unsat\n" << std::flush;
      break;
    case lia::Status::Unknown:
      std::cout << "unknown\n" << std::flush;
      break;
    }
    return;
  }
  if (head == "get-model") {
    if (!st.have_model)
      throw std::runtime_error("no model available");
    std::cout << "(\n";
    for (const Formula& v : st.decls.all()) {
      std::cout << "  (define-fun " << v.var_name() << " () "
                << sort_name(v.sort()) << " ";
      print_value(std::cout, st.model.get(v));
      std::cout << ")\n";
    }
    std::cout << ")\n" << std::flush;
    return;
  }
  throw std::runtime_error("unsupported command " + head);
}

} // namespace

int main() {
  ReplState state;
  std::string pending;
  int depth = 0;
  bool in_string = false;
  char c;
  while (std::cin.get(c)) {
    if (depth == 0 && pending.empty()) {
      if (c == ';') { // comment line
        std::string skip;
        std::getline(std::cin, skip);
        continue;
      }
      if (std::isspace((unsigned char)c))
        continue;
      if (c != '(') {
        std::cout << "(error \"stray input\")\n" << std::flush;
        continue;
      }
    }
    pending += c;
    if (c == '"')
      in_string = !in_string;
    if (!in_string) {
      if (c == '(')
        ++depth;
      else if (c == ')')
        --depth;
    }
    if (depth == 0 && !pending.empty()) {
      try {
        handle(state, pending);
      } catch (const std::exception& e) {
        std::cout << "(error \"" << e.what() << "\")\n" << std::flush;
      }
      pending.clear();
    }
  }
  return 0;
}
