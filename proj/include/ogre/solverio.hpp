#pragma once

#include "ogre/solver.hpp"

#include <functional>
#include <memory>
#include <optional>
#include <string>

// Client for an external SMT solver process speaking SMT-LIB2 over standard
// streams. This is the only nondeterministic boundary of the system: process
// death, timeouts and malformed output all surface as Unknown, never as a
// definite verdict.

namespace ogre {

struct SolverConfig {
  std::string command = "z3 -in"; // run through /bin/sh -c
  int timeout_ms = 10000;         // per query
  std::string logic;              // empty: derive QF_LIA / QF_NIA per query
};

// Resolution order: explicit flag value, then OGRE_SOLVER, then "z3 -in"
// when z3 is on PATH. Returns nullopt when no external solver is available.
std::optional<std::string> resolve_solver_command(const std::string& flag);

class SmtSession {
public:
  explicit SmtSession(SolverConfig config);
  ~SmtSession();
  SmtSession(const SmtSession&) = delete;
  SmtSession& operator=(const SmtSession&) = delete;

  // Writes the declarations and assertions, issues (check-sat), and on sat
  // retrieves the model. Queries are isolated via (reset).
  SatAnswer check_sat(const std::vector<Formula>& assertions,
                      const std::vector<Formula>& decls);

  const SolverConfig& config() const { return config_; }

private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
  SolverConfig config_;
};

// Spawns a session, runs the body, and always reaps the process.
template <typename Body>
auto with_session(const SolverConfig& config, Body&& body) {
  SmtSession session(config);
  return std::forward<Body>(body)(session);
}

// Solver backend over a session (one process, reset between queries).
class SmtProcessSolver final : public Solver {
public:
  explicit SmtProcessSolver(SolverConfig config)
      : config_(std::move(config)), session_(config_) {}

  SatAnswer check(const std::vector<Formula>& assertions,
                  const std::vector<Formula>& decls) override {
    return session_.check_sat(assertions, decls);
  }
  std::string name() const override { return "smt:" + config_.command; }

private:
  SolverConfig config_;
  SmtSession session_;
};

// Builds the textual SMT-LIB2 script for one query (used by --dump-vcs too).
std::string render_smt2_script(const std::vector<Formula>& assertions,
                               const std::vector<Formula>& decls,
                               const std::string& logic);

// QF_NIA when a product of variables or a variable divisor occurs.
std::string derive_logic(const std::vector<Formula>& assertions);

} // namespace ogre
