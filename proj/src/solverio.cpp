#include "ogre/solverio.hpp"

#include <cerrno>
#include <chrono>
#include <csignal>
#include <cstdlib>
#include <cstring>
#include <fcntl.h>
#include <poll.h>
#include <sstream>
#include <sys/wait.h>
#include <unistd.h>
#include <unordered_set>

namespace ogre {

namespace {

using Clock = std::chrono::steady_clock;

void ignore_sigpipe_once() {
  static bool done = [] {
    std::signal(SIGPIPE, SIG_IGN);
    return true;
  }();
  (void)done;
}

bool command_on_path(const std::string& cmd) {
  const char* path = std::getenv("PATH");
  if (!path)
    return false;
  std::stringstream ss(path);
  std::string dir;
  while (std::getline(ss, dir, ':')) {
    if (dir.empty())
      continue;
    std::string full = dir + "/" + cmd;
    if (access(full.c_str(), X_OK) == 0)
      return true;
  }
  return false;
}

} // namespace

std::optional<std::string> resolve_solver_command(const std::string& flag) {
  if (!flag.empty())
    return flag;
  if (const char* env = std::getenv("OGRE_SOLVER"); env && *env)
    return std::string(env);
  if (command_on_path("z3"))
    return std::string("z3 -in");
  return std::nullopt;
}

std::string derive_logic(const std::vector<Formula>& assertions) {
  std::unordered_set<uint32_t> seen;
  std::vector<Formula> stack(assertions.begin(), assertions.end());
  while (!stack.empty()) {
    Formula f = stack.back();
    stack.pop_back();
    if (!seen.insert(f.id()).second)
      continue;
    if (f.kind() == Kind::Mul) {
      int nonconst = 0;
      for (const Formula& c : f.children())
        if (c.kind() != Kind::IntConst)
          ++nonconst;
      if (nonconst > 1)
        return "QF_NIA";
    }
    if ((f.kind() == Kind::Div || f.kind() == Kind::Mod) &&
        f.child(1).kind() != Kind::IntConst)
      return "QF_NIA";
    for (const Formula& c : f.children())
      stack.push_back(c);
  }
  return "QF_LIA";
}

std::string render_smt2_script(const std::vector<Formula>& assertions,
                               const std::vector<Formula>& decls,
                               const std::string& logic) {
  std::ostringstream os;
  os << "(set-option :produce-models true)\n";
  os << "(set-logic " << logic << ")\n";
  std::unordered_set<uint32_t> declared;
  for (const Formula& v : decls) {
    if (!declared.insert(v.id()).second)
      continue;
    os << "(declare-const " << v.var_name() << " " << sort_name(v.sort())
       << ")\n";
  }
  // declare any free variable the caller did not list
  for (const Formula& a : assertions)
    for (const Formula& v : a.free_vars())
      if (declared.insert(v.id()).second)
        os << "(declare-const " << v.var_name() << " " << sort_name(v.sort())
           << ")\n";
  for (const Formula& a : assertions)
    os << "(assert " << a.to_string() << ")\n";
  os << "(check-sat)\n";
  return os.str();
}

// ---------------------------------------------------------------------------

struct SmtSession::Impl {
  pid_t pid = -1;
  int to_child = -1;
  int from_child = -1;
  std::string buffer; // unconsumed solver output
  bool first_query = true;

  ~Impl() { shutdown(); }

  void shutdown() {
    if (to_child >= 0) {
      close(to_child);
      to_child = -1;
    }
    if (from_child >= 0) {
      close(from_child);
      from_child = -1;
    }
    if (pid > 0) {
      kill(pid, SIGKILL);
      int status = 0;
      waitpid(pid, &status, 0);
      pid = -1;
    }
  }

  bool alive() const { return pid > 0; }

  void spawn(const std::string& command) {
    ignore_sigpipe_once();
    int in_pipe[2], out_pipe[2];
    if (pipe(in_pipe) != 0 || pipe(out_pipe) != 0)
      throw std::runtime_error("solver spawn failed: pipe: " +
                               std::string(strerror(errno)));
    pid_t child = fork();
    if (child < 0)
      throw std::runtime_error("solver spawn failed: fork: " +
                               std::string(strerror(errno)));
    if (child == 0) {
      dup2(in_pipe[0], STDIN_FILENO);
      dup2(out_pipe[1], STDOUT_FILENO);
      dup2(out_pipe[1], STDERR_FILENO);
      close(in_pipe[0]);
      close(in_pipe[1]);
      close(out_pipe[0]);
      close(out_pipe[1]);
      execl("/bin/sh", "sh", "-c", command.c_str(), (char*)nullptr);
      _exit(127);
    }
    close(in_pipe[0]);
    close(out_pipe[1]);
    pid = child;
    to_child = in_pipe[1];
    from_child = out_pipe[0];
    first_query = true;
    buffer.clear();
  }

  bool write_all(const std::string& data) {
    size_t off = 0;
    while (off < data.size()) {
      ssize_t n = write(to_child, data.data() + off, data.size() - off);
      if (n < 0) {
        if (errno == EINTR)
          continue;
        return false;
      }
      off += static_cast<size_t>(n);
    }
    return true;
  }

  // Reads one line, honoring the deadline. Empty optional on timeout/EOF.
  std::optional<std::string> read_line(Clock::time_point deadline) {
    for (;;) {
      size_t nl = buffer.find('\n');
      if (nl != std::string::npos) {
        std::string line = buffer.substr(0, nl);
        buffer.erase(0, nl + 1);
        if (!line.empty() && line.back() == '\r')
          line.pop_back();
        if (line.empty())
          continue;
        return line;
      }
      auto now = Clock::now();
      if (now >= deadline)
        return std::nullopt;
      int ms = static_cast<int>(
          std::chrono::duration_cast<std::chrono::milliseconds>(deadline - now)
              .count());
      struct pollfd pfd{from_child, POLLIN, 0};
      int pr = poll(&pfd, 1, std::max(ms, 1));
      if (pr <= 0)
        return std::nullopt;
      char chunk[4096];
      ssize_t n = read(from_child, chunk, sizeof(chunk));
      if (n <= 0)
        return std::nullopt; // EOF or error
      buffer.append(chunk, static_cast<size_t>(n));
    }
  }

  // Reads a balanced s-expression (for get-model), honoring the deadline.
  std::optional<std::string> read_sexpr(Clock::time_point deadline) {
    std::string out;
    int depth = 0;
    bool started = false;
    for (;;) {
      while (!buffer.empty()) {
        char c = buffer.front();
        buffer.erase(0, 1);
        if (!started) {
          if (std::isspace(static_cast<unsigned char>(c)))
            continue;
          if (c != '(')
            return std::nullopt;
          started = true;
          depth = 1;
          out += c;
          continue;
        }
        out += c;
        if (c == '(')
          ++depth;
        if (c == ')' && --depth == 0)
          return out;
      }
      auto now = Clock::now();
      if (now >= deadline)
        return std::nullopt;
      int ms = static_cast<int>(
          std::chrono::duration_cast<std::chrono::milliseconds>(deadline - now)
              .count());
      struct pollfd pfd{from_child, POLLIN, 0};
      int pr = poll(&pfd, 1, std::max(ms, 1));
      if (pr <= 0)
        return std::nullopt;
      char chunk[4096];
      ssize_t n = read(from_child, chunk, sizeof(chunk));
      if (n <= 0)
        return std::nullopt;
      buffer.append(chunk, static_cast<size_t>(n));
    }
  }
};

SmtSession::SmtSession(SolverConfig config)
    : impl_(std::make_unique<Impl>()), config_(std::move(config)) {
  if (config_.timeout_ms <= 0)
    throw std::invalid_argument("solver timeout must be positive");
  impl_->spawn(config_.command);
}

SmtSession::~SmtSession() = default;

namespace {

// Parses "(define-fun x () Int 5)" entries from a model s-expression.
std::optional<Valuation> parse_model(const std::string& text,
                                     const std::vector<Formula>& decls) {
  std::map<std::string, Formula> by_name;
  for (const Formula& v : decls)
    by_name.emplace(v.var_name(), v);

  Valuation val;
  std::vector<std::string> tokens;
  {
    std::string cur;
    for (char c : text) {
      if (c == '(' || c == ')') {
        if (!cur.empty()) {
          tokens.push_back(cur);
          cur.clear();
        }
        tokens.push_back(std::string(1, c));
      } else if (std::isspace(static_cast<unsigned char>(c))) {
        if (!cur.empty()) {
          tokens.push_back(cur);
          cur.clear();
        }
      } else {
        cur += c;
      }
    }
    if (!cur.empty())
      tokens.push_back(cur);
  }
  for (size_t i = 0; i < tokens.size(); ++i) {
    if (tokens[i] != "define-fun")
      continue;
    if (i + 1 >= tokens.size())
      return std::nullopt;
    std::string name = tokens[i + 1];
    // skip: ( ) Sort, then the value follows
    size_t j = i + 2;
    if (j + 2 >= tokens.size() || tokens[j] != "(" || tokens[j + 1] != ")")
      return std::nullopt;
    std::string sort = tokens[j + 2];
    size_t k = j + 3;
    if (k >= tokens.size())
      return std::nullopt;
    int64_t sign = 1;
    std::string value = tokens[k];
    if (value == "(") {
      // (- 5)
      if (k + 2 >= tokens.size() || tokens[k + 1] != "-")
        return std::nullopt;
      sign = -1;
      value = tokens[k + 2];
    }
    auto it = by_name.find(name);
    if (it == by_name.end())
      continue; // solver-internal symbol
    try {
      if (sort == "Int")
        val.set(it->second, sign * std::stoll(value));
      else if (sort == "Bool")
        val.set(it->second, value == "true");
      else
        return std::nullopt;
    } catch (const std::exception&) {
      return std::nullopt;
    }
  }
  for (const Formula& v : decls)
    if (!val.has(v))
      val.set(v, v.sort() == Sort::Int ? Value(int64_t(0)) : Value(false));
  return val;
}

} // namespace

SatAnswer SmtSession::check_sat(const std::vector<Formula>& assertions,
                                const std::vector<Formula>& decls) {
  SatAnswer out;
  if (!impl_->alive()) {
    // fresh process per query after a previous failure
    try {
      impl_->spawn(config_.command);
    } catch (const std::exception& e) {
      out.status = SatStatus::Unknown;
      out.diagnostic = e.what();
      return out;
    }
  }
  std::string logic =
      config_.logic.empty() ? derive_logic(assertions) : config_.logic;
  std::string script;
  if (!impl_->first_query)
    script += "(reset)\n";
  impl_->first_query = false;
  script += render_smt2_script(assertions, decls, logic);

  auto deadline =
      Clock::now() + std::chrono::milliseconds(config_.timeout_ms);
  if (!impl_->write_all(script)) {
    impl_->shutdown();
    out.status = SatStatus::Unknown;
    out.diagnostic = "solver process is not accepting input";
    return out;
  }
  std::optional<std::string> line;
  for (;;) {
    line = impl_->read_line(deadline);
    if (!line)
      break;
    if (*line == "sat" || *line == "unsat" || *line == "unknown")
      break;
    // skip echoed noise such as success markers; surface errors
    if (line->rfind("(error", 0) == 0) {
      impl_->shutdown();
      out.status = SatStatus::Unknown;
      out.diagnostic = "solver error: " + *line;
      return out;
    }
  }
  if (!line) {
    impl_->shutdown();
    out.status = SatStatus::Unknown;
    out.diagnostic = "solver timed out or died after " +
                     std::to_string(config_.timeout_ms) + " ms";
    return out;
  }
  if (*line == "unsat") {
    out.status = SatStatus::Unsat;
    return out;
  }
  if (*line == "unknown") {
    out.status = SatStatus::Unknown;
    out.diagnostic = "solver answered unknown";
    return out;
  }
  // sat: fetch the model
  if (!impl_->write_all("(get-model)\n")) {
    impl_->shutdown();
    out.status = SatStatus::Unknown;
    out.diagnostic = "solver died before producing a model";
    return out;
  }
  auto sexpr = impl_->read_sexpr(deadline);
  if (!sexpr) {
    impl_->shutdown();
    out.status = SatStatus::Unknown;
    out.diagnostic = "timed out reading model";
    return out;
  }
  auto model = parse_model(*sexpr, decls);
  if (!model) {
    out.status = SatStatus::Unknown;
    out.diagnostic = "malformed model: " + *sexpr;
    return out;
  }
  out.status = SatStatus::Sat;
  out.model = *model;
  return out;
}

} // namespace ogre
