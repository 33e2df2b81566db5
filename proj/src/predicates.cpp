#include "focq/predicates.hpp"

#include <signal.h>
#include <sys/wait.h>
#include <unistd.h>

#include <array>
#include <random>

#include <boost/multiprecision/miller_rabin.hpp>

namespace focq {

PredicateRegistry::PredicateRegistry(const PredicateRegistry& other)
    : preds_(other.preds_), calls_(other.calls_.load()) {}

PredicateRegistry& PredicateRegistry::operator=(const PredicateRegistry& other) {
  preds_ = other.preds_;
  calls_ = other.calls_.load();
  return *this;
}

PredicateRegistry PredicateRegistry::with_builtins() {
  PredicateRegistry r;
  r.add("geq1", 1, [](const std::vector<Int>& a) { return a[0] >= 1; });
  r.add("eq", 2, [](const std::vector<Int>& a) { return a[0] == a[1]; });
  r.add("leq", 2, [](const std::vector<Int>& a) { return a[0] <= a[1]; });
  r.add("prime", 1, [](const std::vector<Int>& a) { return is_prime(a[0]); });
  return r;
}

void PredicateRegistry::add(std::string name, int arity, Oracle oracle) {
  if (arity < 1) throw InputError("numerical predicates have positive arity");
  if (!oracle) throw InputError("missing oracle for predicate " + name);
  preds_[name] = NumericPredicate{name, arity, std::move(oracle)};
}

const NumericPredicate* PredicateRegistry::find(const std::string& name) const {
  auto it = preds_.find(name);
  return it == preds_.end() ? nullptr : &it->second;
}

bool PredicateRegistry::call(const std::string& name, const std::vector<Int>& args) const {
  const NumericPredicate* p = find(name);
  if (!p) throw InputError("unknown numerical predicate " + name);
  if (static_cast<int>(args.size()) != p->arity)
    throw InputError("predicate " + name + " applied to wrong number of arguments");
  calls_.fetch_add(1, std::memory_order_relaxed);
  return p->oracle(args);
}

std::vector<std::string> PredicateRegistry::names() const {
  std::vector<std::string> out;
  for (const auto& [n, _] : preds_) out.push_back(n);
  return out;
}

bool is_prime(const Int& n) {
  if (n < 2) return false;
  if (n < 4) return true;
  if (n % 2 == 0) return false;
  if (n < Int(1) << 64) {
    // Deterministic Miller-Rabin for 64-bit inputs.
    using U = unsigned __int128;
    const std::uint64_t m = static_cast<std::uint64_t>(n);
    std::uint64_t d = m - 1;
    int s = 0;
    while ((d & 1) == 0) {
      d >>= 1;
      ++s;
    }
    auto pow_mod = [m](std::uint64_t b, std::uint64_t e) {
      U result = 1, base = b % m;
      while (e) {
        if (e & 1) result = result * base % m;
        base = base * base % m;
        e >>= 1;
      }
      return static_cast<std::uint64_t>(result);
    };
    for (std::uint64_t a : {2ull, 3ull, 5ull, 7ull, 11ull, 13ull, 17ull, 19ull, 23ull, 29ull, 31ull, 37ull}) {
      if (a % m == 0) return true;
      std::uint64_t x = pow_mod(a, d);
      if (x == 1 || x == m - 1) continue;
      bool composite = true;
      for (int r = 1; r < s; ++r) {
        x = static_cast<std::uint64_t>(U(x) * x % m);
        if (x == m - 1) {
          composite = false;
          break;
        }
      }
      if (composite) return false;
    }
    return true;
  }
  std::mt19937_64 rng(0x5eed);
  return boost::multiprecision::miller_rabin_test(n, 40, rng);
}

// --------------------------------------------------------- subprocess oracle

SubprocessOracle::SubprocessOracle(const std::string& command) {
  int in_pipe[2], out_pipe[2];
  if (pipe(in_pipe) != 0 || pipe(out_pipe) != 0) throw InputError("cannot create oracle pipes");
  pid_ = fork();
  if (pid_ < 0) throw InputError("cannot start oracle process");
  if (pid_ == 0) {
    dup2(in_pipe[0], STDIN_FILENO);
    dup2(out_pipe[1], STDOUT_FILENO);
    close(in_pipe[0]);
    close(in_pipe[1]);
    close(out_pipe[0]);
    close(out_pipe[1]);
    execl("/bin/sh", "sh", "-c", command.c_str(), static_cast<char*>(nullptr));
    _exit(127);
  }
  close(in_pipe[0]);
  close(out_pipe[1]);
  to_child_ = in_pipe[1];
  from_child_ = out_pipe[0];
  signal(SIGPIPE, SIG_IGN);
}

SubprocessOracle::~SubprocessOracle() {
  if (to_child_ >= 0) close(to_child_);
  if (from_child_ >= 0) close(from_child_);
  if (pid_ > 0) {
    int status = 0;
    waitpid(pid_, &status, 0);
  }
}

bool SubprocessOracle::query(const std::vector<Int>& args) {
  std::lock_guard<std::mutex> lock(mu_);
  std::string line;
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (i) line += ' ';
    line += args[i].str();
  }
  line += '\n';
  std::size_t written = 0;
  while (written < line.size()) {
    ssize_t w = write(to_child_, line.data() + written, line.size() - written);
    if (w <= 0) throw InputError("oracle process closed its input");
    written += static_cast<std::size_t>(w);
  }
  for (;;) {
    auto nl = buffer_.find('\n');
    if (nl != std::string::npos) {
      std::string reply = buffer_.substr(0, nl);
      buffer_.erase(0, nl + 1);
      while (!reply.empty() && (reply.back() == '\r' || reply.back() == ' ')) reply.pop_back();
      if (reply == "1") return true;
      if (reply == "0") return false;
      throw InputError("oracle process replied '" + reply + "', expected 0 or 1");
    }
    std::array<char, 256> chunk{};
    ssize_t got = read(from_child_, chunk.data(), chunk.size());
    if (got <= 0) throw InputError("oracle process terminated without a reply");
    buffer_.append(chunk.data(), static_cast<std::size_t>(got));
  }
}

void register_subprocess_oracle(PredicateRegistry& reg, const std::string& spec) {
  auto c1 = spec.find(':');
  auto c2 = c1 == std::string::npos ? c1 : spec.find(':', c1 + 1);
  if (c2 == std::string::npos) throw InputError("oracle spec must be NAME:ARITY:COMMAND");
  std::string name = spec.substr(0, c1);
  int arity = 0;
  try {
    arity = std::stoi(spec.substr(c1 + 1, c2 - c1 - 1));
  } catch (const std::exception&) {
    throw InputError("oracle arity is not an integer in '" + spec + "'");
  }
  auto proc = std::make_shared<SubprocessOracle>(spec.substr(c2 + 1));
  reg.add(name, arity, [proc](const std::vector<Int>& a) { return proc->query(a); });
}

}  // namespace focq
