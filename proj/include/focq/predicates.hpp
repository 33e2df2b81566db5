#pragma once

#include <atomic>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <vector>

#include "focq/core.hpp"

namespace focq {

using Oracle = std::function<bool(const std::vector<Int>&)>;

struct NumericPredicate {
  std::string name;
  int arity = 1;
  Oracle oracle;
};

// Name -> (arity, decision oracle). Oracle calls are counted as unit-cost
// steps; the counter is the only mutable state and is atomic.
class PredicateRegistry {
 public:
  PredicateRegistry() = default;
  PredicateRegistry(const PredicateRegistry& other);
  PredicateRegistry& operator=(const PredicateRegistry& other);

  // geq1, eq, leq, prime.
  static PredicateRegistry with_builtins();

  void add(std::string name, int arity, Oracle oracle);
  const NumericPredicate* find(const std::string& name) const;
  bool contains(const std::string& name) const { return find(name) != nullptr; }
  bool call(const std::string& name, const std::vector<Int>& args) const;
  std::uint64_t calls() const { return calls_.load(); }
  std::vector<std::string> names() const;

 private:
  std::map<std::string, NumericPredicate> preds_;
  mutable std::atomic<std::uint64_t> calls_{0};
};

bool is_prime(const Int& n);

// Oracle answered by a child process: one space-separated integer tuple per
// line on its stdin, a reply line "0" or "1" on its stdout.
class SubprocessOracle {
 public:
  explicit SubprocessOracle(const std::string& command);
  ~SubprocessOracle();
  SubprocessOracle(const SubprocessOracle&) = delete;
  SubprocessOracle& operator=(const SubprocessOracle&) = delete;

  bool query(const std::vector<Int>& args);

 private:
  std::mutex mu_;
  int pid_ = -1;
  int to_child_ = -1;
  int from_child_ = -1;
  std::string buffer_;
};

// Parses "NAME:ARITY:COMMAND" and registers a subprocess-backed predicate.
void register_subprocess_oracle(PredicateRegistry& reg, const std::string& spec);

}  // namespace focq
