#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace fklab {

/// Comparison window does not overlap a single lattice site.
class EmptyWindowError : public std::runtime_error {
 public:
  explicit EmptyWindowError(const std::string& what) : std::runtime_error(what) {}
};

/// Iterative elliptic solve exhausted its sweep budget.
class SolveError : public std::runtime_error {
 public:
  SolveError(const std::string& what, double last_residual)
      : std::runtime_error(what), last_residual_(last_residual) {}
  double last_residual() const noexcept { return last_residual_; }

 private:
  double last_residual_;
};

/// Field values left the finite range during time stepping.
class DivergenceError : public std::runtime_error {
 public:
  DivergenceError(const std::string& what, long long step_index)
      : std::runtime_error(what), step_index_(step_index) {}
  long long step_index() const noexcept { return step_index_; }

 private:
  long long step_index_;
};

/// Config validation failure; carries every violation found in one pass.
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(std::vector<std::string> violations)
      : std::runtime_error(join(violations)), violations_(std::move(violations)) {}
  const std::vector<std::string>& violations() const noexcept { return violations_; }

 private:
  static std::string join(const std::vector<std::string>& v) {
    std::string out = "invalid config:";
    for (const auto& s : v) {
      out += "\n  - ";
      out += s;
    }
    return out;
  }
  std::vector<std::string> violations_;
};

}  // namespace fklab
