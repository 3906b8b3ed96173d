#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace sgm {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// A precondition on an argument was violated (bad extents, bad exponents, ...).
class InvalidArgument : public Error {
public:
  using Error::Error;
};

/// An iterative method hit its iteration cap.
class NonConvergence : public Error {
public:
  NonConvergence(const std::string& what, double last_residual, std::size_t iterations)
      : Error(what + " (last residual " + std::to_string(last_residual) + " after " +
              std::to_string(iterations) + " iterations)"),
        last_residual_(last_residual),
        iterations_(iterations) {}

  double last_residual() const noexcept { return last_residual_; }
  std::size_t iterations() const noexcept { return iterations_; }

private:
  double last_residual_;
  std::size_t iterations_;
};

/// The unregularized right-hand side was evaluated at a node where u or v vanishes.
class SingularityError : public Error {
public:
  SingularityError(std::size_t node, const std::string& what)
      : Error(what + " at node " + std::to_string(node)), node_(node) {}

  std::size_t node() const noexcept { return node_; }

private:
  std::size_t node_;
};

/// Barrier construction or certification failed (z not positive, C not found, ...).
class BarrierError : public Error {
public:
  BarrierError(const std::string& what, std::size_t node, double slack)
      : Error(what + " (worst node " + std::to_string(node) + ", slack " +
              std::to_string(slack) + ")"),
        node_(node),
        slack_(slack) {}

  std::size_t node() const noexcept { return node_; }
  double slack() const noexcept { return slack_; }

private:
  std::size_t node_;
  double slack_;
};

/// Configuration file problem, carrying the offending key and line (0 if not line-bound).
class ConfigError : public Error {
public:
  ConfigError(const std::string& key, std::size_t line, const std::string& what)
      : Error(line > 0 ? "config line " + std::to_string(line) + ", key '" + key + "': " + what
                       : "config key '" + key + "': " + what),
        key_(key),
        line_(line) {}

  const std::string& key() const noexcept { return key_; }
  std::size_t line() const noexcept { return line_; }

private:
  std::string key_;
  std::size_t line_;
};

}  // namespace sgm
