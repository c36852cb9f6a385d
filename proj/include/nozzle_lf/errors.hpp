#pragma once

#include <stdexcept>
#include <string>

namespace nozzle_lf {

/// Argument outside the mathematical domain of an operation.
class DomainError : public std::domain_error {
public:
  using std::domain_error::domain_error;
};

/// A jump that does not satisfy the Rankine-Hugoniot relation.
class InconsistencyError : public std::runtime_error {
public:
  InconsistencyError(const std::string& what, double residual)
      : std::runtime_error(what + " (residual " + std::to_string(residual) + ")"),
        residual_(residual) {}
  double residual() const noexcept { return residual_; }

private:
  double residual_;
};

/// Failure to construct the approximate solution in one staggered cell.
class CellError : public std::runtime_error {
public:
  CellError(const std::string& what, long j, long n)
      : std::runtime_error(what + " [cell j=" + std::to_string(j) + ", n=" + std::to_string(n) + "]"),
        j_(j), n_(n) {}
  long j() const noexcept { return j_; }
  long n() const noexcept { return n_; }

private:
  long j_;
  long n_;
};

/// Invalid run configuration; names the offending key when there is one.
class ConfigError : public std::runtime_error {
public:
  ConfigError(const std::string& key, const std::string& what)
      : std::runtime_error(key.empty() ? what : key + ": " + what), key_(key) {}
  const std::string& key() const noexcept { return key_; }

private:
  std::string key_;
};

}  // namespace nozzle_lf
