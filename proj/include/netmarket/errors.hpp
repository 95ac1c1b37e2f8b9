#pragma once

#include <stdexcept>
#include <string>

namespace netmarket {

/// Base class for every error thrown by this library.
///
/// The hierarchy distinguishes misuse (bad parameters, bad input files)
/// from numerical failure (an integral that diverges, a bracket that never
/// closes), so callers -- the CLI in particular -- can map them to
/// different exit codes.
class error : public std::runtime_error {
 public:
  explicit error(const std::string& what) : std::runtime_error(what) {}
};

/// A parameter violates its documented domain (e.g. a tail exponent <= 2,
/// a negative cost, a value-function elasticity outside (0,1)).
class invalid_parameter : public error {
 public:
  explicit invalid_parameter(const std::string& what) : error(what) {}
};

/// An integral required by a closed form does not converge for the given
/// exponents (e.g. the marginal-value tail integral when gamma <= theta + 1).
class divergent_integral : public error {
 public:
  explicit divergent_integral(const std::string& what) : error(what) {}
};

/// A root search could not bracket or refine a sign change.
class bracket_error : public error {
 public:
  explicit bracket_error(const std::string& what) : error(what) {}
};

/// Adaptive quadrature failed to reach the requested tolerance.
class quadrature_error : public error {
 public:
  explicit quadrature_error(const std::string& what) : error(what) {}
};

/// The requested thresholds cannot be induced with nonnegative fees.
class infeasible_prices : public error {
 public:
  explicit infeasible_prices(const std::string& what) : error(what) {}
};

/// A configuration file or command-line value could not be parsed.
class config_error : public error {
 public:
  explicit config_error(const std::string& what) : error(what) {}
};

}  // namespace netmarket
