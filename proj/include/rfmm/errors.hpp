#pragma once

#include <stdexcept>
#include <string_view>

namespace rfmm {

// Bad user input: malformed files, invalid parameters, out-of-range indices.
class InputError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// A numerical procedure failed (root bracketing, optimizer, quadrature).
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Option price outside the no-arbitrage band; no implied volatility exists.
class ArbitrageError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

// Non-fatal diagnostics go to stderr so that stdout/CSV output stays stable.
void warn(std::string_view message);

}  // namespace rfmm
