#pragma once

#include <stdexcept>
#include <string>

namespace evoter {

// Rejected user input (bad parameters, infeasible requests).
class InvalidInput : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// A caller broke an operation's precondition.
class ContractError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

// A randomized construction ran out of attempts.
class RetryExhausted : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class FitError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class IntegrationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Jump time beyond the censoring horizon.
class CensoredJump : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InsufficientHistory : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace evoter
