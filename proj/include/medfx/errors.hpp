#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace medfx {

// Base class for all toolkit errors.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

// Conditioning event (or required stratum) has zero probability mass.
// Callers must surface this; formulas never impute 0 for an undefined term.
class ZeroProbabilityCondition : public Error {
 public:
  explicit ZeroProbabilityCondition(const std::string& what) : Error(what) {}
};

// Expectation requested for a variable without numeric level values.
class NonNumericTarget : public Error {
 public:
  explicit NonNumericTarget(const std::string& what) : Error(what) {}
};

class NonBinaryMediator : public Error {
 public:
  explicit NonBinaryMediator(const std::string& what) : Error(what) {}
};

class NonBinaryProxy : public Error {
 public:
  explicit NonBinaryProxy(const std::string& what) : Error(what) {}
};

class ZeroTotalEffect : public Error {
 public:
  explicit ZeroTotalEffect(const std::string& what) : Error(what) {}
};

// Enumeration or rejection-sampling budget exhausted.
class BudgetExceeded : public Error {
 public:
  explicit BudgetExceeded(const std::string& what) : Error(what) {}
};

// File or expression could not be parsed; message carries location info.
class ParseError : public Error {
 public:
  explicit ParseError(const std::string& what) : Error(what) {}
};

// A loaded object failed its invariant checks; carries the full list.
class ValidationError : public Error {
 public:
  ValidationError(const std::string& context, std::vector<std::string> problems)
      : Error(join(context, problems)), problems_(std::move(problems)) {}

  const std::vector<std::string>& problems() const { return problems_; }

 private:
  static std::string join(const std::string& context, const std::vector<std::string>& ps) {
    std::string msg = context;
    for (const auto& p : ps) {
      msg += "\n  - " + p;
    }
    return msg;
  }
  std::vector<std::string> problems_;
};

}  // namespace medfx
