#pragma once

#include <stdexcept>
#include <string>

namespace fisher {

/// Base class for all library errors.
struct Error : std::runtime_error {
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

/// Instance validation failure; `index` names the offending row/column.
struct ValidationError : Error {
  enum class Kind { ZeroRow, ZeroColumn, NonpositiveBudget, SimplexViolation };
  Kind kind;
  int index;
  ValidationError(Kind k, int idx, const std::string& what)
      : Error(what), kind(k), index(idx) {}
};

struct DimensionMismatch : Error {
  using Error::Error;
};

struct WrongUtilityClass : Error {
  using Error::Error;
};

/// A price (column sum of bids) hit zero where positivity is required.
struct ZeroPrice : Error {
  int item;
  ZeroPrice(int j, const std::string& what) : Error(what), item(j) {}
};

struct ZeroUtility : Error {
  int buyer;
  ZeroUtility(int i, const std::string& what) : Error(what), buyer(i) {}
};

struct ZeroDotProduct : Error {
  int buyer;
  ZeroDotProduct(int i, const std::string& what) : Error(what), buyer(i) {}
};

struct InfeasibleBox : Error {
  using Error::Error;
};

struct EmptyInput : Error {
  using Error::Error;
};

struct NonFiniteObjective : Error {
  using Error::Error;
};

struct BacktrackOverflow : Error {
  using Error::Error;
};

struct DidNotConverge : Error {
  using Error::Error;
};

struct SolverUnsupported : Error {
  using Error::Error;
};

struct TooLarge : Error {
  using Error::Error;
};

struct IoError : Error {
  using Error::Error;
};

struct ParseError : Error {
  using Error::Error;
};

}  // namespace fisher
