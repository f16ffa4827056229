#pragma once

#include <stdexcept>
#include <string>

namespace spmb {

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct QuadratureBudgetExceeded : Error {
  explicit QuadratureBudgetExceeded(const std::string& what) : Error(what) {}
};

struct AmbiguousClassification : Error {
  explicit AmbiguousClassification(const std::string& what) : Error(what) {}
};

struct NoBracket : Error {
  explicit NoBracket(const std::string& what) : Error(what) {}
};

struct InvalidCount : Error {
  explicit InvalidCount(const std::string& what) : Error(what) {}
};

struct IndexOutOfRange : Error {
  explicit IndexOutOfRange(const std::string& what) : Error(what) {}
};

struct InvalidBeta : Error {
  explicit InvalidBeta(const std::string& what) : Error(what) {}
};

struct GapTooSmall : Error {
  explicit GapTooSmall(const std::string& what) : Error(what) {}
};

struct FitUnavailable : Error {
  explicit FitUnavailable(const std::string& what) : Error(what) {}
};

struct DegenerateBasis : Error {
  explicit DegenerateBasis(const std::string& what) : Error(what) {}
};

struct SplitViolated : Error {
  explicit SplitViolated(const std::string& what) : Error(what) {}
};

struct NotContracting : Error {
  explicit NotContracting(const std::string& what) : Error(what) {}
};

struct ConfigInvalid : Error {
  explicit ConfigInvalid(const std::string& what) : Error(what) {}
};

struct CacheFormatError : Error {
  explicit CacheFormatError(const std::string& what) : Error(what) {}
};

} // namespace spmb
