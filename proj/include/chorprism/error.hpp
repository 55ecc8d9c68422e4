#pragma once

#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace chorprism {

enum class ErrorCode {
  // frontend
  Syntax,
  IndexOutOfFamily,
  NonStaticIndex,
  UnsupportedSugar,
  // static analyses
  UnguardedRecursion,
  MissingAnnotation,
  DuplicateAnnotation,
  IllFormed,
  NotStronglyConnected,
  // evaluation
  TypeMismatch,
  DivisionByZero,
  UnboundName,
  RangeViolation,
  // resources / internal
  StateBudgetExceeded,
  CounterOverflow,
  UnrepresentableWeight,
  InvalidArgument,
  Io,
};

std::string_view to_string(ErrorCode code);

// Position in a source file; line 0 means "no position".
struct SourcePos {
  int line = 0;
  int column = 0;
};

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message, SourcePos pos = {})
      : std::runtime_error(message), code_(code), pos_(pos) {}

  ErrorCode code() const { return code_; }
  SourcePos pos() const { return pos_; }

 private:
  ErrorCode code_;
  SourcePos pos_;
};

// A single finding of a static check. `where` is a human readable location
// such as "def C, interaction A1".
struct Diagnostic {
  std::string code;
  std::string message;
  std::string where;
};

std::string format(const Diagnostic& d);
std::string format(const std::vector<Diagnostic>& ds);

}  // namespace chorprism
