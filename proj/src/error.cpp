#include "chorprism/error.hpp"

namespace chorprism {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::Syntax: return "Syntax";
    case ErrorCode::IndexOutOfFamily: return "IndexOutOfFamily";
    case ErrorCode::NonStaticIndex: return "NonStaticIndex";
    case ErrorCode::UnsupportedSugar: return "UnsupportedSugar";
    case ErrorCode::UnguardedRecursion: return "UnguardedRecursion";
    case ErrorCode::MissingAnnotation: return "MissingAnnotation";
    case ErrorCode::DuplicateAnnotation: return "DuplicateAnnotation";
    case ErrorCode::IllFormed: return "IllFormed";
    case ErrorCode::NotStronglyConnected: return "NotStronglyConnected";
    case ErrorCode::TypeMismatch: return "TypeMismatch";
    case ErrorCode::DivisionByZero: return "DivisionByZero";
    case ErrorCode::UnboundName: return "UnboundName";
    case ErrorCode::RangeViolation: return "RangeViolation";
    case ErrorCode::StateBudgetExceeded: return "StateBudgetExceeded";
    case ErrorCode::CounterOverflow: return "CounterOverflow";
    case ErrorCode::UnrepresentableWeight: return "UnrepresentableWeight";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::Io: return "Io";
  }
  return "Unknown";
}

std::string format(const Diagnostic& d) {
  std::string out = d.code + ": " + d.message;
  if (!d.where.empty()) out += " (" + d.where + ")";
  return out;
}

std::string format(const std::vector<Diagnostic>& ds) {
  std::string out;
  for (const auto& d : ds) {
    if (!out.empty()) out += '\n';
    out += format(d);
  }
  return out;
}

}  // namespace chorprism
