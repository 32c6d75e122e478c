#include "conspec/error.hpp"

namespace conspec {

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::SyntaxError: return "SyntaxError";
    case ErrorKind::UnknownName: return "UnknownName";
    case ErrorKind::EmptyContrastSet: return "EmptyContrastSet";
    case ErrorKind::MissingRepValue: return "MissingRepValue";
    case ErrorKind::ClauseExplosion: return "ClauseExplosion";
    case ErrorKind::ZeroVector: return "ZeroVector";
    case ErrorKind::DimMismatch: return "DimMismatch";
    case ErrorKind::EmptySelection: return "EmptySelection";
    case ErrorKind::RowMismatch: return "RowMismatch";
    case ErrorKind::SingularSystem: return "SingularSystem";
    case ErrorKind::MissingCaptionEmbedding: return "MissingCaptionEmbedding";
    case ErrorKind::ZeroMeanVector: return "ZeroMeanVector";
    case ErrorKind::UnknownConcept: return "UnknownConcept";
    case ErrorKind::EmptyClassSelection: return "EmptyClassSelection";
    case ErrorKind::UncoveredRow: return "UncoveredRow";
    case ErrorKind::NoRowsForClass: return "NoRowsForClass";
    case ErrorKind::UnsupportedLiteral: return "UnsupportedLiteral";
    case ErrorKind::NumericalBreakdown: return "NumericalBreakdown";
    case ErrorKind::MissingPoint: return "MissingPoint";
    case ErrorKind::GridTooLarge: return "GridTooLarge";
    case ErrorKind::FormatError: return "FormatError";
    case ErrorKind::IoError: return "IoError";
    case ErrorKind::InvalidArgument: return "InvalidArgument";
  }
  return "Unknown";
}

Error::Error(ErrorKind kind, const std::string& what)
    : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind), message_(what) {}

Error::Error(ErrorKind kind, const std::string& message, const std::string& what)
    : std::runtime_error(what), kind_(kind), message_(message) {}

SyntaxError::SyntaxError(std::size_t offset, const std::string& what)
    : Error(ErrorKind::SyntaxError, what,
            "SyntaxError: " + what + " at offset " + std::to_string(offset)),
      offset_(offset) {}

}  // namespace conspec
