#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <string_view>

namespace conspec {

enum class ErrorKind {
  // language
  SyntaxError,
  UnknownName,
  EmptyContrastSet,
  MissingRepValue,
  ClauseExplosion,
  // numerics / data
  ZeroVector,
  DimMismatch,
  EmptySelection,
  RowMismatch,
  SingularSystem,
  MissingCaptionEmbedding,
  ZeroMeanVector,
  UnknownConcept,
  EmptyClassSelection,
  UncoveredRow,
  NoRowsForClass,
  // verification
  UnsupportedLiteral,
  NumericalBreakdown,
  MissingPoint,
  GridTooLarge,
  // files
  FormatError,
  IoError,
  InvalidArgument,
};

std::string_view to_string(ErrorKind kind);

// Domain error carrying a machine-checkable kind. Every failure the library
// reports to callers goes through this type.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what);

  ErrorKind kind() const noexcept { return kind_; }
  // what() without the kind prefix.
  const std::string& message() const noexcept { return message_; }

 protected:
  Error(ErrorKind kind, const std::string& message, const std::string& what);

 private:
  ErrorKind kind_;
  std::string message_;
};

class SyntaxError : public Error {
 public:
  SyntaxError(std::size_t offset, const std::string& what);

  // Byte offset into the parsed text.
  std::size_t offset() const noexcept { return offset_; }

 private:
  std::size_t offset_;
};

}  // namespace conspec
