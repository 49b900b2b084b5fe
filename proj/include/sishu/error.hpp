#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace sishu {

enum class ErrorCode {
  // corpus
  MissingField,
  DuplicateId,
  EmptyLayer,
  EmptyCharacter,
  BadFormat,
  DanglingSection,
  // chunking / embedding
  IndexError,
  EmptyInput,
  DimMismatch,
  KeyMiss,
  Transport,
  BadResponse,
  // extraction
  NoCandidates,
  // graph
  SchemaViolation,
  EmptyGraph,
  SerializationError,
  SchemaVersionMismatch,
  // retrieval / query
  EmptyIndex,
  NoEmbeddings,
  EmptyQuerySet,
  UnknownSeed,
  UnknownConcept,
  // generic
  InvalidArgument,
  BadInput,
  Io,
};

std::string_view to_string(ErrorCode code);

/// Base exception for every recoverable failure in the library. The code is
/// stable and machine-readable; the message is for humans.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace sishu
