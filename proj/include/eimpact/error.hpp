#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace eimpact {

enum class ErrorCode {
  MissingColumn,
  MalformedRow,
  DuplicateId,
  NoRoot,
  MultipleRoots,
  CycleDetected,
  NodeNotFound,
  EmptyGraph,
  UnknownLabel,
  InvalidLexicon,
  InvalidArgument,
  MissingScore,
  MissingToxicity,
  OutOfOrderArrival,
  MissingApiKey,
  RateLimited,
  ProtocolError,
  Timeout,
  TransportError,
  IoError,
};

std::string_view to_string(ErrorCode code);

// All library failures surface as this type; `code()` identifies the
// contract case and `detail()` carries the offending value (column name,
// line number, id list, ...).
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, std::string detail);

  ErrorCode code() const noexcept { return code_; }
  const std::string& detail() const noexcept { return detail_; }

 private:
  ErrorCode code_;
  std::string detail_;
};

}  // namespace eimpact
