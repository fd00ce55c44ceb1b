#include "eimpact/error.hpp"

namespace eimpact {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::MissingColumn: return "MissingColumn";
    case ErrorCode::MalformedRow: return "MalformedRow";
    case ErrorCode::DuplicateId: return "DuplicateId";
    case ErrorCode::NoRoot: return "NoRoot";
    case ErrorCode::MultipleRoots: return "MultipleRoots";
    case ErrorCode::CycleDetected: return "CycleDetected";
    case ErrorCode::NodeNotFound: return "NodeNotFound";
    case ErrorCode::EmptyGraph: return "EmptyGraph";
    case ErrorCode::UnknownLabel: return "UnknownLabel";
    case ErrorCode::InvalidLexicon: return "InvalidLexicon";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::MissingScore: return "MissingScore";
    case ErrorCode::MissingToxicity: return "MissingToxicity";
    case ErrorCode::OutOfOrderArrival: return "OutOfOrderArrival";
    case ErrorCode::MissingApiKey: return "MissingApiKey";
    case ErrorCode::RateLimited: return "RateLimited";
    case ErrorCode::ProtocolError: return "ProtocolError";
    case ErrorCode::Timeout: return "Timeout";
    case ErrorCode::TransportError: return "TransportError";
    case ErrorCode::IoError: return "IoError";
  }
  return "Unknown";
}

Error::Error(ErrorCode code, std::string detail)
    : std::runtime_error(std::string(to_string(code)) + "(" + detail + ")"),
      code_(code),
      detail_(std::move(detail)) {}

}  // namespace eimpact
