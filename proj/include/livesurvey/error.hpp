#pragma once

#include <stdexcept>
#include <string>

namespace livesurvey {

enum class ErrorKind {
  kConfig,
  kParse,
  kIntegrity,
  kPrecondition,
  kAgent,
  kSchema,
  kCitation,
  kScriptGap,
  kTransport,
  kEvaluation,
  kIo,
};

const char* to_string(ErrorKind kind);

/// Base exception for every failure raised by the library. The kind drives
/// CLI exit codes and the error column of update records.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(message), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace livesurvey
