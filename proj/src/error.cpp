#include "livesurvey/error.hpp"

namespace livesurvey {

const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kConfig: return "config";
    case ErrorKind::kParse: return "parse";
    case ErrorKind::kIntegrity: return "integrity";
    case ErrorKind::kPrecondition: return "precondition";
    case ErrorKind::kAgent: return "agent";
    case ErrorKind::kSchema: return "schema";
    case ErrorKind::kCitation: return "citation";
    case ErrorKind::kScriptGap: return "script-gap";
    case ErrorKind::kTransport: return "transport";
    case ErrorKind::kEvaluation: return "evaluation";
    case ErrorKind::kIo: return "io";
  }
  return "unknown";
}

}  // namespace livesurvey
