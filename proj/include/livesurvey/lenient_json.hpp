#pragma once

#include <string>
#include <string_view>

#include <nlohmann/json.hpp>

namespace livesurvey {

enum class JsonShape { kObject, kArray };

/// Removes `<think>...</think>` reasoning blocks (and a dangling opening tag
/// with everything after it).
std::string strip_reasoning(std::string_view text);

/// Defensive parse of model output that should carry one JSON payload.
/// Tolerates prose before/after the payload, ``` code fences, reasoning
/// tags, and trailing commas before a closing bracket. Anything else throws
/// Error(kParse).
nlohmann::json parse_lenient_json(std::string_view text, JsonShape shape);

/// Drops commas that directly precede `}` or `]` outside string literals.
std::string remove_trailing_commas(std::string_view json);

}  // namespace livesurvey
