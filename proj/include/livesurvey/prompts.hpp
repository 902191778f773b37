#pragma once

#include <map>
#include <string>
#include <string_view>

namespace livesurvey::prompts {

/// Template version recorded in audit logs; bump when any template changes.
inline constexpr std::string_view kTemplateVersion = "v1";

extern const std::string_view kOutline;
extern const std::string_view kAnalysis;
extern const std::string_view kAbstention;
extern const std::string_view kSectionRouting;
extern const std::string_view kInsertionPoint;
extern const std::string_view kTableRouting;
extern const std::string_view kTextSynthesis;
extern const std::string_view kTableSynthesis;
extern const std::string_view kOneStepUpdate;
extern const std::string_view kOracleUpdate;

/// Replaces `{name}` with values[name]. Brace groups whose content is not a
/// key of `values` (including JSON examples) are copied verbatim.
std::string render(std::string_view tmpl,
                   const std::map<std::string, std::string>& values);

/// Appended to the prompt of a retried call.
std::string retry_hint(int attempt, std::string_view reason);

}  // namespace livesurvey::prompts
