#pragma once

namespace metadistill {

inline constexpr const char* kToolName = "metadistill";
inline constexpr const char* kVersion = "0.1.0";

}  // namespace metadistill
