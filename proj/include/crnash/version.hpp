#pragma once

namespace crnash {

inline constexpr const char* kToolName = "crnash";
inline constexpr const char* kToolVersion = "0.1.0";
inline constexpr int kSchemaVersion = 1;

}  // namespace crnash
