#pragma once

namespace echo {
inline constexpr const char* kToolName = "echotool";
inline constexpr const char* kToolVersion = "0.1.0";
}  // namespace echo
