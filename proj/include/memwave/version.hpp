#pragma once

namespace memwave {

inline constexpr const char* kToolName = "memwave";
inline constexpr const char* kToolVersion = "0.1.0";

}  // namespace memwave
