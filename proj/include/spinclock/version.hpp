#pragma once

namespace spinclock {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace spinclock
