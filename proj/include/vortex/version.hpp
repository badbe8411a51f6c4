#pragma once

namespace vortex {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace vortex
