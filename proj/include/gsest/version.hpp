#pragma once

namespace gsest {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace gsest
