#pragma once

namespace randquant {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace randquant
