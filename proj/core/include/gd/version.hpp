#pragma once

namespace gd {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace gd
