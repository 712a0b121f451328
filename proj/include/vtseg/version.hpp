#pragma once

namespace vtseg {

inline constexpr const char* kVersion = "0.1.0";

} // namespace vtseg
