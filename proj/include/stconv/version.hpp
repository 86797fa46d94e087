#pragma once

namespace stconv {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace stconv
