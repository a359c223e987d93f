#pragma once

namespace filmsolve {

inline constexpr const char* kVersion = "0.1.0";

} // namespace filmsolve
