#pragma once

namespace tsi {

inline constexpr const char* kVersion = "0.1.0";

} // namespace tsi
