#pragma once

namespace lptv {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace lptv
