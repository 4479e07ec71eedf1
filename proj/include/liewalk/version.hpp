#pragma once

namespace liewalk {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace liewalk
