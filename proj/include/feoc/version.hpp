#pragma once

namespace feoc {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace feoc
