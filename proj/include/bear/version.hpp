#pragma once

namespace bear {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace bear
