#pragma once

namespace gazeload {
inline constexpr const char* kVersion = "0.1.0";
}
