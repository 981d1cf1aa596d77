#pragma once

namespace mrsens {
inline constexpr const char* kVersion = "0.1.0";
}
