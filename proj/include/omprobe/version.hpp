#pragma once

namespace omprobe {
inline constexpr const char* kVersion = "0.1.0";
}
