#pragma once

namespace distrack {
inline constexpr const char* kVersion = "0.1.0";
}
