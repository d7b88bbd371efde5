#pragma once

namespace hdsim {
inline constexpr const char* kVersion = "1.0.0";
}
