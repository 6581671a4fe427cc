#pragma once

namespace trapstab {

inline constexpr const char* kVersion = "1.0.0";

} // namespace trapstab
