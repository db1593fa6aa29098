#pragma once

namespace scalelab {

inline constexpr const char* kVersion = "0.1.0";

} // namespace scalelab
