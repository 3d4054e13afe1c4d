#pragma once

namespace bellstat {

inline constexpr const char* version_string = "1.0.0";

}  // namespace bellstat
