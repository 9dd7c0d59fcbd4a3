#pragma once

namespace ayu {

inline constexpr const char* version = "1.0.0";

}
