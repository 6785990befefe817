#pragma once

namespace twmix {

inline constexpr const char* kVersion = "0.1.0";

}
