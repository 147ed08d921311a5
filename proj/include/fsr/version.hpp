#pragma once

namespace fsr {

inline constexpr const char* kLibraryVersion = "0.1.0";

}  // namespace fsr
