#pragma once

namespace edmrec {

inline constexpr const char* kLibraryVersion = "0.1.0";

} // namespace edmrec
