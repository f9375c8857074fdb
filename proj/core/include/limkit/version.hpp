#pragma once

namespace limkit {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace limkit
