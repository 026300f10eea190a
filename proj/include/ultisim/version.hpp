#pragma once

namespace ultisim {

inline constexpr int kProtocolVersion = 1;
inline constexpr char kLibraryVersion[] = "1.0.0";

}  // namespace ultisim
