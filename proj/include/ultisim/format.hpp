#pragma once

#include <charconv>
#include <string>

namespace ultisim {

// Shortest decimal string that parses back to exactly the same double.
// Trait values are rendered with this rule so the precision stored in the
// microdata survives into prompt bytes unchanged: 0.0 -> "0", 0.1 -> "0.1",
// 0.8201827598505876 -> "0.8201827598505876".
inline std::string format_decimal(double value) {
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof buf, value);
    return std::string(buf, res.ptr);
}

}  // namespace ultisim
