#pragma once

#include <charconv>
#include <cstdio>
#include <string>

namespace affect {

// Shortest round-trip decimal form, used everywhere a double becomes text
// (CSV cells, cache keys, directory names) so reruns are byte-stable.
inline std::string format_double(double v) {
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    if (ec != std::errc{}) {
        std::snprintf(buf, sizeof(buf), "%.17g", v);
        return std::string(buf);
    }
    return std::string(buf, ptr);
}

}  // namespace affect
