#include "meanet/format.hpp"

#include <charconv>

namespace meanet {

std::string fmt_double(double value) {
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), value);
    (void)ec;
    return std::string(buf, ptr);
}

} // namespace meanet
