#pragma once

#include <string>

namespace meanet {

// Shortest decimal string that parses back to exactly the same double.
// Used everywhere a floating-point value is written to disk, so that file
// bytes are a pure function of the value.
std::string fmt_double(double value);

} // namespace meanet
