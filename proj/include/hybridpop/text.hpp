#pragma once

#include <cstdio>
#include <string>

namespace hybridpop
{

/// Round-trip representation, 17 significant digits.
inline std::string to_text(double value)
{
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", value);
    return buf;
}

} // namespace hybridpop
