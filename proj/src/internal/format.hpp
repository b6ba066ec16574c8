#pragma once

#include <cmath>
#include <cstdio>
#include <string>

namespace momentum::detail {

// CSV cell for a double: shortest round-trippable-ish form, with explicit
// NaN / Inf / -Inf tokens so spreadsheets and diff tools stay readable.
inline std::string csv_num(double v) {
    if (std::isnan(v)) return "NaN";
    if (std::isinf(v)) return v > 0 ? "Inf" : "-Inf";
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.9g", v);
    return buf;
}

}  // namespace momentum::detail
