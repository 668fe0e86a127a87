#include "spinnet/numfmt.hpp"

#include <cmath>
#include <cstdio>

namespace spinnet {

std::string format_double(double x) {
    if (x == 0.0) return "0";  // covers -0.0
    if (std::isnan(x)) return "nan";
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.12g", x);
    return buf;
}

}  // namespace spinnet
