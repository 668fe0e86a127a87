#pragma once

#include <string>

namespace spinnet {

// Fixed 12-significant-digit decimal rendering ("%.12g" with "-0" folded to
// "0"), used everywhere a float reaches an output file so that identical
// inputs produce byte-identical artifacts.
std::string format_double(double x);

}  // namespace spinnet
