#pragma once

#include <string>

namespace adstest {

/// Shortest round-trip text, or fixed notation with `decimals` places.
std::string format_number(double v, int decimals = -1);

}  // namespace adstest
