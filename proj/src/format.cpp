#include "adstest/format.hpp"

#include <charconv>
#include <cmath>

namespace adstest {

std::string format_number(double v, int decimals) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  if (v == 0.0) v = 0.0;  // drop the sign of -0
  char buf[64];
  std::to_chars_result res{};
  if (decimals >= 0) {
    res = std::to_chars(buf, buf + sizeof(buf), v, std::chars_format::fixed, decimals);
  } else {
    res = std::to_chars(buf, buf + sizeof(buf), v);
  }
  return std::string(buf, res.ptr);
}

}  // namespace adstest
