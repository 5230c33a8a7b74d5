#pragma once

#include <string>
#include <vector>

namespace adstest {

struct SelfCheck {
  std::string name;
  bool ok = false;
  std::string detail;
};

/// Gradient check, closed-form statistics cases and geometry regressions.
/// Fast enough to run on every install.
std::vector<SelfCheck> run_selftest();

}  // namespace adstest
