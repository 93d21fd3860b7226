#pragma once

#include <string>

namespace biharm {

// Outcome of one executable property check.
struct VerificationReport {
  std::string name;
  bool passed = false;
  // False when no theorem covers this (n, p): the outcome is informational.
  bool applicable = true;
  double margin = 0.0;
  std::string detail;
};

}  // namespace biharm
