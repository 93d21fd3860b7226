#pragma once

#include <cmath>
#include <map>
#include <memory>
#include <mutex>
#include <tuple>

#include "biharm/radial_ode.hpp"

namespace biharm::testing {

// Shoots are the expensive part of most suites; share them within a binary.
inline const RadialSolution& solved(int n, double p, double alpha) {
  static std::mutex mu;
  static std::map<std::tuple<int, double, double>, std::unique_ptr<RadialSolution>> cache;
  std::lock_guard lock(mu);
  auto& slot = cache[{n, p, alpha}];
  if (!slot) slot = std::make_unique<RadialSolution>(shoot(alpha, ProblemParams(n, p)));
  return *slot;
}

inline double rel_diff(double a, double b) { return std::abs(a - b) / std::max(std::abs(a), std::abs(b)); }

}  // namespace biharm::testing
