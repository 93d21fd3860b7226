#pragma once

// Emden-Fowler variables W(s) = r^m phi(r), s = log r, and the qualitative
// properties of entire solutions phrased on them: the bound W < Q4(m)^(1/(p-1)),
// monotonicity W' > 0 and the ordering of the family phi_alpha.

#include <vector>

#include "biharm/closedform.hpp"
#include "biharm/quartic.hpp"
#include "biharm/radial_ode.hpp"
#include "biharm/verification.hpp"

namespace biharm {

struct EmdenSample {
  double s = 0.0;
  double W = 0.0;
  double dW = 0.0;  // dW/ds
};

struct EmdenProfile {
  ProblemParams params;
  std::vector<EmdenSample> samples;
  double limit_amplitude = 0.0;  // Q4(m)^(1/(p-1))
};

// Y = W - Q4(m)^(1/(p-1)).
struct ShiftedSample {
  double s = 0.0;
  double Y = 0.0;
};

struct ShiftedProfile {
  std::vector<ShiftedSample> samples;
};

struct IntersectionReport {
  double alpha = 0.0;
  double beta = 0.0;
  int sign_changes = 0;
  double common_r_max = 0.0;  // right end of the compared interval [0, common_r_max]
  // min over 0 < r <= common r_max of r^m |phi_alpha - phi_beta| / Q4(m)^(1/(p-1)).
  double min_gap = 0.0;
  // phi_alpha - phi_beta has the sign of alpha - beta at every node (identically
  // zero when alpha == beta).
  bool ordered = false;
  // Non-intersection is a theorem only when script_q(p) >= 0.
  bool applicable = false;
  bool passed = false;
};

// Transforms every node with r > 0; W' = r^m (m u + r u').
EmdenProfile to_emden(const RadialSolution& sol);
EmdenProfile to_emden(const ProblemParams& params, const std::vector<State>& states);

// Constant profile W = Q4(m)^(1/(p-1)) on count points of [s_min, s_max].
EmdenProfile singular_emden_profile(const ProblemParams& params, double s_min, double s_max, int count);

ShiftedProfile shift(const EmdenProfile& profile);

// Cubic Hermite interpolation of W in s; throws outside the sampled range.
double eval_profile(const EmdenProfile& profile, double s);

// max over nodes of |Q4(m - d/ds) W - W^p| / W^p, with the s-derivatives of W
// up to order four taken from (u, u', Delta u, (Delta u)') and the ODE.
double emden_ode_residual(const ProblemParams& params, const std::vector<State>& states);
double emden_ode_residual(const EmdenProfile& profile, const RadialSolution& sol);
// The same quantity for the singular solution, |Q4(m) W0 - W0^p| / W0^p.
double emden_ode_residual(const SingularSolution& singular);

// Strict bound max W < Q4(m)^(1/(p-1)); margin min (1 - W / limit).
VerificationReport check_bound(const EmdenProfile& profile);
// W' > 0 at every sample; margin min W' / limit.
VerificationReport check_monotone(const EmdenProfile& profile);
// Sign changes of phi_alpha - phi_beta on the union of both grids restricted
// to the common domain, with a dead band of 1e-10 Q4(m)^(1/(p-1)) in W units.
// Throws std::invalid_argument for different (n, p).
IntersectionReport check_intersection(const RadialSolution& a, const RadialSolution& b);

}  // namespace biharm
