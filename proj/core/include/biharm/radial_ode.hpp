#pragma once

// Radial form of Delta^2 u = u^p as the first-order system in
// (u, u', v = Delta u, v'), and the shooting method on beta = Delta u(0)
// that selects the entire positive solution phi_alpha.
//
// Radii in ShootingConfig are intrinsic: they are measured in units of the
// length scale alpha^(-1/m) of phi_alpha, so one configuration resolves the
// whole family phi_alpha(r) = alpha phi_1(alpha^(1/m) r) equally well.
// Integration runs in extended precision (long double); returned samples are
// rounded to double.

#include <optional>
#include <vector>

#include "biharm/quartic.hpp"

namespace biharm {

struct State {
  double r = 0.0;
  double u = 0.0;   // phi(r)
  double du = 0.0;  // phi'(r)
  double v = 0.0;   // Delta phi(r)
  double dv = 0.0;  // (Delta phi)'(r)
};

// d/dr of (u, u', v, v').
struct StateRate {
  double du = 0.0;
  double d2u = 0.0;
  double dv = 0.0;
  double d2v = 0.0;
};

struct ShootingConfig {
  double r_start = 1e-3;         // hand-off radius of the series at the origin
  std::optional<double> r_max;   // integration horizon; see default_r_max
  double rel_tol = 1e-13;
  double abs_tol = 1e-16;
  // Bisection stops when |beta_hi - beta_lo| <= beta_tol |beta_lo|; 0 bisects
  // until the bracket endpoints are adjacent long doubles.
  double beta_tol = 0.0;
  double growth_factor = 4.0;    // Diverged once r^m u > K Q4(m)^(1/(p-1))
  int max_bisections = 200;
  // In the Sobolev-critical case the sign of an unresolved trajectory is
  // read off by continuing to r_max * critical_continuation.
  double critical_continuation = 1e8;

  // Throws std::invalid_argument on non-positive tolerances, K <= 1, etc.
  void validate() const;
};

// 10^2 at p = p_n. For p > p_n: 10^3, capped where the unstable mode of the
// Emden-Fowler linearization (growth rate lambda_4) would amplify long-double
// rounding in beta beyond 1e-6.
double default_r_max(const ProblemParams& params);

enum class TrajectoryKind { CrossedZero, Diverged, Resolved };

struct TrajectoryClass {
  TrajectoryKind kind = TrajectoryKind::Resolved;
  double r_event = 0.0;  // first r with u <= 0, divergence radius, or final r
};

struct Trajectory {
  TrajectoryClass cls;
  std::vector<State> grid;   // accepted steps from r_start; u > 0 throughout
  double max_defect = 0.0;   // see RadialSolution::residual
  long rhs_evaluations = 0;
};

// Right-hand side of the system; throws std::invalid_argument at r <= 0.
// u^p is evaluated on the positive part of u.
StateRate rhs(const State& s, const ProblemParams& params);

// Regular series at the origin through u ~ r^6, v ~ r^4 (absolute radius).
State taylor_start(double alpha, double beta, const ProblemParams& params, double r_start);

// Integrates from the series hand-off to the horizon with zero-crossing and
// divergence events. Throws StepUnderflow if the step size collapses.
Trajectory integrate(double alpha, double beta, const ProblemParams& params, const ShootingConfig& config);

enum class BracketSide { Low, High };

struct BisectionStep {
  double beta = 0.0;
  TrajectoryKind kind = TrajectoryKind::Resolved;
  BracketSide side = BracketSide::Low;
};

struct RadialSolution {
  ProblemParams params;
  double alpha = 0.0;
  double beta = 0.0;
  // First node is r = 0 with (alpha, 0, beta, 0).
  std::vector<State> grid;
  // Max over steps of the scaled defect h |y'_dense - f(y_dense)| / (atol + rtol |y|)
  // at step midpoints; 1 corresponds to the local error tolerance.
  double residual = 0.0;
  double length_scale = 1.0;  // alpha^(-1/m)
  ShootingConfig config;
  std::vector<BisectionStep> history;
  double beta_lo = 0.0;
  double beta_hi = 0.0;

  double r_max() const noexcept { return grid.empty() ? 0.0 : grid.back().r; }
};

// Bisection on beta in (beta_lo, 0]. Throws RegimeError for p < p_n and
// NoConvergence when the bracket budget runs out or neither bracket endpoint
// reaches the horizon.
RadialSolution shoot(double alpha, const ProblemParams& params, const ShootingConfig& config = {});

// phi_new(r) = k phi(k^(1/m) r) with k = new_alpha / alpha; no re-integration.
RadialSolution scale_solution(const RadialSolution& sol, double new_alpha);

// Cubic Hermite interpolation of u on the grid. Throws std::invalid_argument
// outside [0, r_max].
double eval_solution(const RadialSolution& sol, double r);
// The same interpolant's derivative.
double eval_solution_derivative(const RadialSolution& sol, double r);

}  // namespace biharm
