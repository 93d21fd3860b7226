#pragma once

// Quadratic form E(zeta) = int (Delta zeta)^2 - int V zeta^2 of the linearized
// operator Delta^2 - p phi^(p-1), evaluated by radial quadrature, plus the
// pointwise Rellich comparison that makes the form non-negative.

#include <functional>
#include <optional>
#include <variant>
#include <vector>

#include "biharm/closedform.hpp"
#include "biharm/quartic.hpp"
#include "biharm/radial_ode.hpp"
#include "biharm/verification.hpp"

namespace biharm {

// zeta = (lambda^2 + r^2)^(-(n-2)/2).
struct CriticalZeta {
  double lambda = 1.0;
};

// zeta = r^(-sigma) chi(r); chi rises from 0 at inner_cut/10 to 1 at inner_cut,
// stays 1 up to outer_cut and falls to 0 at 10 outer_cut, with quintic
// smoothstep transitions in log10 r.
struct HardyProfile {
  double sigma = 0.0;
  double inner_cut = 1.0;
  double outer_cut = 10.0;
};

class TestFunction {
 public:
  using Kind = std::variant<CriticalZeta, HardyProfile>;

  // Throws std::invalid_argument for n < 5, lambda <= 0 or cuts not 0 < inner < outer.
  TestFunction(int n, Kind kind);

  int n() const noexcept { return n_; }
  const Kind& kind() const noexcept { return kind_; }

  double value(double r) const;
  // Radial Laplacian zeta'' + (n-1) zeta' / r, analytic.
  double laplacian(double r) const;
  // Breakpoints for the quadrature; the last entry may be +infinity.
  std::vector<double> breakpoints() const;

 private:
  int n_;
  Kind kind_;
};

// V(r) = p phi(r)^(p-1), with the radii where V is not smooth.
struct RadialPotential {
  std::function<double(double)> value;
  std::vector<double> breakpoints;

  double operator()(double r) const { return value(r); }
};

// p phi_lambda^(p-1) for the critical bubble.
RadialPotential critical_potential(const CriticalSolution& sol);
// p u^(p-1) from the Hermite interpolant on [0, r_max]; beyond r_max the tail
// law p Q4(m) r^(-4) for p > p_n, and u(r_max) (r_max / r)^(n-4) at p = p_n.
RadialPotential solution_potential(const RadialSolution& sol);

struct QuadratureOptions {
  int points = 31;            // Gauss-Kronrod nodes per panel: 15, 31, 41, 51 or 61
  double tolerance = 1e-12;   // relative, per segment
  int max_depth = 15;
};

struct EnergyReport {
  double bilaplacian_term = 0.0;  // int (Delta zeta)^2 dx
  double potential_term = 0.0;    // int V zeta^2 dx
  double energy = 0.0;            // bilaplacian_term - potential_term
  double quadrature_error_estimate = 0.0;
  bool converged = true;
};

// Radial quadrature with the |S^(n-1)| r^(n-1) weight, split at the test
// function's breakpoints and at every decade in between.
EnergyReport energy(const TestFunction& test, const RadialPotential& potential, const ProblemParams& params,
                    const QuadratureOptions& options = {});

// max over r > 0 on the grid of p r^4 u^(p-1) against n^2 (n-4)^2 / 16 (1 + 1e-9).
// The margin is 1 - max / (n^2 (n-4)^2 / 16). A theorem backs the outcome only
// when script_q(p) >= 0.
VerificationReport rellich_pointwise_check(const RadialSolution& sol);

// Radii are in units of the solution's length scale alpha^(-1/m).
struct ProbeGrid {
  std::vector<double> sigmas;       // empty: (n-4)/2 times {0.9, 1, 1.1}
  std::vector<double> inner_cuts = {3.0, 30.0, 300.0};
  std::vector<double> ratios = {1e2, 1e4, 1e6};  // outer_cut / inner_cut
  // At p = p_n, also try the bubble zeta at the scale matched to alpha.
  bool include_critical_zeta = true;
};

struct ProbeHit {
  TestFunction test;
  EnergyReport report;
};

struct ProbeResult {
  std::optional<ProbeHit> hit;  // first negative energy in grid order
  int evaluated = 0;
};

// Sweeps the grid in parallel. An empty result means the probe is inconclusive.
ProbeResult instability_probe(const RadialSolution& sol, const ProbeGrid& grid = {},
                              const QuadratureOptions& options = {});

}  // namespace biharm
