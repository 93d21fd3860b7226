#pragma once

// Explicit solutions used as oracles: the Sobolev-critical bubble phi_lambda,
// the singular solution Q4(m)^(1/(p-1)) r^(-m), and the Beta-function value of
// the instability energy at the critical exponent.

#include "biharm/quartic.hpp"

namespace biharm {

// Radial jet (u, u', u'', Delta u, (Delta u)', (Delta u)'') at radius r.
struct RadialJet {
  double u = 0.0;
  double du = 0.0;
  double d2u = 0.0;
  double v = 0.0;
  double dv = 0.0;
  double d2v = 0.0;
};

// phi_lambda centered at the origin, for p = (n+4)/(n-4).
class CriticalSolution {
 public:
  CriticalSolution(int n, double lambda);

  int n() const noexcept { return n_; }
  double lambda() const noexcept { return lambda_; }
  double p() const;
  // [(n-4)(n-2)n(n+2)]^(1/(p-1)) = [(n-4)(n-2)n(n+2)]^((n-4)/8).
  double coefficient() const;

  // The scale lambda whose bubble has phi(0) = alpha.
  static CriticalSolution from_center_value(int n, double alpha);

 private:
  int n_;
  double lambda_;
};

double phi_critical(double r, const CriticalSolution& sol);

// Analytic radial derivatives of phi_lambda.
RadialJet phi_critical_jet(double r, const CriticalSolution& sol);

// Delta phi_lambda(0) = -n (n-4) C lambda^(-(n-4)/2 - 2), C the coefficient.
double phi_critical_laplacian_at_zero(const CriticalSolution& sol);

// Q4(m)^(1/(p-1)) |x|^(-m), defined for p > p_n.
class SingularSolution {
 public:
  explicit SingularSolution(const ProblemParams& params);

  const ProblemParams& params() const noexcept { return params_; }
  double amplitude() const noexcept { return amplitude_; }

 private:
  ProblemParams params_;
  double amplitude_;
};

// Throws std::invalid_argument at r <= 0.
double phi_singular(double r, const SingularSolution& sol);
RadialJet phi_singular_jet(double r, const SingularSolution& sol);

// Gamma(k/2) for integer k >= 1, by exact half-integer recursion.
double gamma_half(int k);
// |S^(n-1)| = 2 pi^(n/2) / Gamma(n/2).
double unit_sphere_area(int n);

// int_{R^n} (lambda^2 + |x|^2)^(-(n+2)) dx
//   = |S^(n-1)| / 2 * lambda^(-(n+4)) * B(n/2, (n+4)/2).
double critical_energy_integral(int n, double lambda);

// E(zeta) = -8 lambda^4 n (n-2)(n+1) * critical_energy_integral(n, lambda)
// for zeta = (lambda^2 + r^2)^(-(n-2)/2) against phi_lambda.
double instability_energy_closed_form(int n, double lambda);

}  // namespace biharm
