#include "biharm/closedform.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

#include "biharm/errors.hpp"
#include "format.hpp"

namespace biharm {

CriticalSolution::CriticalSolution(int n, double lambda) : n_(n), lambda_(lambda) {
  if (n <= 4) {
    throw std::invalid_argument("CriticalSolution: requires n >= 5, got n = " + std::to_string(n));
  }
  if (!(lambda > 0.0) || !std::isfinite(lambda)) {
    throw std::invalid_argument("CriticalSolution: requires lambda > 0");
  }
}

double CriticalSolution::p() const { return sobolev_exponent(n_); }

double CriticalSolution::coefficient() const {
  const double nn = n_;
  return std::pow((nn - 4.0) * (nn - 2.0) * nn * (nn + 2.0), (nn - 4.0) / 8.0);
}

CriticalSolution CriticalSolution::from_center_value(int n, double alpha) {
  if (!(alpha > 0.0)) {
    throw std::invalid_argument("CriticalSolution::from_center_value: requires alpha > 0");
  }
  const CriticalSolution unit(n, 1.0);
  const double k = 0.5 * (n - 4.0);
  return CriticalSolution(n, std::pow(unit.coefficient() / alpha, 1.0 / k));
}

double phi_critical(double r, const CriticalSolution& sol) {
  if (!(r >= 0.0)) {
    throw std::invalid_argument("phi_critical: requires r >= 0");
  }
  const double lambda = sol.lambda();
  const double k = 0.5 * (sol.n() - 4.0);
  return sol.coefficient() * std::pow(lambda / (lambda * lambda + r * r), k);
}

RadialJet phi_critical_jet(double r, const CriticalSolution& sol) {
  if (!(r >= 0.0)) {
    throw std::invalid_argument("phi_critical_jet: requires r >= 0");
  }
  const double lambda = sol.lambda();
  const double l2 = lambda * lambda;
  const double k = 0.5 * (sol.n() - 4.0);
  const double b = sol.coefficient() * std::pow(lambda, k);
  const double g = l2 + r * r;
  const double gk = std::pow(g, -k);
  const double g1 = gk / g;
  const double g2 = g1 / g;
  const double g3 = g2 / g;
  const double g4 = g3 / g;

  RadialJet jet;
  jet.u = b * gk;
  jet.du = -2.0 * k * b * r * g1;
  jet.d2u = -2.0 * k * b * (g1 - 2.0 * (k + 1.0) * r * r * g2);
  jet.v = -4.0 * k * b * (g1 + (k + 1.0) * l2 * g2);
  const double c = 8.0 * k * (k + 1.0) * b;
  jet.dv = c * r * (g2 + (k + 2.0) * l2 * g3);
  jet.d2v = c * (g2 + (k + 2.0) * l2 * g3 - 2.0 * (k + 2.0) * r * r * g3 -
                 2.0 * (k + 2.0) * (k + 3.0) * l2 * r * r * g4);
  return jet;
}

double phi_critical_laplacian_at_zero(const CriticalSolution& sol) {
  const double nn = sol.n();
  const double k = 0.5 * (nn - 4.0);
  return -nn * (nn - 4.0) * sol.coefficient() * std::pow(sol.lambda(), -k - 2.0);
}

SingularSolution::SingularSolution(const ProblemParams& params) : params_(params), amplitude_(0.0) {
  const double pn = sobolev_exponent(params.n());
  if (!(params.p() > pn) || std::abs(params.p() - pn) <= 1e-12 * pn) {
    throw RegimeError("SingularSolution: requires p > p_n = " + detail::fmt(pn));
  }
  amplitude_ = params.limit_amplitude();
}

double phi_singular(double r, const SingularSolution& sol) {
  if (!(r > 0.0)) {
    throw std::invalid_argument("phi_singular: undefined at r <= 0");
  }
  return sol.amplitude() * std::pow(r, -sol.params().m());
}

RadialJet phi_singular_jet(double r, const SingularSolution& sol) {
  if (!(r > 0.0)) {
    throw std::invalid_argument("phi_singular_jet: undefined at r <= 0");
  }
  const double m = sol.params().m();
  const double n = sol.params().n();
  const double a = sol.amplitude();
  const double base = a * std::pow(r, -m);
  // Delta r^(-m) = m (m + 2 - n) r^(-m-2)
  const double lap = m * (m + 2.0 - n);

  RadialJet jet;
  jet.u = base;
  jet.du = -m * base / r;
  jet.d2u = m * (m + 1.0) * base / (r * r);
  jet.v = lap * base / (r * r);
  jet.dv = -(m + 2.0) * jet.v / r;
  jet.d2v = (m + 2.0) * (m + 3.0) * jet.v / (r * r);
  return jet;
}

double gamma_half(int k) {
  if (k < 1) {
    throw std::invalid_argument("gamma_half: requires k >= 1");
  }
  double value = (k % 2 == 0) ? 1.0 : std::sqrt(std::numbers::pi);
  for (int j = (k % 2 == 0) ? 2 : 1; j + 2 <= k; j += 2) {
    value *= 0.5 * j;
  }
  return value;
}

double unit_sphere_area(int n) {
  if (n < 1) {
    throw std::invalid_argument("unit_sphere_area: requires n >= 1");
  }
  return 2.0 * std::pow(std::numbers::pi, 0.5 * n) / gamma_half(n);
}

double critical_energy_integral(int n, double lambda) {
  if (n <= 4) {
    throw std::invalid_argument("critical_energy_integral: requires n >= 5");
  }
  if (!(lambda > 0.0)) {
    throw std::invalid_argument("critical_energy_integral: requires lambda > 0");
  }
  const double beta = gamma_half(n) * gamma_half(n + 4) / gamma_half(2 * n + 4);
  return 0.5 * unit_sphere_area(n) * std::pow(lambda, -(n + 4.0)) * beta;
}

double instability_energy_closed_form(int n, double lambda) {
  const double nn = n;
  return -8.0 * std::pow(lambda, 4.0) * nn * (nn - 2.0) * (nn + 1.0) * critical_energy_integral(n, lambda);
}

}  // namespace biharm
