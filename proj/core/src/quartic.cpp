#include "biharm/quartic.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

#include "biharm/errors.hpp"
#include "format.hpp"

namespace biharm {

namespace {

void require_dimension(int n, const char* what) {
  if (n <= 4) {
    throw std::invalid_argument(std::string(what) + ": requires n >= 5, got n = " + std::to_string(n));
  }
}

// Ascending coefficients of prod_i (a_i - x).
std::array<double, 5> expand_reflected(const std::array<double, 4>& shifts) {
  std::array<double, 5> c{1.0, 0.0, 0.0, 0.0, 0.0};
  int degree = 0;
  for (double a : shifts) {
    std::array<double, 5> next{};
    for (int k = 0; k <= degree; ++k) {
      next[k] += a * c[k];
      next[k + 1] -= c[k];
    }
    c = next;
    ++degree;
  }
  return c;
}

std::array<double, 5> q4_reflected_coefficients(double m, int n) {
  return expand_reflected({m, m + 2.0, m + 2.0 - n, m + 4.0 - n});
}

bool is_sobolev_critical(int n, double p) {
  const double pn = sobolev_exponent(n);
  return std::abs(p - pn) <= 1e-12 * pn;
}

void require_supercritical(const ProblemParams& params, const char* what) {
  const double pn = sobolev_exponent(params.n());
  if (!(params.p() > pn) || is_sobolev_critical(params.n(), params.p())) {
    throw RegimeError(std::string(what) + ": requires p > p_n = " + detail::fmt(pn) +
                      ", got p = " + detail::fmt(params.p()));
  }
}

}  // namespace

ProblemParams::ProblemParams(int n, double p) : n_(n), p_(p), m_(0.0) {
  require_dimension(n, "ProblemParams");
  if (!(p > 1.0) || !std::isfinite(p)) {
    throw std::invalid_argument("ProblemParams: requires finite p > 1, got p = " + detail::fmt(p));
  }
  m_ = 4.0 / (p - 1.0);
}

double ProblemParams::limit_amplitude() const {
  const double q = q4(m_, n_);
  if (!(q > 0.0)) {
    throw RegimeError("limit_amplitude: Q4(m) <= 0, no singular solution for p = " + detail::fmt(p_));
  }
  return std::pow(q, 1.0 / (p_ - 1.0));
}

std::string_view to_string(Regime regime) noexcept {
  switch (regime) {
    case Regime::NoPositiveSolution:
      return "NoPositiveSolution";
    case Regime::CriticalSobolev:
      return "CriticalSobolev";
    case Regime::SupercriticalUnstable:
      return "SupercriticalUnstable";
    case Regime::SupercriticalStable:
      return "SupercriticalStable";
  }
  return "Unknown";
}

double q4(double alpha, int n) noexcept {
  return alpha * (alpha + 2.0) * (alpha + 2.0 - n) * (alpha + 4.0 - n);
}

double rellich_constant(int n) {
  require_dimension(n, "rellich_constant");
  const double nn = n;
  return nn * nn * (nn - 4.0) * (nn - 4.0) / 16.0;
}

double sobolev_exponent(int n) {
  require_dimension(n, "sobolev_exponent");
  return (n + 4.0) / (n - 4.0);
}

double script_q(double p, int n, QForm form) {
  require_dimension(n, "script_q");
  const double nn = n;
  if (form == QForm::Factored && std::abs(p - 1.0) > 1e-6) {
    const double pm1 = p - 1.0;
    const double pm1_2 = pm1 * pm1;
    return 16.0 * pm1_2 * pm1_2 * (rellich_constant(n) - p * q4(4.0 / pm1, n));
  }
  const double pm1 = p - 1.0;
  const double pm1_2 = pm1 * pm1;
  const double lead = nn * nn * (nn - 4.0) * (nn - 4.0) * pm1_2 * pm1_2;
  const double tail = 128.0 * p * (p + 1.0) * ((nn - 4.0) * p - nn) * ((nn - 2.0) * p - (nn + 2.0));
  return lead - tail;
}

double q_limit_coefficient(int n) {
  require_dimension(n, "q_limit_coefficient");
  const double nn = n;
  return (nn - 4.0) * (nn * nn * nn - 4.0 * nn * nn - 128.0 * nn + 256.0);
}

std::optional<double> p_critical(int n, const PcOptions& options) {
  require_dimension(n, "p_critical");
  if (q_limit_coefficient(n) <= 0.0) {
    return std::nullopt;
  }
  double lo = sobolev_exponent(n);
  double hi = 2.0 * lo;
  while (script_q(hi, n) <= 0.0) {
    lo = hi;
    hi *= 2.0;
    if (hi > options.p_ceiling) {
      throw NoConvergence("p_critical: no sign change of script_q below p = " +
                          detail::fmt(options.p_ceiling) + " for n = " + std::to_string(n));
    }
  }
  while (true) {
    const double mid = lo + 0.5 * (hi - lo);
    if (!(mid > lo && mid < hi) || hi - lo <= options.rel_width * hi) {
      break;
    }
    if (script_q(mid, n) < 0.0) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return std::abs(script_q(lo, n)) < std::abs(script_q(hi, n)) ? lo : hi;
}

Regime classify(int n, double p) {
  if (n <= 4) {
    return Regime::NoPositiveSolution;
  }
  if (is_sobolev_critical(n, p)) {
    return Regime::CriticalSobolev;
  }
  if (p < sobolev_exponent(n)) {
    return Regime::NoPositiveSolution;
  }
  return script_q(p, n) < 0.0 ? Regime::SupercriticalUnstable : Regime::SupercriticalStable;
}

int RootSet::count_negative() const noexcept {
  return static_cast<int>(std::count_if(roots.begin(), roots.end(), [](double x) { return x < 0.0; }));
}

int RootSet::count_positive() const noexcept {
  return static_cast<int>(std::count_if(roots.begin(), roots.end(), [](double x) { return x > 0.0; }));
}

std::array<double, 5> p_polynomial_coefficients(const ProblemParams& params) {
  auto c = q4_reflected_coefficients(params.m(), params.n());
  c[0] -= params.p() * q4(params.m(), params.n());
  return c;
}

std::array<double, 5> r_polynomial_coefficients(const ProblemParams& params) {
  auto c = q4_reflected_coefficients(params.m(), params.n());
  c[0] = 0.0;
  return c;
}

double polyval(const std::array<double, 5>& coefficients, double x) noexcept {
  double acc = 0.0;
  for (auto it = coefficients.rbegin(); it != coefficients.rend(); ++it) {
    acc = acc * x + *it;
  }
  return acc;
}

// With c = (n-4)/2 and d = c + 2, Q4(c + b) = (b^2 - c^2)(b^2 - d^2), so both
// polynomials become T^2 - (c^2 + d^2) T + const in T = t^2.
RootSet roots_p_polynomial(const ProblemParams& params) {
  require_supercritical(params, "roots_p_polynomial");
  const int n = params.n();
  const double c = 0.5 * (n - 4.0);
  const double d = c + 2.0;
  const double c2 = c * c;
  const double d2 = d * d;
  const double center = params.m() - c;
  const double k = params.p() * q4(params.m(), n);

  const double t_plus = 0.5 * ((c2 + d2) + std::sqrt((d2 - c2) * (d2 - c2) + 4.0 * k));
  double gap = c2 * d2 - k;
  if (gap < 0.0) {
    if (-gap > 64.0 * std::numeric_limits<double>::epsilon() * c2 * d2) {
      throw StabilityViolated("roots_p_polynomial: script_q(p) < 0 at n = " + std::to_string(n) +
                              ", p = " + detail::fmt(params.p()) + "; middle roots are complex");
    }
    gap = 0.0;
  }
  const double t_minus = gap / t_plus;
  const double outer = std::sqrt(t_plus);
  const double inner = std::sqrt(t_minus);

  RootSet out;
  out.which = PolyKind::P;
  out.symmetry_center = center;
  out.roots = {center - outer, center - inner, center + inner, center + outer};
  return out;
}

double p_polynomial_largest_root(const ProblemParams& params) {
  require_supercritical(params, "p_polynomial_largest_root");
  const double c = 0.5 * (params.n() - 4.0);
  const double d = c + 2.0;
  const double k = params.p() * q4(params.m(), params.n());
  const double t_plus = 0.5 * ((c * c + d * d) + std::sqrt((d * d - c * c) * (d * d - c * c) + 4.0 * k));
  return params.m() - c + std::sqrt(t_plus);
}

RootSet roots_r_polynomial(const ProblemParams& params) {
  require_supercritical(params, "roots_r_polynomial");
  const int n = params.n();
  const double c = 0.5 * (n - 4.0);
  const double d = c + 2.0;
  const double center = params.m() - c;
  // Roots 0 and 2 mu* account for T = mu*^2; the other T follows from the sum.
  const double t_other = c * c + d * d - center * center;
  const double half_width = std::sqrt(t_other);

  RootSet out;
  out.which = PolyKind::R;
  out.symmetry_center = center;
  out.roots = {center - half_width, 2.0 * center, 0.0, center + half_width};
  return out;
}

}  // namespace biharm
