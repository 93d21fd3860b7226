#pragma once

// Quartic symbol Q4 of the biharmonic operator on radial powers, the
// stability polynomial in p and the characteristic polynomials of the
// linearized Emden-Fowler equation.

#include <array>
#include <optional>
#include <string_view>

namespace biharm {

// Dimension n and exponent p of  Delta^2 phi = phi^p  on R^n, with the
// Emden-Fowler exponent m = 4/(p-1) cached.
class ProblemParams {
 public:
  // Throws std::invalid_argument unless n >= 5 and p > 1.
  ProblemParams(int n, double p);

  int n() const noexcept { return n_; }
  double p() const noexcept { return p_; }
  double m() const noexcept { return m_; }

  // Q4(m)^(1/(p-1)): amplitude of the singular solution, i.e. the limit of
  // r^m phi(r) at infinity.
  double limit_amplitude() const;

  friend bool operator==(const ProblemParams&, const ProblemParams&) = default;

 private:
  int n_;
  double p_;
  double m_;
};

enum class Regime {
  NoPositiveSolution,
  CriticalSobolev,
  SupercriticalUnstable,
  SupercriticalStable,
};

std::string_view to_string(Regime regime) noexcept;

enum class QForm { Factored, Expanded };

// Q4(alpha) = alpha (alpha+2) (alpha+2-n) (alpha+4-n) = |x|^(alpha+4) Delta^2 |x|^(-alpha).
double q4(double alpha, int n) noexcept;

// n^2 (n-4)^2 / 16, the sharp Rellich constant and the local maximum of Q4.
double rellich_constant(int n);

// p_n = (n+4)/(n-4).
double sobolev_exponent(int n);

// 16 (p-1)^4 [Q4((n-4)/2) - p Q4(4/(p-1))]. The factored form is routed to
// the expanded polynomial within 1e-6 of p = 1, where Q4(4/(p-1)) has a pole.
double script_q(double p, int n, QForm form = QForm::Expanded);

// Leading coefficient of script_q in p: (n-4)(n^3 - 4n^2 - 128n + 256).
double q_limit_coefficient(int n);

struct PcOptions {
  // Bisection stops once the bracket is narrower than rel_width * p, or when
  // the midpoint is no longer representable strictly inside the bracket.
  double rel_width = 1e-15;
  // Largest p the doubling search may reach before giving up.
  double p_ceiling = 1e8;
};

// Unique root p_c > p_n of script_q for n >= 13; std::nullopt for 5 <= n <= 12.
// Throws std::invalid_argument for n <= 4 and NoConvergence if the upper
// bracket exceeds the configured ceiling.
std::optional<double> p_critical(int n, const PcOptions& options = {});

// Defined for every n >= 1 and p > 1. An exponent within 1e-12 (relative) of
// p_n is treated as the Sobolev-critical exponent.
Regime classify(int n, double p);

enum class PolyKind { P, R };

// Four real roots of a quartic symmetric about symmetry_center, ascending.
struct RootSet {
  std::array<double, 4> roots{};
  double symmetry_center = 0.0;
  PolyKind which = PolyKind::P;

  int count_negative() const noexcept;
  int count_positive() const noexcept;
};

// Ascending coefficients c[0..4] of P(lambda) = Q4(m - lambda) - p Q4(m).
std::array<double, 5> p_polynomial_coefficients(const ProblemParams& params);
// Ascending coefficients of R(mu) = Q4(m - mu) - Q4(m).
std::array<double, 5> r_polynomial_coefficients(const ProblemParams& params);

// Horner evaluation of ascending coefficients.
double polyval(const std::array<double, 5>& coefficients, double x) noexcept;

// Roots of P via the substitution t = lambda - lambda*, which turns P into a
// quadratic in t^2. Throws RegimeError for p <= p_n and StabilityViolated when
// script_q(p) < 0. At script_q(p) == 0 the middle pair collapses onto lambda*.
RootSet roots_p_polynomial(const ProblemParams& params);

// Largest root lambda4 = lambda* + sqrt(T+) of P. It is real and positive for
// every p > p_n, including the unstable band where the middle pair is complex,
// and is the growth rate of the one unstable direction of the linearized
// Emden-Fowler flow. Throws RegimeError for p <= p_n.
double p_polynomial_largest_root(const ProblemParams& params);

// Roots mu1 < mu2 = 2 mu* < mu3 = 0 < mu4 of R. Throws RegimeError for p <= p_n.
RootSet roots_r_polynomial(const ProblemParams& params);

}  // namespace biharm
