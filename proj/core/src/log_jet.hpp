#pragma once

// Logarithmic derivatives D^k u, D = r d/dr, of a radial solution of
// Delta^2 u = u^p, obtained from (u, u', v, v') and the ODE itself.
// Used for s-derivatives of the Emden-Fowler profile W(s) = r^m u(r).

#include <array>
#include <cmath>

namespace biharm::detail {

template <class Real>
struct LogJet {
  std::array<Real, 5> d{};  // d[k] = D^k u
  Real u_pow_p = 0;         // u^p
};

template <class Real>
LogJet<Real> log_jet(Real r, Real u, Real du, Real v, Real dv, int n, Real p) {
  using std::pow;
  const Real nm1 = n - 1;
  const Real up = u > 0 ? pow(u, p) : Real(0);
  const Real u2 = v - nm1 * du / r;
  const Real u3 = dv - nm1 * (u2 - du / r) / r;
  const Real v2 = up - nm1 * dv / r;
  const Real u4 = v2 - nm1 * (u3 - 2 * (u2 - du / r) / r) / r;
  const Real r2 = r * r;
  const Real r3 = r2 * r;
  const Real r4 = r2 * r2;

  LogJet<Real> jet;
  jet.u_pow_p = up;
  jet.d[0] = u;
  jet.d[1] = r * du;
  jet.d[2] = r * du + r2 * u2;
  jet.d[3] = r * du + 3 * r2 * u2 + r3 * u3;
  jet.d[4] = r * du + 7 * r2 * u2 + 6 * r3 * u3 + r4 * u4;
  return jet;
}

// s-derivatives of W = r^m u: W^(k) = r^m (m + D)^k u, k = 0..order.
template <class Real>
std::array<Real, 5> emden_derivatives(const LogJet<Real>& jet, Real r, Real m, int order = 4) {
  using std::pow;
  static constexpr int binom[5][5] = {{1, 0, 0, 0, 0}, {1, 1, 0, 0, 0}, {1, 2, 1, 0, 0}, {1, 3, 3, 1, 0}, {1, 4, 6, 4, 1}};
  const Real rm = pow(r, m);
  std::array<Real, 5> w{};
  for (int k = 0; k <= order; ++k) {
    Real acc = 0;
    Real mpow = 1;
    for (int j = k; j >= 0; --j) {
      acc += binom[k][j] * mpow * jet.d[j];
      mpow *= m;
    }
    w[k] = rm * acc;
  }
  return w;
}

}  // namespace biharm::detail
