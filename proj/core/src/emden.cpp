#include "biharm/emden.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

#include "log_jet.hpp"
#include "format.hpp"

namespace biharm {

namespace {

constexpr double kDeadBand = 1e-10;

bool theorem_applies(const ProblemParams& params) {
  return classify(params.n(), params.p()) == Regime::SupercriticalStable;
}

std::string regime_note(const ProblemParams& params) {
  if (theorem_applies(params)) {
    return {};
  }
  return "no theorem applies (" + std::string(to_string(classify(params.n(), params.p()))) + ")";
}

double amplitude_of(const ProblemParams& params) {
  return std::pow(q4(params.m(), params.n()), 1.0 / (params.p() - 1.0));
}

// Ascending coefficients of Q4(-x) = -x (2 - x)(2 - n - x)(4 - n - x); no constant term.
std::array<long double, 5> q4_negated_coefficients(int n) {
  std::array<long double, 5> c{1, 0, 0, 0, 0};
  int degree = 0;
  for (long double a : {0.0L, 2.0L, 2.0L - n, 4.0L - n}) {
    std::array<long double, 5> next{};
    for (int k = 0; k <= degree; ++k) {
      next[k] += a * c[k];
      next[k + 1] -= c[k];
    }
    c = next;
    ++degree;
  }
  return c;
}

}  // namespace

EmdenProfile to_emden(const ProblemParams& params, const std::vector<State>& states) {
  EmdenProfile out{params, {}, amplitude_of(params)};
  const double m = params.m();
  out.samples.reserve(states.size());
  for (const State& st : states) {
    if (!(st.r > 0.0)) {
      continue;
    }
    const double rm = std::pow(st.r, m);
    out.samples.push_back({std::log(st.r), rm * st.u, rm * (m * st.u + st.r * st.du)});
  }
  return out;
}

EmdenProfile to_emden(const RadialSolution& sol) { return to_emden(sol.params, sol.grid); }

EmdenProfile singular_emden_profile(const ProblemParams& params, double s_min, double s_max, int count) {
  if (count < 2 || !(s_max > s_min)) {
    throw std::invalid_argument("singular_emden_profile: requires count >= 2 and s_max > s_min");
  }
  EmdenProfile out{params, {}, params.limit_amplitude()};
  out.samples.reserve(count);
  for (int i = 0; i < count; ++i) {
    const double s = s_min + (s_max - s_min) * i / (count - 1);
    out.samples.push_back({s, out.limit_amplitude, 0.0});
  }
  return out;
}

ShiftedProfile shift(const EmdenProfile& profile) {
  ShiftedProfile out;
  out.samples.reserve(profile.samples.size());
  for (const auto& x : profile.samples) {
    out.samples.push_back({x.s, x.W - profile.limit_amplitude});
  }
  return out;
}

double eval_profile(const EmdenProfile& profile, double s) {
  const auto& xs = profile.samples;
  if (xs.size() < 2 || !(s >= xs.front().s) || s > xs.back().s) {
    throw std::invalid_argument("eval_profile: s = " + detail::fmt(s) + " outside the sampled range");
  }
  auto it = std::upper_bound(xs.begin(), xs.end(), s, [](double v, const EmdenSample& x) { return v < x.s; });
  if (it == xs.end()) {
    --it;
  }
  const EmdenSample& b = *it;
  const EmdenSample& a = *(it - 1);
  if (s == a.s) {
    return a.W;
  }
  if (s == b.s) {
    return b.W;
  }
  const double h = b.s - a.s;
  const double t = (s - a.s) / h;
  const double t2 = t * t;
  const double t3 = t2 * t;
  return (2 * t3 - 3 * t2 + 1) * a.W + (t3 - 2 * t2 + t) * h * a.dW + (-2 * t3 + 3 * t2) * b.W +
         (t3 - t2) * h * b.dW;
}

// Q4(m - d/ds) W = r^m Q4(-D) u and W^p = r^m r^4 u^p, D = r d/dr.
double emden_ode_residual(const ProblemParams& params, const std::vector<State>& states) {
  using Real = long double;
  const auto c = q4_negated_coefficients(params.n());
  const Real p = params.p();
  double worst = 0.0;
  for (const State& st : states) {
    if (!(st.r > 0.0)) {
      continue;
    }
    const Real r = st.r;
    const auto jet = detail::log_jet<Real>(r, st.u, st.du, st.v, st.dv, params.n(), p);
    Real lhs = 0;
    for (int k = 1; k <= 4; ++k) {
      lhs += c[k] * jet.d[k];
    }
    const Real r2 = r * r;
    const Real rhs = r2 * r2 * jet.u_pow_p;
    if (!(rhs > 0)) {
      return std::numeric_limits<double>::infinity();
    }
    worst = std::max(worst, static_cast<double>(std::abs(lhs - rhs) / rhs));
  }
  return worst;
}

double emden_ode_residual(const EmdenProfile& profile, const RadialSolution& sol) {
  if (!(profile.params == sol.params)) {
    throw std::invalid_argument("emden_ode_residual: profile and solution have different (n, p)");
  }
  return emden_ode_residual(sol.params, sol.grid);
}

double emden_ode_residual(const SingularSolution& singular) {
  const ProblemParams& params = singular.params();
  const double w0 = singular.amplitude();
  const double wp = std::pow(w0, params.p());
  return std::abs(q4(params.m(), params.n()) * w0 - wp) / wp;
}

VerificationReport check_bound(const EmdenProfile& profile) {
  VerificationReport rep;
  rep.name = "bound";
  rep.applicable = theorem_applies(profile.params);
  const double limit = profile.limit_amplitude;
  double margin = std::numeric_limits<double>::infinity();
  double worst_s = 0.0;
  for (const auto& x : profile.samples) {
    const double gap = 1.0 - x.W / limit;
    if (gap < margin) {
      margin = gap;
      worst_s = x.s;
    }
  }
  rep.margin = profile.samples.empty() ? 0.0 : margin;
  rep.passed = !profile.samples.empty() && margin > 0.0;
  rep.detail = "min(1 - W/W0) = " + detail::fmt(rep.margin) + " at s = " + detail::fmt(worst_s);
  if (!rep.applicable) {
    rep.detail = regime_note(profile.params) + "; " + rep.detail;
  }
  return rep;
}

VerificationReport check_monotone(const EmdenProfile& profile) {
  VerificationReport rep;
  rep.name = "monotone";
  rep.applicable = theorem_applies(profile.params);
  double margin = std::numeric_limits<double>::infinity();
  double worst_s = 0.0;
  for (const auto& x : profile.samples) {
    const double slope = x.dW / profile.limit_amplitude;
    if (slope < margin) {
      margin = slope;
      worst_s = x.s;
    }
  }
  rep.margin = profile.samples.empty() ? 0.0 : margin;
  rep.passed = !profile.samples.empty() && margin > 0.0;
  rep.detail = "min W'/W0 = " + detail::fmt(rep.margin) + " at s = " + detail::fmt(worst_s);
  if (!rep.applicable) {
    rep.detail = regime_note(profile.params) + "; " + rep.detail;
  }
  return rep;
}

IntersectionReport check_intersection(const RadialSolution& a, const RadialSolution& b) {
  if (!(a.params == b.params)) {
    throw std::invalid_argument("check_intersection: solutions have different (n, p)");
  }
  const ProblemParams& params = a.params;
  const double m = params.m();
  const double w0 = amplitude_of(params);
  const double r_common = std::min(a.r_max(), b.r_max());

  std::vector<double> radii;
  radii.reserve(a.grid.size() + b.grid.size());
  for (const auto* sol : {&a, &b}) {
    for (const State& st : sol->grid) {
      if (st.r <= r_common) {
        radii.push_back(st.r);
      }
    }
  }
  std::sort(radii.begin(), radii.end());
  radii.erase(std::unique(radii.begin(), radii.end()), radii.end());

  IntersectionReport rep;
  rep.alpha = a.alpha;
  rep.beta = b.alpha;
  rep.common_r_max = r_common;
  rep.applicable = theorem_applies(params);
  rep.min_gap = std::numeric_limits<double>::infinity();
  rep.ordered = true;

  const int expected = (a.alpha > b.alpha) - (a.alpha < b.alpha);
  int last_sign = 0;
  for (double r : radii) {
    const double diff = eval_solution(a, r) - eval_solution(b, r);
    const int sign = (diff > 0.0) - (diff < 0.0);
    if (sign != expected) {
      rep.ordered = false;
    }
    if (r > 0.0) {
      const double gap = std::pow(r, m) * std::abs(diff) / w0;
      rep.min_gap = std::min(rep.min_gap, gap);
      if (gap > kDeadBand) {
        if (last_sign != 0 && sign != last_sign) {
          ++rep.sign_changes;
        }
        last_sign = sign;
      }
    }
  }
  if (!std::isfinite(rep.min_gap)) {
    rep.min_gap = 0.0;
  }
  rep.passed = rep.sign_changes == 0 && rep.ordered;
  return rep;
}

}  // namespace biharm
