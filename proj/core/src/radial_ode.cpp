#include "biharm/radial_ode.hpp"

#include <algorithm>
#include <array>
#include <cfloat>
#include <cmath>
#include <stdexcept>
#include <string>

#include "biharm/errors.hpp"
#include "dopri5.hpp"
#include "log_jet.hpp"
#include "format.hpp"

namespace biharm {

namespace {

using Real = long double;
using Vec = std::array<Real, 4>;

struct RadialSystem {
  int n;
  Real p;

  Vec operator()(Real r, const Vec& y) const {
    const Real nm1 = n - 1;
    const Real up = y[0] > 0 ? std::pow(y[0], p) : Real(0);
    return {y[1], y[2] - nm1 * y[1] / r, y[3], up - nm1 * y[3] / r};
  }
};

using Stepper = detail::Dopri5<Real, 4, RadialSystem>;

Vec series_state(Real alpha, Real beta, int n, Real p, Real r) {
  const Real ap = std::pow(alpha, p);
  const Real u2 = beta / (2 * n);
  const Real u4 = ap / (8 * n * (n + 2));
  const Real v2 = ap / (2 * n);
  // Next order from u^p = alpha^p + p alpha^(p-1) u2 r^2 + O(r^4).
  const Real v4 = p * std::pow(alpha, p - 1) * u2 / (4 * (n + 2));
  const Real u6 = v4 / (6 * (n + 4));
  const Real r2 = r * r;
  return {alpha + r2 * (u2 + r2 * (u4 + r2 * u6)),
          r * (2 * u2 + r2 * (4 * u4 + r2 * 6 * u6)),
          beta + r2 * (v2 + r2 * v4),
          r * (2 * v2 + r2 * 4 * v4)};
}

State to_state(Real r, const Vec& y) {
  return {static_cast<double>(r), static_cast<double>(y[0]), static_cast<double>(y[1]), static_cast<double>(y[2]),
          static_cast<double>(y[3])};
}

// Fixed per (params, alpha, config): absolute radii and detector data.
struct ShootSetup {
  int n = 0;
  Real p = 0;
  Real m = 0;
  Real alpha = 0;
  Real length_scale = 1;
  Real r0 = 0;
  Real r_max = 0;
  Real rel_tol = 0;
  Real abs_tol = 0;
  bool supercritical = false;
  Real divergence_level = 0;  // K * Q4(m)^(1/(p-1))
  Real amplitude = 0;
  // Monic cubic R(lambda) = P(lambda) / (lambda - lambda4), ascending.
  std::array<Real, 3> cofactor{};
};

ShootSetup make_setup(double alpha, const ProblemParams& params, const ShootingConfig& config) {
  ShootSetup s;
  s.n = params.n();
  s.p = params.p();
  s.m = Real(4) / (s.p - 1);
  s.alpha = alpha;
  s.length_scale = std::pow(static_cast<Real>(alpha), -1 / s.m);
  s.r0 = config.r_start * s.length_scale;
  s.r_max = config.r_max.value_or(default_r_max(params)) * s.length_scale;
  s.rel_tol = config.rel_tol;
  s.abs_tol = config.abs_tol;
  const Regime regime = classify(params.n(), params.p());
  s.supercritical = regime == Regime::SupercriticalStable || regime == Regime::SupercriticalUnstable;
  if (s.supercritical) {
    s.amplitude = params.limit_amplitude();
    s.divergence_level = config.growth_factor * s.amplitude;
    const auto c = p_polynomial_coefficients(params);
    const Real lam4 = p_polynomial_largest_root(params);
    const Real r2 = c[3] + lam4;
    const Real r1 = c[2] + lam4 * r2;
    const Real r0 = c[1] + lam4 * r1;
    s.cofactor = {r0, r1, r2};
  }
  return s;
}

struct RunOptions {
  bool record = false;
  bool measure_defect = false;
  // Keep integrating past r_max (without recording) until an event or
  // r_max * continuation; used to classify critical-case trajectories.
  Real continuation = 0;
  // Step exactly through these radii instead of adapting (first entry is r0).
  const std::vector<Real>* replay = nullptr;
};

struct RunOutcome {
  TrajectoryKind kind = TrajectoryKind::Resolved;
  Real r_event = 0;
  bool reached_r_max = false;
  Real projection = 0;  // unstable-mode coefficient R(d/ds) Y at r_max
  std::vector<Real> radii;
  std::vector<Vec> states;
  double max_defect = 0.0;
  long evaluations = 0;
};

// R(d/ds) (W - W0): the component along the unstable eigenvector, up to a
// positive factor, of the linearization at the singular fixed point.
Real unstable_projection(const ShootSetup& s, Real r, const Vec& y) {
  const auto jet = detail::log_jet<Real>(r, y[0], y[1], y[2], y[3], s.n, s.p);
  const auto w = detail::emden_derivatives<Real>(jet, r, s.m, 3);
  return w[3] + s.cofactor[2] * w[2] + s.cofactor[1] * w[1] + s.cofactor[0] * (w[0] - s.amplitude);
}

bool diverged(const ShootSetup& s, Real r, const Vec& y) {
  if (y[1] > 0 && y[2] > 0) {
    return true;
  }
  return s.supercritical && std::pow(r, s.m) * y[0] > s.divergence_level;
}

Real locate_zero(const Stepper& stepper) {
  Real lo = stepper.r_previous();
  Real hi = stepper.r();
  for (int i = 0; i < 200; ++i) {
    const Real mid = lo + (hi - lo) / 2;
    if (!(mid > lo && mid < hi)) {
      break;
    }
    if (stepper.dense(mid)[0] > 0) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return hi;
}

double step_defect(const Stepper& stepper, const ShootSetup& s) {
  const Real h = stepper.last_step();
  const Real rm = stepper.r_previous() + h / 2;
  const Vec y = stepper.dense(rm);
  const Vec dy = stepper.dense_derivative(rm);
  const Vec f = stepper.rhs()(rm, y);
  Real worst = 0;
  for (std::size_t i = 0; i < 4; ++i) {
    const Real scaled = h * std::abs(dy[i] - f[i]) / (s.abs_tol + s.rel_tol * std::abs(y[i]));
    worst = std::max(worst, scaled);
  }
  return static_cast<double>(worst);
}

RunOutcome run(const ShootSetup& s, Real beta, const RunOptions& options) {
  RunOutcome out;
  Stepper stepper(RadialSystem{s.n, s.p}, s.rel_tol, s.abs_tol);
  stepper.reset(s.r0, series_state(s.alpha, beta, s.n, s.p, s.r0));
  if (options.record) {
    out.radii.push_back(stepper.r());
    out.states.push_back(stepper.y());
  }
  const Real horizon = options.continuation > 0 ? s.r_max * options.continuation : s.r_max;
  Real h = s.r0 / 10;
  std::size_t next = 1;
  while (stepper.r() < horizon) {
    if (options.replay) {
      if (next >= options.replay->size()) {
        break;
      }
      stepper.step_to((*options.replay)[next++]);
    } else {
      const Real limit = out.reached_r_max ? horizon : s.r_max;
      h = stepper.step(h, limit);
    }
    const Real r = stepper.r();
    const Vec& y = stepper.y();
    if (options.measure_defect && !out.reached_r_max) {
      out.max_defect = std::max(out.max_defect, step_defect(stepper, s));
    }
    if (y[0] <= 0) {
      out.kind = TrajectoryKind::CrossedZero;
      out.r_event = locate_zero(stepper);
      break;
    }
    if (diverged(s, r, y)) {
      out.kind = TrajectoryKind::Diverged;
      out.r_event = r;
      break;
    }
    if (!out.reached_r_max) {
      if (options.record) {
        out.radii.push_back(r);
        out.states.push_back(y);
      }
      if (r >= s.r_max) {
        out.reached_r_max = true;
        if (s.supercritical) {
          out.projection = unstable_projection(s, r, y);
        }
        if (options.continuation <= 0) {
          out.kind = TrajectoryKind::Resolved;
          out.r_event = r;
          break;
        }
      }
    }
    out.kind = TrajectoryKind::Resolved;
    out.r_event = r;
  }
  out.evaluations = stepper.evaluations();
  return out;
}

enum class Verdict { Low, High, Exact };

constexpr Real kMaxSecantUlps = 64;

Verdict side_of(const RunOutcome& o, const ShootSetup& s) {
  switch (o.kind) {
    case TrajectoryKind::CrossedZero:
      return Verdict::Low;
    case TrajectoryKind::Diverged:
      return Verdict::High;
    case TrajectoryKind::Resolved:
      break;
  }
  if (s.supercritical) {
    return o.projection > 0 ? Verdict::High : Verdict::Low;
  }
  return Verdict::Exact;
}

BracketSide to_side(Verdict v) { return v == Verdict::Low ? BracketSide::Low : BracketSide::High; }

}  // namespace

void ShootingConfig::validate() const {
  if (!(r_start > 0.0) || !(r_start < 1.0)) {
    throw std::invalid_argument("ShootingConfig: requires 0 < r_start < 1");
  }
  if (r_max && !(*r_max > r_start)) {
    throw std::invalid_argument("ShootingConfig: requires r_max > r_start");
  }
  if (!(rel_tol > 0.0) || !(abs_tol > 0.0)) {
    throw std::invalid_argument("ShootingConfig: tolerances must be positive");
  }
  if (!(beta_tol >= 0.0)) {
    throw std::invalid_argument("ShootingConfig: beta_tol must be non-negative");
  }
  if (!(growth_factor > 1.0)) {
    throw std::invalid_argument("ShootingConfig: growth_factor must exceed 1");
  }
  if (max_bisections <= 0) {
    throw std::invalid_argument("ShootingConfig: max_bisections must be positive");
  }
  if (!(critical_continuation > 1.0)) {
    throw std::invalid_argument("ShootingConfig: critical_continuation must exceed 1");
  }
}

double default_r_max(const ProblemParams& params) {
  const Regime regime = classify(params.n(), params.p());
  if (regime == Regime::CriticalSobolev || regime == Regime::NoPositiveSolution) {
    return 1e2;
  }
  const double growth = p_polynomial_largest_root(params);
  const double resolvable = std::exp(std::log(1e-6 / LDBL_EPSILON) / growth);
  return std::max(1.0, std::min(1e3, resolvable));
}

StateRate rhs(const State& s, const ProblemParams& params) {
  if (!(s.r > 0.0)) {
    throw std::invalid_argument("rhs: requires r > 0; use taylor_start at the origin");
  }
  const double nm1 = params.n() - 1.0;
  const double up = s.u > 0.0 ? std::pow(s.u, params.p()) : 0.0;
  return {s.du, s.v - nm1 * s.du / s.r, s.dv, up - nm1 * s.dv / s.r};
}

State taylor_start(double alpha, double beta, const ProblemParams& params, double r_start) {
  if (!(alpha > 0.0)) {
    throw std::invalid_argument("taylor_start: requires alpha > 0");
  }
  if (!(r_start >= 0.0)) {
    throw std::invalid_argument("taylor_start: requires r_start >= 0");
  }
  return to_state(r_start, series_state(alpha, beta, params.n(), params.p(), r_start));
}

Trajectory integrate(double alpha, double beta, const ProblemParams& params, const ShootingConfig& config) {
  if (!(alpha > 0.0)) {
    throw std::invalid_argument("integrate: requires alpha > 0");
  }
  config.validate();
  const ShootSetup setup = make_setup(alpha, params, config);
  RunOutcome o = run(setup, beta, {.record = true, .measure_defect = true});
  Trajectory t;
  t.cls = {o.kind, static_cast<double>(o.r_event)};
  t.grid.reserve(o.states.size());
  for (std::size_t i = 0; i < o.states.size(); ++i) {
    t.grid.push_back(to_state(o.radii[i], o.states[i]));
  }
  t.max_defect = o.max_defect;
  t.rhs_evaluations = o.evaluations;
  return t;
}

RadialSolution shoot(double alpha, const ProblemParams& params, const ShootingConfig& config) {
  if (!(alpha > 0.0) || !std::isfinite(alpha)) {
    throw std::invalid_argument("shoot: requires alpha > 0");
  }
  config.validate();
  if (classify(params.n(), params.p()) == Regime::NoPositiveSolution) {
    throw RegimeError("shoot: no positive entire solution for n = " + std::to_string(params.n()) +
                      ", p = " + detail::fmt(params.p()) + " (p < p_n)");
  }
  const ShootSetup setup = make_setup(alpha, params, config);
  const RunOptions probe{.continuation = setup.supercritical ? Real(0) : Real(config.critical_continuation)};

  std::vector<BisectionStep> history;
  auto classify_beta = [&](Real beta, RunOutcome& outcome) {
    outcome = run(setup, beta, probe);
    const Verdict v = side_of(outcome, setup);
    history.push_back({static_cast<double>(beta), outcome.kind, to_side(v)});
    return v;
  };

  Real hi = 0;
  RunOutcome hi_run;
  if (classify_beta(hi, hi_run) != Verdict::High) {
    throw NoConvergence("shoot: beta = 0 is not on the divergent side");
  }
  Real lo = -std::pow(static_cast<Real>(alpha), (setup.p + 1) / 2);
  RunOutcome lo_run;
  int doublings = 0;
  while (true) {
    const Verdict v = classify_beta(lo, lo_run);
    if (v == Verdict::Low) {
      break;
    }
    if (v == Verdict::Exact) {
      hi = lo;
      hi_run = lo_run;
      break;
    }
    hi = lo;
    hi_run = lo_run;
    lo *= 2;
    if (++doublings > config.max_bisections) {
      throw NoConvergence("shoot: no zero-crossing found while doubling beta downward");
    }
  }

  bool exact = lo == hi;
  int bisections = 0;
  while (!exact) {
    const Real mid = lo + (hi - lo) / 2;
    if (!(mid > lo && mid < hi)) {
      break;
    }
    if (config.beta_tol > 0.0 && hi - lo <= Real(config.beta_tol) * std::abs(lo)) {
      break;
    }
    if (++bisections > config.max_bisections) {
      throw NoConvergence("shoot: bisection budget of " + std::to_string(config.max_bisections) + " exhausted");
    }
    RunOutcome mid_run;
    switch (classify_beta(mid, mid_run)) {
      case Verdict::Low:
        lo = mid;
        lo_run = std::move(mid_run);
        break;
      case Verdict::High:
        hi = mid;
        hi_run = std::move(mid_run);
        break;
      case Verdict::Exact:
        lo = hi = mid;
        lo_run = hi_run = std::move(mid_run);
        exact = true;
        break;
    }
  }

  // Choose the bracket endpoint whose trajectory is best resolved at r_max.
  auto usable = [](const RunOutcome& o) { return o.reached_r_max; };
  Real chosen;
  if (usable(lo_run) && usable(hi_run)) {
    if (setup.supercritical) {
      chosen = std::abs(lo_run.projection) <= std::abs(hi_run.projection) ? lo : hi;
    } else {
      chosen = lo_run.r_event >= hi_run.r_event ? lo : hi;
    }
  } else if (usable(lo_run)) {
    chosen = lo;
  } else if (usable(hi_run)) {
    chosen = hi;
  } else {
    throw NoConvergence("shoot: neither bracket endpoint reaches r_max = " +
                        detail::fmt(static_cast<double>(setup.r_max)) +
                        "; the horizon exceeds what the working precision resolves");
  }

  RunOutcome final_run = run(setup, chosen, {.record = true, .measure_defect = true});
  if (final_run.kind != TrajectoryKind::Resolved) {
    throw NoConvergence("shoot: selected trajectory does not reach r_max");
  }
  Real beta = chosen;
  double residual = final_run.max_defect;

  // Adjacent long doubles still differ by a visible amount in the unstable
  // mode at r_max. Replaying the other endpoint on the same steps and taking
  // the combination with zero projection removes that quantization.
  const Real partner = chosen == lo ? hi : lo;
  if (setup.supercritical && partner != chosen) {
    RunOutcome other = run(setup, partner, {.record = true, .measure_defect = true, .replay = &final_run.radii});
    if (other.kind == TrajectoryKind::Resolved && other.states.size() == final_run.states.size()) {
      const Real g0 = unstable_projection(setup, final_run.radii.back(), final_run.states.back());
      const Real g1 = unstable_projection(setup, other.radii.back(), other.states.back());
      const Real theta = g0 / (g0 - g1);
      if (std::isfinite(theta) && std::abs(theta) <= kMaxSecantUlps) {
        for (std::size_t i = 0; i < final_run.states.size(); ++i) {
          for (std::size_t j = 0; j < 4; ++j) {
            final_run.states[i][j] += theta * (other.states[i][j] - final_run.states[i][j]);
          }
        }
        beta = chosen + theta * (partner - chosen);
        residual = std::max(residual, other.max_defect);
      }
    }
  }

  RadialSolution sol{.params = params,
                     .alpha = alpha,
                     .beta = static_cast<double>(beta),
                     .grid = {},
                     .residual = residual,
                     .length_scale = static_cast<double>(setup.length_scale),
                     .config = config,
                     .history = std::move(history),
                     .beta_lo = static_cast<double>(lo),
                     .beta_hi = static_cast<double>(hi)};
  sol.grid.reserve(final_run.states.size() + 1);
  sol.grid.push_back({0.0, alpha, 0.0, sol.beta, 0.0});
  for (std::size_t i = 0; i < final_run.states.size(); ++i) {
    sol.grid.push_back(to_state(final_run.radii[i], final_run.states[i]));
  }

  for (std::size_t i = 1; i < sol.grid.size(); ++i) {
    if (!(sol.grid[i].u > 0.0) || !(sol.grid[i].u < sol.grid[i - 1].u)) {
      throw NoConvergence("shoot: solution is not positive and strictly decreasing at r = " +
                          detail::fmt(sol.grid[i].r));
    }
  }
  return sol;
}

RadialSolution scale_solution(const RadialSolution& sol, double new_alpha) {
  if (!(new_alpha > 0.0) || !std::isfinite(new_alpha)) {
    throw std::invalid_argument("scale_solution: requires new_alpha > 0");
  }
  const double k = new_alpha / sol.alpha;
  const double inv_m = 1.0 / sol.params.m();
  const double r_factor = std::pow(k, -inv_m);
  const double du_factor = std::pow(k, 1.0 + inv_m);
  const double v_factor = std::pow(k, 1.0 + 2.0 * inv_m);
  const double dv_factor = std::pow(k, 1.0 + 3.0 * inv_m);

  RadialSolution out = sol;
  out.alpha = new_alpha;
  out.beta = sol.beta * v_factor;
  out.beta_lo = sol.beta_lo * v_factor;
  out.beta_hi = sol.beta_hi * v_factor;
  out.length_scale = sol.length_scale * r_factor;
  for (auto& step : out.history) {
    step.beta *= v_factor;
  }
  for (auto& s : out.grid) {
    s.r *= r_factor;
    s.u *= k;
    s.du *= du_factor;
    s.v *= v_factor;
    s.dv *= dv_factor;
  }
  out.grid.front().u = new_alpha;
  return out;
}

namespace {

struct HermiteSpan {
  const State* a;
  const State* b;
  double t;
  double h;
};

HermiteSpan locate(const RadialSolution& sol, double r, const char* what) {
  if (sol.grid.size() < 2) {
    throw std::invalid_argument(std::string(what) + ": empty solution");
  }
  if (!(r >= 0.0) || r > sol.grid.back().r) {
    throw std::invalid_argument(std::string(what) + ": r = " + detail::fmt(r) + " outside [0, " +
                                detail::fmt(sol.grid.back().r) + "]");
  }
  auto it = std::upper_bound(sol.grid.begin(), sol.grid.end(), r,
                             [](double value, const State& s) { return value < s.r; });
  if (it == sol.grid.end()) {
    --it;
  }
  const State& b = *it;
  const State& a = *(it - 1);
  const double h = b.r - a.r;
  return {&a, &b, (r - a.r) / h, h};
}

}  // namespace

double eval_solution(const RadialSolution& sol, double r) {
  const HermiteSpan s = locate(sol, r, "eval_solution");
  if (r == s.a->r) {
    return s.a->u;
  }
  if (r == s.b->r) {
    return s.b->u;
  }
  const double t = s.t;
  const double t2 = t * t;
  const double t3 = t2 * t;
  return (2 * t3 - 3 * t2 + 1) * s.a->u + (t3 - 2 * t2 + t) * s.h * s.a->du + (-2 * t3 + 3 * t2) * s.b->u +
         (t3 - t2) * s.h * s.b->du;
}

double eval_solution_derivative(const RadialSolution& sol, double r) {
  const HermiteSpan s = locate(sol, r, "eval_solution_derivative");
  if (r == s.a->r) {
    return s.a->du;
  }
  if (r == s.b->r) {
    return s.b->du;
  }
  const double t = s.t;
  const double t2 = t * t;
  return ((6 * t2 - 6 * t) * s.a->u + (-6 * t2 + 6 * t) * s.b->u) / s.h + (3 * t2 - 4 * t + 1) * s.a->du +
         (3 * t2 - 2 * t) * s.b->du;
}

}  // namespace biharm
