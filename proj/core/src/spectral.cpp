#include "biharm/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <future>
#include <limits>
#include <memory>
#include <numbers>
#include <stdexcept>
#include <string>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "format.hpp"

namespace biharm {

namespace {

// Quintic smoothstep 6t^5 - 15t^4 + 10t^3 and its first two derivatives.
struct Step {
  double s, ds, d2s;
};

Step smoothstep(double t) {
  if (t <= 0.0) return {0.0, 0.0, 0.0};
  if (t >= 1.0) return {1.0, 0.0, 0.0};
  const double t2 = t * t;
  return {t2 * t * (10.0 + t * (-15.0 + 6.0 * t)), 30.0 * t2 * (1.0 - t) * (1.0 - t), 60.0 * t * (1.0 - t) * (1.0 - 2.0 * t)};
}

// chi(r) with chi', chi'' for the Hardy cutoff.
Step hardy_cutoff(double r, const HardyProfile& h) {
  const double ln10 = std::numbers::ln10;
  const double dt = 1.0 / (r * ln10);
  const double d2t = -1.0 / (r * r * ln10);
  if (r < h.inner_cut) {
    const Step a = smoothstep(std::log10(r / h.inner_cut) + 1.0);
    return {a.s, a.ds * dt, a.d2s * dt * dt + a.ds * d2t};
  }
  if (r > h.outer_cut) {
    const Step b = smoothstep(1.0 - std::log10(r / h.outer_cut));
    return {b.s, -b.ds * dt, b.d2s * dt * dt - b.ds * d2t};
  }
  return {1.0, 0.0, 0.0};
}

template <int Points, class F>
double gk(F f, double a, double b, const QuadratureOptions& o, double& err, double& l1) {
  double e = 0.0;
  double l = 0.0;
  const double v = boost::math::quadrature::gauss_kronrod<double, Points>::integrate(
      f, a, b, static_cast<unsigned>(o.max_depth), o.tolerance, &e, &l);
  err += e;
  l1 += l;
  return v;
}

template <class F>
double integrate_segment(F f, double a, double b, const QuadratureOptions& o, double& err, double& l1) {
  switch (o.points) {
    case 15:
      return gk<15>(f, a, b, o, err, l1);
    case 31:
      return gk<31>(f, a, b, o, err, l1);
    case 41:
      return gk<41>(f, a, b, o, err, l1);
    case 51:
      return gk<51>(f, a, b, o, err, l1);
    case 61:
      return gk<61>(f, a, b, o, err, l1);
    default:
      throw std::invalid_argument("energy: unsupported Gauss-Kronrod order " + std::to_string(o.points));
  }
}

// int_0^inf g(r) dr, with finite panels split per decade and integrated in
// log r; an infinite last breakpoint becomes one panel on [b, inf).
template <class G>
double radial_integral(G g, const std::vector<double>& cuts, const QuadratureOptions& o, double& err, double& l1) {
  double total = 0.0;
  for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
    const double a = cuts[i];
    const double b = cuts[i + 1];
    if (std::isinf(b)) {
      total += integrate_segment(g, a, b, o, err, l1);
    } else if (a == 0.0) {
      total += integrate_segment(g, a, b, o, err, l1);
    } else {
      double left = std::log(a);
      const double right = std::log(b);
      const double decade = std::numbers::ln10;
      auto in_log = [&g](double t) {
        const double r = std::exp(t);
        return g(r) * r;
      };
      while (left < right) {
        const double next = std::min(right, left + decade);
        total += integrate_segment(in_log, left, next, o, err, l1);
        left = next;
      }
    }
  }
  return total;
}

}  // namespace

TestFunction::TestFunction(int n, Kind kind) : n_(n), kind_(std::move(kind)) {
  if (n < 5) {
    throw std::invalid_argument("TestFunction: requires n >= 5");
  }
  if (const auto* z = std::get_if<CriticalZeta>(&kind_)) {
    if (!(z->lambda > 0.0)) {
      throw std::invalid_argument("TestFunction: CriticalZeta requires lambda > 0");
    }
  } else {
    const auto& h = std::get<HardyProfile>(kind_);
    if (!(h.inner_cut > 0.0) || !(h.outer_cut > h.inner_cut) || !std::isfinite(h.outer_cut) ||
        !std::isfinite(h.sigma)) {
      throw std::invalid_argument("TestFunction: HardyProfile requires 0 < inner_cut < outer_cut");
    }
  }
}

double TestFunction::value(double r) const {
  if (const auto* z = std::get_if<CriticalZeta>(&kind_)) {
    return std::pow(z->lambda * z->lambda + r * r, -0.5 * (n_ - 2));
  }
  const auto& h = std::get<HardyProfile>(kind_);
  if (r <= h.inner_cut / 10.0 || r >= 10.0 * h.outer_cut) {
    return 0.0;
  }
  return std::pow(r, -h.sigma) * hardy_cutoff(r, h).s;
}

double TestFunction::laplacian(double r) const {
  const double nm1 = n_ - 1.0;
  if (const auto* z = std::get_if<CriticalZeta>(&kind_)) {
    const double g = z->lambda * z->lambda + r * r;
    return -(n_ - 2.0) * n_ * z->lambda * z->lambda * std::pow(g, -0.5 * n_ - 1.0);
  }
  const auto& h = std::get<HardyProfile>(kind_);
  if (r <= h.inner_cut / 10.0 || r >= 10.0 * h.outer_cut) {
    return 0.0;
  }
  const double f = std::pow(r, -h.sigma);
  const double df = -h.sigma * f / r;
  const double d2f = h.sigma * (h.sigma + 1.0) * f / (r * r);
  const Step c = hardy_cutoff(r, h);
  const double dz = df * c.s + f * c.ds;
  const double d2z = d2f * c.s + 2.0 * df * c.ds + f * c.d2s;
  return d2z + nm1 * dz / r;
}

std::vector<double> TestFunction::breakpoints() const {
  if (const auto* z = std::get_if<CriticalZeta>(&kind_)) {
    return {0.0, z->lambda, 1e3 * z->lambda, std::numeric_limits<double>::infinity()};
  }
  const auto& h = std::get<HardyProfile>(kind_);
  return {h.inner_cut / 10.0, h.inner_cut, h.outer_cut, 10.0 * h.outer_cut};
}

RadialPotential critical_potential(const CriticalSolution& sol) {
  const int n = sol.n();
  const double lambda = sol.lambda();
  const double p = sol.p();
  // C^(p-1) = (n-4)(n-2)n(n+2) and (lambda / g)^((n-4)/2 (p-1)) = (lambda / g)^4.
  const double c = p * (n - 4.0) * (n - 2.0) * n * (n + 2.0);
  return {[c, lambda](double r) {
            const double q = lambda / (lambda * lambda + r * r);
            const double q2 = q * q;
            return c * q2 * q2;
          },
          {}};
}

RadialPotential solution_potential(const RadialSolution& sol) {
  auto shared = std::make_shared<const RadialSolution>(sol);
  const double p = sol.params.p();
  const int n = sol.params.n();
  const double r_max = sol.r_max();
  const Regime regime = classify(n, p);
  const bool critical = regime == Regime::CriticalSobolev;
  const double tail = critical ? 0.0 : p * q4(sol.params.m(), n);
  const double u_end = sol.grid.back().u;
  auto value = [shared, p, n, r_max, critical, tail, u_end](double r) {
    if (r <= r_max) {
      const double u = eval_solution(*shared, r);
      return u > 0.0 ? p * std::pow(u, p - 1.0) : 0.0;
    }
    if (critical) {
      const double u = u_end * std::pow(r_max / r, n - 4.0);
      return p * std::pow(u, p - 1.0);
    }
    const double r2 = r * r;
    return tail / (r2 * r2);
  };
  return {value, {r_max}};
}

EnergyReport energy(const TestFunction& test, const RadialPotential& potential, const ProblemParams& params,
                    const QuadratureOptions& options) {
  if (test.n() != params.n()) {
    throw std::invalid_argument("energy: test function and problem have different n");
  }
  const int n = params.n();
  const double area = unit_sphere_area(n);
  std::vector<double> cuts = test.breakpoints();
  for (double b : potential.breakpoints) {
    if (b > cuts.front() && b < cuts.back()) {
      cuts.push_back(b);
    }
  }
  std::sort(cuts.begin(), cuts.end());
  cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());

  double err_b = 0.0, l1_b = 0.0, err_v = 0.0, l1_v = 0.0;
  auto bilap = [&](double r) {
    const double d = test.laplacian(r);
    return d * d * std::pow(r, n - 1.0);
  };
  auto pot = [&](double r) {
    const double z = test.value(r);
    return z == 0.0 ? 0.0 : potential(r) * z * z * std::pow(r, n - 1.0);
  };
  EnergyReport rep;
  rep.bilaplacian_term = area * radial_integral(bilap, cuts, options, err_b, l1_b);
  rep.potential_term = area * radial_integral(pot, cuts, options, err_v, l1_v);
  rep.energy = rep.bilaplacian_term - rep.potential_term;
  const double floor = 64.0 * std::numeric_limits<double>::epsilon() * area * (l1_b + l1_v);
  rep.quadrature_error_estimate = area * (err_b + err_v) + floor;
  rep.converged = std::isfinite(rep.energy) &&
                  area * (err_b + err_v) <= std::max(1e3 * options.tolerance * area * (l1_b + l1_v), floor);
  return rep;
}

VerificationReport rellich_pointwise_check(const RadialSolution& sol) {
  const ProblemParams& params = sol.params;
  const double p = params.p();
  const double rellich = rellich_constant(params.n());
  double worst = 0.0;
  double worst_r = 0.0;
  for (const State& st : sol.grid) {
    if (!(st.r > 0.0) || !(st.u > 0.0)) {
      continue;
    }
    const double r2 = st.r * st.r;
    const double value = p * r2 * r2 * std::pow(st.u, p - 1.0);
    if (value > worst) {
      worst = value;
      worst_r = st.r;
    }
  }
  VerificationReport rep;
  rep.name = "rellich";
  rep.applicable = classify(params.n(), p) == Regime::SupercriticalStable;
  rep.passed = worst <= rellich * (1.0 + 1e-9);
  rep.margin = 1.0 - worst / rellich;
  rep.detail = "max p r^4 u^(p-1) = " + detail::fmt(worst) + " at r = " + detail::fmt(worst_r) +
               " vs n^2(n-4)^2/16 = " + detail::fmt(rellich);
  if (!rep.applicable) {
    rep.detail = "no theorem applies (" + std::string(to_string(classify(params.n(), p))) + "); " + rep.detail;
  }
  return rep;
}

ProbeResult instability_probe(const RadialSolution& sol, const ProbeGrid& grid, const QuadratureOptions& options) {
  const ProblemParams& params = sol.params;
  const int n = params.n();
  const double scale = sol.length_scale;

  std::vector<TestFunction> tests;
  if (grid.include_critical_zeta && classify(n, params.p()) == Regime::CriticalSobolev) {
    tests.emplace_back(n, CriticalZeta{CriticalSolution::from_center_value(n, sol.alpha).lambda()});
  }
  std::vector<double> sigmas = grid.sigmas;
  if (sigmas.empty()) {
    const double hardy = 0.5 * (n - 4.0);
    sigmas = {0.9 * hardy, hardy, 1.1 * hardy};
  }
  for (double sigma : sigmas) {
    for (double inner : grid.inner_cuts) {
      for (double ratio : grid.ratios) {
        tests.emplace_back(n, HardyProfile{sigma, inner * scale, inner * ratio * scale});
      }
    }
  }

  const RadialPotential potential = solution_potential(sol);
  std::vector<std::future<EnergyReport>> jobs;
  jobs.reserve(tests.size());
  for (const auto& t : tests) {
    jobs.push_back(std::async(std::launch::async, [&t, &potential, &params, &options] {
      return energy(t, potential, params, options);
    }));
  }
  ProbeResult out;
  for (std::size_t i = 0; i < jobs.size(); ++i) {
    EnergyReport rep = jobs[i].get();
    ++out.evaluated;
    if (!out.hit && rep.converged && rep.energy < 0.0) {
      out.hit = ProbeHit{tests[i], rep};
    }
  }
  return out;
}

}  // namespace biharm
