// Acceptance suite: one PASS/FAIL line per criterion, timed against its budget.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <string>
#include <vector>

#include "biharm/closedform.hpp"
#include "biharm/emden.hpp"
#include "biharm/quartic.hpp"
#include "biharm/radial_ode.hpp"
#include "biharm/spectral.hpp"

using namespace biharm;

namespace {

struct Outcome {
  bool ok = true;
  std::string note;

  void require(bool cond, const std::string& what) {
    if (!cond && ok) note = what;
    ok = ok && cond;
  }
};

std::string g(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3g", x);
  return buf;
}

double rel(double a, double b) { return std::abs(a - b) / std::abs(b); }

Outcome polynomial_identities() {
  Outcome o;
  for (int n = 5; n <= 20; ++n) {
    const double nn = n;
    o.require(script_q(1.0, n) == -4096.0, "Q(1) at n=" + std::to_string(n));
    o.require(script_q(1.0, n, QForm::Factored) == -4096.0, "factored Q(1) at n=" + std::to_string(n));
    o.require(script_q(0.0, n) == nn * nn * (nn - 4) * (nn - 4), "Q(0) at n=" + std::to_string(n));
    const double at_pn = -32768.0 * nn * nn / std::pow(nn - 4, 3);
    o.require(rel(script_q(sobolev_exponent(n), n), at_pn) <= 1e-12, "Q(p_n) at n=" + std::to_string(n));
    const double at_2nd = 256.0 * nn * nn * (nn - 4) * (nn - 4) / std::pow(nn - 2, 4);
    o.require(rel(script_q((nn + 2) / (nn - 2), n), at_2nd) <= 1e-12, "Q((n+2)/(n-2)) at n=" + std::to_string(n));
    double worst = 0.0;
    for (int i = 0; i < 500; ++i) {
      const double p = 1.01 + i * (60.0 - 1.01) / 499.0;
      const double e = script_q(p, n, QForm::Expanded);
      const double f = script_q(p, n, QForm::Factored);
      const double scale = 16.0 * std::pow(p - 1.0, 4) * (rellich_constant(n) + p * std::abs(q4(4.0 / (p - 1.0), n)));
      worst = std::max(worst, std::abs(e - f) / scale);
    }
    o.require(worst <= 1e-12, "factored vs expanded at n=" + std::to_string(n) + ": " + g(worst));
  }
  if (o.ok) o.note = "n = 5..20";
  return o;
}

Outcome dichotomy() {
  Outcome o;
  for (int n = 5; n <= 12; ++n) {
    o.require(q_limit_coefficient(n) < 0.0, "limit coefficient sign at n=" + std::to_string(n));
    o.require(!p_critical(n).has_value(), "p_c exists at n=" + std::to_string(n));
  }
  for (int n = 13; n <= 20; ++n) {
    o.require(q_limit_coefficient(n) > 0.0, "limit coefficient sign at n=" + std::to_string(n));
    const auto pc = p_critical(n);
    o.require(pc.has_value(), "no p_c at n=" + std::to_string(n));
    if (pc) {
      const double r = std::abs(script_q(*pc, n)) / std::abs(script_q(0.0, n));
      o.require(r <= 1e-9, "|Q(p_c)|/|Q(0)| at n=" + std::to_string(n) + ": " + g(r));
    }
  }
  const double pc13 = p_critical(13).value_or(0.0);
  o.require(pc13 > 20.0 && pc13 < 30.0, "p_c(13) = " + g(pc13));
  if (o.ok) o.note = "p_c(13) = " + std::to_string(pc13);
  return o;
}

double max_abs(const std::array<double, 5>& c) {
  double m = 0.0;
  for (double x : c) m = std::max(m, std::abs(x));
  return m;
}

Outcome root_structure() {
  Outcome o;
  for (auto [n, p] : {std::pair{13, 30.0}, std::pair{15, 10.0}}) {
    const ProblemParams params(n, p);
    const std::string at = " at (" + std::to_string(n) + ", " + g(p) + ")";
    o.require(classify(n, p) == Regime::SupercriticalStable, "regime" + at);
    const RootSet pr = roots_p_polynomial(params);
    o.require(pr.count_negative() == 3 && pr.count_positive() == 1, "P root signs" + at);
    const double two_c = 2.0 * pr.symmetry_center;
    o.require(std::abs(pr.roots[0] + pr.roots[3] - two_c) <= 1e-10 * std::abs(two_c), "P outer symmetry sum" + at);
    o.require(std::abs(pr.roots[1] + pr.roots[2] - two_c) <= 1e-10 * std::abs(two_c), "P inner symmetry sum" + at);
    const auto pc = p_polynomial_coefficients(params);
    for (double x : pr.roots) o.require(std::abs(polyval(pc, x)) <= 1e-8 * max_abs(pc), "P residual" + at);

    const RootSet rr = roots_r_polynomial(params);
    o.require(rr.roots[2] == 0.0, "mu3 != 0" + at);
    o.require(rr.roots[1] == 2.0 * rr.symmetry_center, "mu2 != 2 mu*" + at);
    o.require(rr.symmetry_center == params.m() - (n - 4) / 2.0, "mu*" + at);
    o.require(rr.roots[3] > params.m(), "mu4 <= m" + at);
    const auto rc = r_polynomial_coefficients(params);
    for (double x : rr.roots) o.require(std::abs(polyval(rc, x)) <= 1e-8 * max_abs(rc), "R residual" + at);
  }
  if (o.ok) o.note = "(13, 30) and (15, 10)";
  return o;
}

Outcome critical_oracle() {
  Outcome o;
  const ProblemParams params(5, 9.0);
  const RadialSolution sol = shoot(1.0, params);
  const CriticalSolution bubble = CriticalSolution::from_center_value(5, 1.0);
  const double beta_rel = rel(sol.beta, phi_critical_laplacian_at_zero(bubble));
  o.require(beta_rel <= 1e-6, "beta relative error " + g(beta_rel));
  double worst = 0.0;
  for (int i = 0; i <= 2000; ++i) {
    const double r = 10.0 * i / 2000.0;
    worst = std::max(worst, rel(eval_solution(sol, r), phi_critical(r, bubble)));
  }
  o.require(worst <= 1e-4, "profile sup-norm relative error " + g(worst));
  if (o.ok) o.note = "beta error " + g(beta_rel) + ", profile error " + g(worst);
  return o;
}

double tail(const RadialSolution& sol, double r) {
  const double u = eval_solution(sol, r);
  return r * r * r * r * std::pow(u, sol.params.p() - 1.0);
}

Outcome tail_law() {
  Outcome o;
  const ProblemParams params(13, 30.0);
  const RadialSolution sol = shoot(1.0, params);
  const double target = q4(4.0 / 29.0, 13);
  o.require(sol.r_max() >= 1000.0, "r_max = " + g(sol.r_max()));
  if (!o.ok) return o;
  const double far = std::abs(tail(sol, 1000.0) - target) / target;
  const double mid = std::abs(tail(sol, 500.0) - target) / target;
  o.require(far <= 0.02, "deviation at r = 1000: " + g(far));
  o.require(far < mid, "deviation not decreasing: " + g(mid) + " -> " + g(far));
  if (o.ok) o.note = "deviation " + g(mid) + " at 500, " + g(far) + " at 1000";
  return o;
}

Outcome stability_properties() {
  Outcome o;
  const std::vector<double> alphas = {0.25, 1.0, 4.0, 16.0};
  double min_bound = 1.0;
  for (auto [n, p] : {std::pair{13, 30.0}, std::pair{15, 10.0}}) {
    const ProblemParams params(n, p);
    const std::string at = " at (" + std::to_string(n) + ", " + g(p) + ")";
    std::vector<RadialSolution> sols;
    for (double a : alphas) sols.push_back(shoot(a, params));
    for (const RadialSolution& s : sols) {
      const std::string where = at + " alpha=" + g(s.alpha);
      const EmdenProfile e = to_emden(s);
      const VerificationReport bound = check_bound(e);
      const VerificationReport mono = check_monotone(e);
      const VerificationReport rellich = rellich_pointwise_check(s);
      o.require(bound.applicable && bound.passed, "bound" + where + ": " + bound.detail);
      o.require(mono.applicable && mono.passed, "monotone" + where + ": " + mono.detail);
      o.require(rellich.passed, "Rellich" + where + ": " + rellich.detail);
      min_bound = std::min(min_bound, bound.margin);
    }
    for (std::size_t i = 0; i < sols.size(); ++i) {
      for (std::size_t j = i + 1; j < sols.size(); ++j) {
        const IntersectionReport x = check_intersection(sols[i], sols[j]);
        const std::string pair = at + " alphas " + g(x.alpha) + ", " + g(x.beta);
        o.require(x.sign_changes == 0, "intersections" + pair);
        o.require(x.ordered && x.min_gap > 0.0, "ordering" + pair);
        // Larger alpha lies above at the sampled radii.
        const double r = 0.5 * x.common_r_max;
        o.require(eval_solution(sols[j], r) > eval_solution(sols[i], r), "order by alpha" + pair);
      }
    }
  }
  if (o.ok) o.note = "smallest bound margin " + g(min_bound);
  return o;
}

Outcome scaling() {
  Outcome o;
  const ProblemParams params(13, 30.0);
  const RadialSolution one = shoot(1.0, params);
  const RadialSolution sixteen = shoot(16.0, params);
  const double ratio = sixteen.beta / one.beta;
  const double expected = std::pow(16.0, (params.p() + 1.0) / 2.0);
  const double beta_err = rel(ratio, expected);
  o.require(beta_err <= 1e-4, "beta ratio error " + g(beta_err));
  const double k = std::pow(16.0, 1.0 / params.m());
  double worst = 0.0;
  for (const State& s : sixteen.grid) {
    const double r1 = k * s.r;
    if (r1 > one.r_max()) break;
    worst = std::max(worst, rel(s.u, 16.0 * eval_solution(one, r1)));
  }
  o.require(worst <= 1e-4, "profile scaling error " + g(worst));
  if (o.ok) o.note = "beta ratio error " + g(beta_err) + ", profile " + g(worst);
  return o;
}

Outcome instability_energy() {
  Outcome o;
  double worst = 0.0;
  for (int n : {5, 6, 7}) {
    const ProblemParams params(n, sobolev_exponent(n));
    for (double lambda : {0.5, 1.0, 2.0}) {
      const EnergyReport e = energy(TestFunction(n, CriticalZeta{lambda}), critical_potential(CriticalSolution(n, lambda)),
                                    params);
      const double closed = instability_energy_closed_form(n, lambda);
      const std::string at = " at n=" + std::to_string(n) + " lambda=" + g(lambda);
      const double gap = rel(e.energy, closed);
      o.require(e.energy < 0.0, "energy not negative" + at);
      o.require(gap <= 1e-3, "gap " + g(gap) + at);
      worst = std::max(worst, gap);
    }
  }
  if (o.ok) o.note = "largest gap " + g(worst);
  return o;
}

Outcome instability_probe_criterion() {
  Outcome o;
  const ProbeResult unstable = instability_probe(shoot(1.0, ProblemParams(13, 2.0)));
  o.require(unstable.hit.has_value(), "no negative direction at (13, 2)");
  if (unstable.hit) {
    o.require(unstable.hit->report.energy < 0.0, "hit energy not negative");
    o.require(std::holds_alternative<HardyProfile>(unstable.hit->test.kind()), "hit is not a Hardy profile");
  }
  const RadialSolution stable = shoot(1.0, ProblemParams(13, 30.0));
  o.require(!instability_probe(stable).hit.has_value(), "negative direction found at (13, 30)");
  o.require(rellich_pointwise_check(stable).passed, "Rellich check fails at (13, 30)");
  if (o.ok && unstable.hit) o.note = "energy at (13, 2): " + g(unstable.hit->report.energy);
  return o;
}

Outcome emden_residual() {
  Outcome o;
  double worst = 0.0;
  for (auto [n, p] : {std::pair{13, 30.0}, std::pair{15, 10.0}, std::pair{13, 2.0}}) {
    for (double alpha : {1.0, 16.0}) {
      const RadialSolution sol = shoot(alpha, ProblemParams(n, p));
      const double r = emden_ode_residual(to_emden(sol), sol);
      o.require(r <= 1e-6, "residual " + g(r) + " at (" + std::to_string(n) + ", " + g(p) + ")");
      worst = std::max(worst, r);
    }
  }
  for (auto [n, p] : {std::pair{13, 30.0}, std::pair{15, 10.0}, std::pair{6, 7.0}}) {
    const ProblemParams params(n, p);
    const EmdenProfile e = singular_emden_profile(params, -8.0, 8.0, 200);
    for (const auto& x : e.samples) {
      o.require(std::abs(x.W - e.limit_amplitude) <= 1e-13 * e.limit_amplitude, "singular profile is not constant");
      o.require(std::abs(x.dW) <= 1e-13 * e.limit_amplitude, "singular profile slope");
    }
    const double fixed = emden_ode_residual(SingularSolution(params));
    o.require(fixed <= 1e-14, "fixed-point residual " + g(fixed));
  }
  if (o.ok) o.note = "largest residual " + g(worst);
  return o;
}

struct Criterion {
  const char* name;
  double budget_s;
  std::function<Outcome()> run;
};

}  // namespace

int main() {
  const std::vector<Criterion> criteria = {
      {"polynomial identities", 1.0, polynomial_identities},
      {"dichotomy", 1.0, dichotomy},
      {"root structure", 1.0, root_structure},
      {"closed-form oracle for the solver", 30.0, critical_oracle},
      {"tail law", 60.0, tail_law},
      {"stability properties", 120.0, stability_properties},
      {"scaling", 60.0, scaling},
      {"instability energy", 10.0, instability_energy},
      {"instability probe", 120.0, instability_probe_criterion},
      {"Emden residual", 30.0, emden_residual},
  };
  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const Criterion& c = criteria[i];
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o.ok = false;
      o.note = std::string("exception: ") + e.what();
    }
    const double dt = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (o.ok && dt > c.budget_s) {
      o.ok = false;
      o.note = "over the " + g(c.budget_s) + " s budget";
    }
    failures += o.ok ? 0 : 1;
    std::printf("%s  %2zu. %-36s %8.3f s / %g s  %s\n", o.ok ? "PASS" : "FAIL", i + 1, c.name, dt, c.budget_s,
                o.note.c_str());
    std::fflush(stdout);
  }
  std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failures, criteria.size());
  return failures == 0 ? 0 : 1;
}
