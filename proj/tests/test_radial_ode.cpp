#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "biharm/closedform.hpp"
#include "biharm/errors.hpp"
#include "biharm/radial_ode.hpp"
#include "support.hpp"

using namespace biharm;
using biharm::testing::rel_diff;
using biharm::testing::solved;

namespace {

const ProblemParams kCritical5(5, 9.0);
const ProblemParams kStable(13, 30.0);

// (alpha, beta) of the n = 5 bubble with center value 1.
std::pair<double, double> critical_data() {
  const CriticalSolution bubble = CriticalSolution::from_center_value(5, 1.0);
  return {phi_critical(0.0, bubble), phi_critical_laplacian_at_zero(bubble)};
}

RadialSolution with_grid(const RadialSolution& like, std::vector<State> grid) {
  RadialSolution out = like;
  grid.insert(grid.begin(), State{0.0, like.alpha, 0.0, like.beta, 0.0});
  out.grid = std::move(grid);
  return out;
}

}  // namespace

TEST_CASE("rhs along the singular solution") {
  for (const ProblemParams& params : {kStable, ProblemParams(15, 10.0)}) {
    const SingularSolution sing(params);
    for (double r = 1e-2; r < 1e3; r *= 2.3) {
      const RadialJet j = phi_singular_jet(r, sing);
      const StateRate f = rhs({r, j.u, j.du, j.v, j.dv}, params);
      CHECK(f.du == j.du);
      CHECK(f.d2u == doctest::Approx(j.d2u).epsilon(1e-12));
      CHECK(f.dv == j.dv);
      CHECK(f.d2v == doctest::Approx(j.d2v).epsilon(1e-12));
    }
  }
}

TEST_CASE("rhs along the critical bubble") {
  const CriticalSolution bubble(5, 1.0);
  for (double r = 1e-2; r < 1e2; r *= 1.7) {
    const RadialJet j = phi_critical_jet(r, bubble);
    const StateRate f = rhs({r, j.u, j.du, j.v, j.dv}, kCritical5);
    CHECK(std::abs(f.d2u - j.d2u) <= 1e-8 * std::max(std::abs(j.d2u), std::abs(j.v)));
    CHECK(std::abs(f.d2v - j.d2v) <= 1e-8 * std::max(std::abs(j.d2v), std::pow(j.u, 9.0)));
  }
}

TEST_CASE("rhs at a flat state") {
  const State s{1e12, 0.7, 0.0, -0.2, 0.0};
  const StateRate f = rhs(s, kStable);
  CHECK(f.d2u == -0.2);
  CHECK(f.d2v == doctest::Approx(std::pow(0.7, 30.0)).epsilon(1e-15));
  CHECK_THROWS_AS(rhs({0.0, 1.0, 0.0, 0.0, 0.0}, kStable), std::invalid_argument);
}

TEST_CASE("taylor_start leading order") {
  const double alpha = 1.3, beta = -0.7;
  for (double r : {1e-2, 1e-3, 1e-4}) {
    const State s = taylor_start(alpha, beta, kStable, r);
    CHECK((s.u - alpha) / (r * r) == doctest::Approx(beta / (2 * 13)).epsilon(10 * r * r));
    CHECK((s.v - beta) / (r * r) == doctest::Approx(std::pow(alpha, 30.0) / (2 * 13)).epsilon(10 * r * r));
  }
  const State origin = taylor_start(alpha, beta, kStable, 0.0);
  CHECK(origin.u == alpha);
  CHECK(origin.v == beta);
  CHECK(origin.du == 0.0);
  CHECK(origin.dv == 0.0);
}

TEST_CASE("taylor_start self-convergence") {
  // Series at r0 against the series at r0/2 carried to r0 by the integrator.
  auto [alpha, beta] = critical_data();
  auto error_at = [&, a = alpha, b = beta](double r0) {
    ShootingConfig c;
    c.r_start = r0 / 2;
    c.r_max = r0;
    const Trajectory t = integrate(a, b, kCritical5, c);
    REQUIRE(t.cls.kind == TrajectoryKind::Resolved);
    const State& end = t.grid.back();
    REQUIRE(end.r == doctest::Approx(r0).epsilon(1e-15));
    const State series = taylor_start(a, b, kCritical5, r0);
    return std::abs(series.u - end.u) + std::abs(series.v - end.v);
  };
  const double e1 = error_at(0.4);
  const double e2 = error_at(0.2);
  CHECK(e2 > 0.0);
  CHECK(e1 / e2 >= 32.0);
}

TEST_CASE("taylor_start matches the critical bubble") {
  auto [alpha, beta] = critical_data();
  const CriticalSolution bubble = CriticalSolution::from_center_value(5, 1.0);
  const State s = taylor_start(alpha, beta, kCritical5, 1e-3);
  const RadialJet j = phi_critical_jet(1e-3, bubble);
  CHECK(std::abs(s.u - j.u) <= 1e-10);
  CHECK(std::abs(s.du - j.du) <= 1e-10);
  CHECK(std::abs(s.v - j.v) <= 1e-10);
  CHECK(std::abs(s.dv - j.dv) <= 1e-10);
}

TEST_CASE("integrate classifies the two sides") {
  const Trajectory up = integrate(1.0, 0.0, kStable, {});
  CHECK(up.cls.kind == TrajectoryKind::Diverged);
  CHECK(up.cls.r_event > 0.0);

  const double rmax = default_r_max(kStable);
  const Trajectory down = integrate(1.0, -rmax * rmax, kStable, {});
  CHECK(down.cls.kind == TrajectoryKind::CrossedZero);
  for (const State& s : down.grid) CHECK(s.u > 0.0);

  CHECK(integrate(1.0, 0.0, kCritical5, {}).cls.kind == TrajectoryKind::Diverged);
  CHECK(integrate(1.0, -1e4, kCritical5, {}).cls.kind == TrajectoryKind::CrossedZero);
}

TEST_CASE("integrate from the closed-form beta follows the bubble") {
  auto [alpha, beta] = critical_data();
  const CriticalSolution bubble = CriticalSolution::from_center_value(5, 1.0);
  ShootingConfig c;
  c.r_max = 10.0 / std::pow(alpha, -1.0 / kCritical5.m());
  const Trajectory t = integrate(alpha, beta, kCritical5, c);
  CHECK(t.cls.kind == TrajectoryKind::Resolved);
  double worst = 0.0;
  for (const State& s : t.grid) worst = std::max(worst, rel_diff(s.u, phi_critical(s.r, bubble)));
  CHECK(worst <= 1e-4);
  CHECK(t.grid.back().r == doctest::Approx(10.0));
}

TEST_CASE("shoot recovers the critical bubble") {
  const RadialSolution& sol = solved(5, 9.0, 1.0);
  const CriticalSolution bubble = CriticalSolution::from_center_value(5, 1.0);
  CHECK(bubble.lambda() == doctest::Approx(std::pow(105.0, 0.25)).epsilon(1e-15));
  // 20-digit evaluation of the closed form.
  CHECK(sol.beta == doctest::Approx(-0.48795003647426658968).epsilon(1e-6));
  CHECK(sol.beta == doctest::Approx(phi_critical_laplacian_at_zero(bubble)).epsilon(1e-6));
  double worst = 0.0;
  for (double r = 0.0; r <= 10.0; r += 0.01) {
    worst = std::max(worst, rel_diff(eval_solution(sol, r), phi_critical(r, bubble)));
  }
  CHECK(worst <= 1e-4);
}

TEST_CASE("shoot tail law in the stable regime") {
  const RadialSolution& sol = solved(13, 30.0, 1.0);
  const double q = q4(4.0 / 29.0, 13);
  CHECK(sol.r_max() == doctest::Approx(1e3));
  auto deviation = [&](double r) {
    const double u = eval_solution(sol, r);
    return std::abs(r * r * r * r * std::pow(u, 29.0) - q) / q;
  };
  CHECK(deviation(1e3) <= 0.02);
  CHECK(deviation(1e3) < deviation(500.0));
  const double w0 = kStable.limit_amplitude();
  auto w_dev = [&](double r) { return std::abs(std::pow(r, kStable.m()) * eval_solution(sol, r) - w0) / w0; };
  CHECK(w_dev(sol.r_max()) <= 0.02);
  CHECK(w_dev(sol.r_max()) < w_dev(sol.r_max() / 2));
}

TEST_CASE("beta scales as alpha^((p+1)/2)") {
  const RadialSolution& one = solved(13, 30.0, 1.0);
  const RadialSolution& sixteen = solved(13, 30.0, 16.0);
  CHECK(sixteen.beta / one.beta == doctest::Approx(std::pow(16.0, 15.5)).epsilon(1e-4));
  CHECK(one.beta < 0.0);
  CHECK(sixteen.beta < 0.0);
}

TEST_CASE("scale_solution") {
  const RadialSolution& one = solved(13, 30.0, 1.0);
  const RadialSolution same = scale_solution(one, 1.0);
  CHECK(same.beta == one.beta);
  REQUIRE(same.grid.size() == one.grid.size());
  for (std::size_t i = 0; i < one.grid.size(); ++i) {
    CHECK(same.grid[i].r == one.grid[i].r);
    CHECK(same.grid[i].u == one.grid[i].u);
  }

  const RadialSolution& direct = solved(13, 30.0, 16.0);
  const RadialSolution scaled = scale_solution(one, 16.0);
  CHECK(scaled.alpha == 16.0);
  const double r_common = std::min(direct.r_max(), scaled.r_max());
  double worst = 0.0;
  for (const State& s : direct.grid) {
    if (s.r > r_common) break;
    worst = std::max(worst, rel_diff(s.u, eval_solution(scaled, s.r)));
  }
  CHECK(worst <= 1e-4);

  const RadialSolution ab = scale_solution(scale_solution(one, 4.0), 16.0);
  const RadialSolution direct_ab = scale_solution(one, 16.0);
  for (std::size_t i = 0; i < ab.grid.size(); i += 7) {
    CHECK(ab.grid[i].r == doctest::Approx(direct_ab.grid[i].r).epsilon(1e-13));
    CHECK(ab.grid[i].u == doctest::Approx(direct_ab.grid[i].u).epsilon(1e-13));
    CHECK(ab.grid[i].v == doctest::Approx(direct_ab.grid[i].v).epsilon(1e-13));
  }
  CHECK_THROWS_AS(scale_solution(one, 0.0), std::invalid_argument);
}

TEST_CASE("eval_solution") {
  const RadialSolution& sol = solved(13, 30.0, 1.0);
  CHECK(eval_solution(sol, 0.0) == sol.alpha);
  for (std::size_t i = 0; i < sol.grid.size(); i += 5) {
    CHECK(eval_solution(sol, sol.grid[i].r) == sol.grid[i].u);
    CHECK(eval_solution_derivative(sol, sol.grid[i].r) == doctest::Approx(sol.grid[i].du).epsilon(1e-12));
  }
  CHECK_THROWS_AS(eval_solution(sol, -1.0), std::invalid_argument);
  CHECK_THROWS_AS(eval_solution(sol, 2 * sol.r_max()), std::invalid_argument);
}

TEST_CASE("eval_solution between nodes against a refined integration") {
  const RadialSolution& sol = solved(13, 30.0, 1.0);
  ShootingConfig fine = sol.config;
  fine.rel_tol = 1e-15;
  fine.abs_tol = 1e-18;
  fine.r_max = 10.0;
  const Trajectory t = integrate(sol.alpha, sol.beta, sol.params, fine);
  REQUIRE(t.cls.kind == TrajectoryKind::Resolved);
  const RadialSolution refined = with_grid(sol, t.grid);
  REQUIRE(refined.grid.size() > sol.grid.size() / 4);
  double worst = 0.0;
  for (std::size_t i = 1; i + 1 < sol.grid.size() && sol.grid[i + 1].r <= 10.0; ++i) {
    const double mid = 0.5 * (sol.grid[i].r + sol.grid[i + 1].r);
    worst = std::max(worst, rel_diff(eval_solution(sol, mid), eval_solution(refined, mid)));
  }
  CHECK(worst <= 1e-6);
}

TEST_CASE("solutions are positive, decreasing and resolved to tolerance") {
  for (auto [n, p, alpha] : {std::tuple{13, 30.0, 1.0}, std::tuple{15, 10.0, 1.0}, std::tuple{5, 9.0, 1.0},
                             std::tuple{13, 2.0, 1.0}}) {
    const RadialSolution& sol = solved(n, p, alpha);
    INFO("n = " << n << ", p = " << p);
    CHECK(sol.grid.front().r == 0.0);
    CHECK(sol.grid.front().u == alpha);
    CHECK(sol.residual <= 10.0);
    CHECK(sol.beta < 0.0);
    CHECK(sol.beta_lo <= sol.beta);
    CHECK(sol.beta <= sol.beta_hi);
    bool ok = true;
    for (std::size_t i = 1; i < sol.grid.size(); ++i) {
      ok = ok && sol.grid[i].u > 0.0 && sol.grid[i].u < sol.grid[i - 1].u && sol.grid[i].r > sol.grid[i - 1].r;
    }
    CHECK(ok);
  }
}

TEST_CASE("bisection is monotone across the final bracket") {
  for (auto [n, p] : {std::pair{13, 30.0}, std::pair{5, 9.0}}) {
    const RadialSolution& sol = solved(n, p, 1.0);
    REQUIRE(sol.history.size() >= 5);
    const auto last = std::vector<BisectionStep>(sol.history.end() - 5, sol.history.end());
    double max_low = -INFINITY, min_high = INFINITY;
    for (const BisectionStep& s : last) {
      if (s.kind == TrajectoryKind::CrossedZero) CHECK(s.side == BracketSide::Low);
      if (s.kind == TrajectoryKind::Diverged) CHECK(s.side == BracketSide::High);
      if (s.side == BracketSide::Low) max_low = std::max(max_low, s.beta);
      if (s.side == BracketSide::High) min_high = std::min(min_high, s.beta);
    }
    CHECK(max_low <= min_high);
    CHECK(sol.beta_lo <= sol.beta_hi);
  }
}

TEST_CASE("global error is proportional to the tolerance") {
  const RadialSolution& sol = solved(13, 30.0, 1.0);
  auto end_value = [&](double tol) {
    ShootingConfig c = sol.config;
    c.rel_tol = tol;
    c.abs_tol = tol * 1e-3;
    c.r_max = 20.0;
    const Trajectory t = integrate(sol.alpha, sol.beta, sol.params, c);
    REQUIRE(t.cls.kind == TrajectoryKind::Resolved);
    return t.grid.back().u;
  };
  const double reference = end_value(1e-15);
  double last = INFINITY;
  for (double tol : {1e-6, 1e-7, 1e-8, 1e-9}) {
    const double err = std::abs(end_value(tol) - reference);
    INFO("tol = " << tol << ", err = " << err);
    CHECK(err < last);
    // Tolerance proportionality of a fifth-order pair with local error control:
    // one decade of tolerance buys between a quarter and two decades of accuracy.
    if (std::isfinite(last)) {
      const double gain = std::log10(last / err);
      CHECK(gain >= 0.25);
      CHECK(gain <= 2.0);
    }
    last = err;
  }
}

TEST_CASE("shoot argument and regime errors") {
  CHECK_THROWS_AS(shoot(1.0, ProblemParams(13, 1.5)), RegimeError);
  CHECK_THROWS_AS(shoot(0.0, kStable), std::invalid_argument);
  ShootingConfig tight;
  tight.max_bisections = 3;
  CHECK_THROWS_AS(shoot(1.0, kStable, tight), NoConvergence);
  ShootingConfig bad;
  bad.rel_tol = -1.0;
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
  bad = {};
  bad.growth_factor = 1.0;
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
}

TEST_CASE("default horizon") {
  CHECK(default_r_max(kCritical5) == 100.0);
  CHECK(default_r_max(kStable) == 1000.0);
  CHECK(default_r_max(ProblemParams(15, 10.0)) == 1000.0);
}
