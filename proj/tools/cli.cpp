#include "cli.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <condition_variable>
#include <cstdio>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <mutex>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <thread>

#include <CLI11.hpp>
#include <json.hpp>

#include "biharm/closedform.hpp"
#include "biharm/emden.hpp"
#include "biharm/errors.hpp"
#include "biharm/quartic.hpp"
#include "biharm/radial_ode.hpp"
#include "biharm/spectral.hpp"
#include "biharm/verification.hpp"

#ifndef BIHARM_TOOL_VERSION
#define BIHARM_TOOL_VERSION "0.0.0"
#endif

namespace biharm::cli {

namespace {

using json = nlohmann::ordered_json;
namespace fs = std::filesystem;

constexpr double kEmdenResidualLimit = 1e-6;
constexpr double kEnergyGapLimit = 1e-3;
constexpr const char* kNoPc = "—";

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::string num(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

std::string csv_num(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.16e", x);
  return buf;
}

std::string short_num(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", x);
  return buf;
}

// Left-justifies to width display columns; UTF-8 continuation bytes take none.
std::string pad(const std::string& s, std::size_t width) {
  const auto cols = static_cast<std::size_t>(
      std::count_if(s.begin(), s.end(), [](char c) { return (static_cast<unsigned char>(c) & 0xC0) != 0x80; }));
  return cols >= width ? s : s + std::string(width - cols, ' ');
}

json finite_or_null(double x) { return std::isfinite(x) ? json(x) : json(nullptr); }

std::string timestamp() {
  std::time_t t = std::time(nullptr);
  if (const char* epoch = std::getenv("SOURCE_DATE_EPOCH")) {
    t = static_cast<std::time_t>(std::strtoll(epoch, nullptr, 10));
  }
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

// Values settable by flag or config file; unset means the library default.
struct Settings {
  std::optional<double> r_start, r_max, rel_tol, abs_tol, beta_tol, growth_factor, critical_continuation;
  std::optional<double> quad_tolerance;
  std::optional<int> max_bisections, quad_points, jobs;
};

struct Common {
  bool json = false;
  bool csv = false;
  bool quiet = false;
  std::string out_dir;
  std::string config_path;
};

class UsageError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class VerificationFailed : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

void apply_config(Settings& s, const std::map<std::string, std::string>& file) {
  for (const auto& [key, value] : file) {
    auto set_real = [&](std::optional<double>& slot) {
      if (!slot) slot = parse_number(value);
    };
    auto set_int = [&](std::optional<int>& slot) {
      if (!slot) slot = static_cast<int>(parse_number(value));
    };
    if (key == "r_start") set_real(s.r_start);
    else if (key == "r_max") set_real(s.r_max);
    else if (key == "rel_tol") set_real(s.rel_tol);
    else if (key == "abs_tol") set_real(s.abs_tol);
    else if (key == "beta_tol") set_real(s.beta_tol);
    else if (key == "growth_factor") set_real(s.growth_factor);
    else if (key == "critical_continuation") set_real(s.critical_continuation);
    else if (key == "max_bisections") set_int(s.max_bisections);
    else if (key == "quad_points") set_int(s.quad_points);
    else if (key == "quad_tolerance") set_real(s.quad_tolerance);
    else if (key == "jobs") set_int(s.jobs);
    else throw UsageError("config: unknown key '" + key + "'");
  }
}

ShootingConfig shooting_config(const Settings& s) {
  ShootingConfig c;
  if (s.r_start) c.r_start = *s.r_start;
  if (s.r_max) c.r_max = *s.r_max;
  if (s.rel_tol) c.rel_tol = *s.rel_tol;
  if (s.abs_tol) c.abs_tol = *s.abs_tol;
  if (s.beta_tol) c.beta_tol = *s.beta_tol;
  if (s.growth_factor) c.growth_factor = *s.growth_factor;
  if (s.critical_continuation) c.critical_continuation = *s.critical_continuation;
  if (s.max_bisections) c.max_bisections = *s.max_bisections;
  c.validate();
  return c;
}

QuadratureOptions quadrature_options(const Settings& s) {
  QuadratureOptions q;
  if (s.quad_points) q.points = *s.quad_points;
  if (s.quad_tolerance) q.tolerance = *s.quad_tolerance;
  return q;
}

json config_json(const ShootingConfig& c, const QuadratureOptions& q) {
  return {{"r_start", c.r_start},
          {"r_max", c.r_max ? json(*c.r_max) : json("auto")},
          {"rel_tol", c.rel_tol},
          {"abs_tol", c.abs_tol},
          {"beta_tol", c.beta_tol},
          {"growth_factor", c.growth_factor},
          {"max_bisections", c.max_bisections},
          {"critical_continuation", c.critical_continuation},
          {"quad_points", q.points},
          {"quad_tolerance", q.tolerance}};
}

json params_json(const ProblemParams& p) { return {{"n", p.n()}, {"p", p.p()}, {"m", p.m()}}; }

json report_json(const VerificationReport& r) {
  return {{"name", r.name},
          {"passed", r.passed},
          {"applicable", r.applicable},
          {"margin", finite_or_null(r.margin)},
          {"detail", r.detail}};
}

std::string report_line(const VerificationReport& r) {
  const char* tag = r.applicable ? (r.passed ? "pass" : "FAIL") : (r.passed ? "info: holds" : "info: fails");
  return "[" + std::string(tag) + "] " + r.name + "  margin " + short_num(r.margin) + "  " + r.detail;
}

json test_json(const TestFunction& t) {
  if (const auto* z = std::get_if<CriticalZeta>(&t.kind())) {
    return {{"kind", "CriticalZeta"}, {"n", t.n()}, {"lambda", z->lambda}};
  }
  const auto& h = std::get<HardyProfile>(t.kind());
  return {{"kind", "HardyProfile"},
          {"n", t.n()},
          {"sigma", h.sigma},
          {"inner_cut", h.inner_cut},
          {"outer_cut", h.outer_cut}};
}

json energy_json(const EnergyReport& e) {
  return {{"bilaplacian_term", e.bilaplacian_term},
          {"potential_term", e.potential_term},
          {"energy", e.energy},
          {"quadrature_error_estimate", e.quadrature_error_estimate},
          {"converged", e.converged}};
}

// One invocation: parsed options, the record under construction and output.
struct Context {
  std::ostream& out;
  std::ostream& err;
  std::vector<std::string> args;
  Common common;
  Settings settings;
  ShootingConfig shooting;
  QuadratureOptions quadrature;
  json record;

  void begin(const std::string& command) {
    record = json::object();
    record["command"] = command;
    record["arguments"] = args;
    record["params"] = nullptr;
    record["config"] = config_json(shooting, quadrature);
    record["results"] = json::object();
    record["verdicts"] = json::array();
    record["tool_version"] = BIHARM_TOOL_VERSION;
    record["timestamp"] = timestamp();
  }

  bool text() const { return !common.json && !common.quiet; }

  fs::path out_path(const std::string& name) const {
    const fs::path dir = common.out_dir.empty() ? fs::path(".") : fs::path(common.out_dir);
    fs::create_directories(dir);
    return dir / name;
  }

  void finish() {
    if (common.json) {
      out << record.dump(2) << "\n";
    }
    if (!common.out_dir.empty()) {
      std::ofstream f(out_path(record["command"].get<std::string>() + ".json"));
      f << record.dump(2) << "\n";
    }
  }
};

std::string p_label(double p) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.10g", p);
  return buf;
}

// ---- pc ---------------------------------------------------------------

struct PcRow {
  int n;
  double p_n;
  std::optional<double> p_c;
  double limit;
  double q_at_pn;
};

int cmd_pc(Context& ctx, const std::string& range) {
  ctx.begin("pc");
  std::vector<PcRow> rows;
  for (int n : parse_int_range(range)) {
    const double pn = sobolev_exponent(n);
    rows.push_back({n, pn, p_critical(n), q_limit_coefficient(n), script_q(pn, n)});
  }
  json table = json::array();
  for (const auto& r : rows) {
    table.push_back({{"n", r.n},
                     {"p_n", r.p_n},
                     {"p_c", r.p_c ? json(*r.p_c) : json(nullptr)},
                     {"limit_coefficient", r.limit},
                     {"Q_at_p_n", r.q_at_pn}});
  }
  ctx.record["results"]["rows"] = table;

  if (ctx.common.csv && !ctx.common.json) {
    ctx.out << "n,p_n,p_c,limit_coefficient,Q_at_p_n\n";
    for (const auto& r : rows) {
      ctx.out << r.n << ',' << csv_num(r.p_n) << ',' << (r.p_c ? csv_num(*r.p_c) : kNoPc) << ','
              << csv_num(r.limit) << ',' << csv_num(r.q_at_pn) << '\n';
    }
  } else if (ctx.text()) {
    char line[160];
    std::snprintf(line, sizeof line, "%4s  %-20s  %-20s  %-12s  %s\n", "n", "p_n", "p_c", "limit_coef", "Q(p_n)");
    ctx.out << line;
    for (const auto& r : rows) {
      const std::string pc = r.p_c ? num(*r.p_c) : kNoPc;
      std::snprintf(line, sizeof line, "%4d  %-20s  ", r.n, num(r.p_n).c_str());
      ctx.out << line << pad(pc, 20);
      std::snprintf(line, sizeof line, "  %-12s  %s\n", short_num(r.limit).c_str(), num(r.q_at_pn).c_str());
      ctx.out << line;
    }
  }
  ctx.finish();
  return kOk;
}

// ---- classify ---------------------------------------------------------

int cmd_classify(Context& ctx, int n, double p) {
  ctx.begin("classify");
  if (!(p > 1.0)) {
    throw UsageError("classify: requires p > 1");
  }
  const Regime regime = classify(n, p);
  json res{{"n", n}, {"p", p}, {"regime", std::string(to_string(regime))}};
  std::optional<bool> stable;
  if (regime == Regime::SupercriticalStable) stable = true;
  if (regime == Regime::SupercriticalUnstable || regime == Regime::CriticalSobolev) stable = false;
  res["linearly_stable"] = stable ? json(*stable) : json(nullptr);
  if (n >= 5) {
    res["p_n"] = sobolev_exponent(n);
    res["script_q"] = script_q(p, n);
    const auto pc = p_critical(n);
    res["p_c"] = pc ? json(*pc) : json(nullptr);
    ctx.record["params"] = params_json(ProblemParams(n, p));
  }
  ctx.record["results"] = res;
  if (ctx.text()) {
    ctx.out << to_string(regime);
    if (stable) ctx.out << (*stable ? " (linearly stable)" : " (linearly unstable)");
    ctx.out << "\n";
    if (n >= 5) {
      ctx.out << "p_n = " << num(sobolev_exponent(n)) << "  script_q(p) = " << num(script_q(p, n)) << "\n";
    }
  }
  ctx.finish();
  return kOk;
}

// ---- roots ------------------------------------------------------------

json roots_json(const RootSet& r) {
  return {{"which", r.which == PolyKind::P ? "P" : "R"},
          {"roots", {r.roots[0], r.roots[1], r.roots[2], r.roots[3]}},
          {"symmetry_center", r.symmetry_center},
          {"negative", r.count_negative()},
          {"positive", r.count_positive()}};
}

int cmd_roots(Context& ctx, int n, double p) {
  ctx.begin("roots");
  const ProblemParams params(n, p);
  ctx.record["params"] = params_json(params);
  const RootSet rr = roots_r_polynomial(params);
  ctx.record["results"]["R"] = roots_json(rr);
  const RootSet pr = roots_p_polynomial(params);
  ctx.record["results"]["P"] = roots_json(pr);
  if (ctx.common.csv && !ctx.common.json) {
    ctx.out << "polynomial,root1,root2,root3,root4,symmetry_center\n";
    for (const auto* r : {&pr, &rr}) {
      ctx.out << (r->which == PolyKind::P ? "P" : "R");
      for (double x : r->roots) ctx.out << ',' << csv_num(x);
      ctx.out << ',' << csv_num(r->symmetry_center) << '\n';
    }
  } else if (ctx.text()) {
    for (const auto* r : {&pr, &rr}) {
      ctx.out << (r->which == PolyKind::P ? "P" : "R") << " roots:";
      for (double x : r->roots) ctx.out << "  " << num(x);
      ctx.out << "\n  center " << num(r->symmetry_center) << "  (" << r->count_negative() << " negative, "
              << r->count_positive() << " positive)\n";
    }
  }
  ctx.finish();
  return kOk;
}

// ---- solve ------------------------------------------------------------

double tail_value(const RadialSolution& sol) {
  const State& last = sol.grid.back();
  const double r2 = last.r * last.r;
  return r2 * r2 * std::pow(last.u, sol.params.p() - 1.0);
}

void write_profile_csv(const fs::path& path, const RadialSolution& sol) {
  std::ofstream f(path);
  if (!f) throw std::runtime_error("cannot write " + path.string());
  f << "r,u,du,v,dv\n";
  for (const State& s : sol.grid) {
    f << csv_num(s.r) << ',' << csv_num(s.u) << ',' << csv_num(s.du) << ',' << csv_num(s.v) << ',' << csv_num(s.dv)
      << '\n';
  }
}

void write_emden_csv(const fs::path& path, const EmdenProfile& e) {
  std::ofstream f(path);
  if (!f) throw std::runtime_error("cannot write " + path.string());
  f << "s,W,dW\n";
  for (const auto& x : e.samples) {
    f << csv_num(x.s) << ',' << csv_num(x.W) << ',' << csv_num(x.dW) << '\n';
  }
}

int cmd_solve(Context& ctx, int n, double p, double alpha) {
  ctx.begin("solve");
  const ProblemParams params(n, p);
  ctx.record["params"] = params_json(params);
  const RadialSolution sol = shoot(alpha, params, ctx.shooting);
  const EmdenProfile emden = to_emden(sol);
  const std::string stem = "n" + std::to_string(n) + "_p" + p_label(p) + "_alpha" + p_label(alpha);
  const fs::path profile_path = ctx.out_path("profile_" + stem + ".csv");
  const fs::path emden_path = ctx.out_path("emden_" + stem + ".csv");
  write_profile_csv(profile_path, sol);
  write_emden_csv(emden_path, emden);

  const bool super = classify(n, p) != Regime::CriticalSobolev;
  const double tail = tail_value(sol);
  json res{{"alpha", alpha},
           {"beta", sol.beta},
           {"beta_lo", sol.beta_lo},
           {"beta_hi", sol.beta_hi},
           {"bisections", sol.history.size()},
           {"grid_points", sol.grid.size()},
           {"r_max", sol.r_max()},
           {"length_scale", sol.length_scale},
           {"tail_value", tail},
           {"tail_target", super ? json(q4(params.m(), n)) : json(nullptr)},
           {"tail_relative_deviation",
            super ? json((tail - q4(params.m(), n)) / q4(params.m(), n)) : json(nullptr)},
           {"residual", sol.residual},
           {"emden_residual", emden_ode_residual(emden, sol)},
           {"files", {{"profile", profile_path.string()}, {"emden", emden_path.string()}}}};
  ctx.record["results"] = res;
  if (ctx.text()) {
    ctx.out << "beta = " << num(sol.beta) << "\n";
    ctx.out << "r_max = " << num(sol.r_max()) << "  r^4 u^(p-1) = " << num(tail);
    if (super) ctx.out << "  (Q4(m) = " << num(q4(params.m(), n)) << ")";
    ctx.out << "\n";
    ctx.out << "max step defect (tolerance units) = " << short_num(sol.residual)
            << "  Emden residual = " << short_num(res["emden_residual"].get<double>()) << "\n";
    ctx.out << "wrote " << profile_path.string() << "\nwrote " << emden_path.string() << "\n";
  }
  ctx.finish();
  return kOk;
}

// ---- verify -----------------------------------------------------------

VerificationReport emden_residual_report(const RadialSolution& sol) {
  const double res = emden_ode_residual(sol.params, sol.grid);
  VerificationReport r;
  r.name = "emden_residual";
  r.applicable = true;
  r.passed = res <= kEmdenResidualLimit;
  r.margin = 1.0 - res / kEmdenResidualLimit;
  r.detail = "max normalized residual " + short_num(res);
  return r;
}

int cmd_verify(Context& ctx, int n, double p, const std::vector<double>& alphas) {
  ctx.begin("verify");
  const ProblemParams params(n, p);
  ctx.record["params"] = params_json(params);
  if (classify(n, p) == Regime::NoPositiveSolution) {
    throw RegimeError("verify: no positive entire solution for p < p_n");
  }
  std::vector<RadialSolution> sols;
  for (double a : alphas) sols.push_back(shoot(a, params, ctx.shooting));

  std::vector<VerificationReport> reports;
  std::optional<std::size_t> rellich_failure;
  for (std::size_t i = 0; i < sols.size(); ++i) {
    const std::string tag = " (alpha=" + p_label(sols[i].alpha) + ")";
    const EmdenProfile e = to_emden(sols[i]);
    for (VerificationReport r : {check_bound(e), check_monotone(e), rellich_pointwise_check(sols[i]),
                                 emden_residual_report(sols[i])}) {
      if (r.name == "rellich" && !r.passed && !rellich_failure) rellich_failure = i;
      r.name += tag;
      reports.push_back(std::move(r));
    }
  }
  for (std::size_t i = 0; i < sols.size(); ++i) {
    for (std::size_t j = i + 1; j < sols.size(); ++j) {
      const IntersectionReport x = check_intersection(sols[i], sols[j]);
      VerificationReport r;
      r.name = "intersection (alpha=" + p_label(x.alpha) + ", " + p_label(x.beta) + ")";
      r.applicable = x.applicable;
      r.passed = x.passed;
      r.margin = x.min_gap;
      r.detail = std::to_string(x.sign_changes) + " sign changes, " + (x.ordered ? "ordered" : "not ordered") +
                 " on [0, " + short_num(x.common_r_max) + "]";
      if (!x.applicable) r.detail = "no theorem applies; " + r.detail;
      reports.push_back(std::move(r));
    }
  }

  bool failed = false;
  for (const auto& r : reports) {
    ctx.record["verdicts"].push_back(report_json(r));
    failed = failed || (r.applicable && !r.passed);
  }
  json res{{"regime", std::string(to_string(classify(n, p)))}, {"alphas", alphas}};
  std::vector<double> betas;
  for (const auto& s : sols) betas.push_back(s.beta);
  res["betas"] = betas;

  std::optional<ProbeResult> probe;
  if (rellich_failure) {
    probe = instability_probe(sols[*rellich_failure], ProbeGrid{}, ctx.quadrature);
    json pj{{"alpha", sols[*rellich_failure].alpha}, {"found", probe->hit.has_value()}, {"evaluated", probe->evaluated}};
    if (probe->hit) {
      pj["test"] = test_json(probe->hit->test);
      pj["report"] = energy_json(probe->hit->report);
    }
    res["probe"] = pj;
  }
  ctx.record["results"] = res;

  if (ctx.text()) {
    ctx.out << "n = " << n << ", p = " << num(p) << ": " << to_string(classify(n, p)) << "\n";
    for (const auto& r : reports) ctx.out << report_line(r) << "\n";
    if (probe) {
      ctx.out << "instability probe (alpha=" << p_label(sols[*rellich_failure].alpha) << "): ";
      if (probe->hit) {
        ctx.out << "negative energy " << num(probe->hit->report.energy) << "\n";
      } else {
        ctx.out << "inconclusive (no negative direction among " << probe->evaluated << " test functions)\n";
      }
    }
  }
  ctx.finish();
  if (failed) throw VerificationFailed("verify: a check covered by a theorem failed");
  return kOk;
}

// ---- energy -----------------------------------------------------------

int cmd_energy(Context& ctx, int n, double lambda) {
  ctx.begin("energy");
  const ProblemParams params(n, sobolev_exponent(n));
  ctx.record["params"] = params_json(params);
  const CriticalSolution sol(n, lambda);
  const TestFunction zeta(n, CriticalZeta{lambda});
  const EnergyReport e = energy(zeta, critical_potential(sol), params, ctx.quadrature);
  const double closed = instability_energy_closed_form(n, lambda);
  if (!std::isfinite(closed) || closed == 0.0) throw UsageError("energy: lambda out of range");
  const double gap = std::abs(e.energy - closed) / std::abs(closed);
  json res = energy_json(e);
  res["lambda"] = lambda;
  res["closed_form"] = closed;
  res["relative_gap"] = gap;
  ctx.record["results"] = res;
  VerificationReport v;
  v.name = "energy";
  v.passed = e.converged && e.energy < 0.0 && gap <= kEnergyGapLimit;
  v.margin = 1.0 - gap / kEnergyGapLimit;
  v.detail = "relative gap " + short_num(gap) + " to the closed form";
  ctx.record["verdicts"].push_back(report_json(v));
  if (ctx.text()) {
    ctx.out << "quadrature  E = " << num(e.energy) << "  (+/- " << short_num(e.quadrature_error_estimate) << ")\n";
    ctx.out << "closed form E = " << num(closed) << "\n";
    ctx.out << "relative gap  " << short_num(gap) << "\n";
  }
  ctx.finish();
  if (!e.converged) throw VerificationFailed("energy: quadrature did not reach the requested tolerance");
  if (!v.passed) throw VerificationFailed("energy: quadrature disagrees with the closed form");
  return kOk;
}

// ---- probe ------------------------------------------------------------

int cmd_probe(Context& ctx, int n, double p, double alpha) {
  ctx.begin("probe");
  const ProblemParams params(n, p);
  ctx.record["params"] = params_json(params);
  const RadialSolution sol = shoot(alpha, params, ctx.shooting);
  const VerificationReport rellich = rellich_pointwise_check(sol);
  const ProbeResult probe = instability_probe(sol, ProbeGrid{}, ctx.quadrature);
  json res{{"alpha", alpha}, {"found", probe.hit.has_value()}, {"evaluated", probe.evaluated}};
  if (probe.hit) {
    res["test"] = test_json(probe.hit->test);
    res["report"] = energy_json(probe.hit->report);
  } else {
    res["outcome"] = "inconclusive";
  }
  res["rellich"] = report_json(rellich);
  ctx.record["results"] = res;
  ctx.record["verdicts"].push_back(report_json(rellich));
  if (ctx.text()) {
    if (probe.hit) {
      ctx.out << "negative energy " << num(probe.hit->report.energy) << " for " << test_json(probe.hit->test).dump()
              << "\n";
    } else {
      ctx.out << "probe inconclusive: no negative direction among " << probe.evaluated << " test functions\n";
    }
    ctx.out << "Rellich pointwise check: " << (rellich.passed ? "pass" : "fail") << "  margin "
            << short_num(rellich.margin) << "\n";
  }
  ctx.finish();
  return kOk;
}

// ---- sweep ------------------------------------------------------------

struct SweepJob {
  int n;
  double p;
  double alpha;
};

json run_sweep_job(const SweepJob& job, const ShootingConfig& config) {
  json row{{"n", job.n}, {"p", job.p}, {"alpha", job.alpha}};
  const Regime regime = classify(job.n, job.p);
  row["regime"] = std::string(to_string(regime));
  if (regime == Regime::NoPositiveSolution) {
    row["status"] = "skipped";
    return row;
  }
  try {
    const ProblemParams params(job.n, job.p);
    const RadialSolution sol = shoot(job.alpha, params, config);
    const EmdenProfile e = to_emden(sol);
    row["beta"] = sol.beta;
    if (regime != Regime::CriticalSobolev) {
      const double q = q4(params.m(), job.n);
      row["tail_deviation"] = (tail_value(sol) - q) / q;
    } else {
      row["tail_deviation"] = nullptr;
    }
    row["bound"] = check_bound(e).passed;
    row["monotone"] = check_monotone(e).passed;
    row["rellich"] = rellich_pointwise_check(sol).passed;
    row["emden_residual"] = emden_ode_residual(e, sol);
    row["status"] = "ok";
  } catch (const std::exception& ex) {
    row["status"] = std::string("error: ") + ex.what();
  }
  return row;
}

std::string sweep_csv_line(const json& row) {
  auto field = [&](const char* key) -> std::string {
    if (!row.contains(key) || row[key].is_null()) return "";
    const json& v = row[key];
    if (v.is_boolean()) return v.get<bool>() ? "pass" : "fail";
    if (v.is_number_integer()) return std::to_string(v.get<long long>());
    if (v.is_number()) return csv_num(v.get<double>());
    std::string s = v.get<std::string>();
    std::replace(s.begin(), s.end(), ',', ';');
    return s;
  };
  std::string line;
  for (const char* key : {"n", "p", "alpha", "regime", "beta", "tail_deviation", "bound", "monotone", "rellich",
                          "emden_residual", "status"}) {
    if (!line.empty()) line += ',';
    line += field(key);
  }
  return line;
}

int cmd_sweep(Context& ctx, const std::string& n_range, const std::string& p_list, const std::string& alpha_list) {
  ctx.begin("sweep");
  std::vector<SweepJob> jobs;
  for (int n : parse_int_range(n_range)) {
    for (double p : parse_number_list(p_list)) {
      for (double a : parse_number_list(alpha_list)) {
        if (n < 5 || !(p > 1.0) || !(a > 0.0)) throw UsageError("sweep: requires n >= 5, p > 1, alpha > 0");
        jobs.push_back({n, p, a});
      }
    }
  }
  const unsigned hw = std::max(1u, std::thread::hardware_concurrency());
  const int workers = std::max(1, std::min<int>(ctx.settings.jobs.value_or(static_cast<int>(hw)),
                                                static_cast<int>(jobs.size())));

  std::vector<std::optional<json>> results(jobs.size());
  std::mutex mu;
  std::condition_variable ready;
  std::atomic<std::size_t> next{0};
  const ShootingConfig config = ctx.shooting;
  std::vector<std::thread> pool;
  for (int w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < jobs.size(); i = next++) {
        json row = run_sweep_job(jobs[i], config);
        {
          std::lock_guard lock(mu);
          results[i] = std::move(row);
        }
        ready.notify_all();
      }
    });
  }

  // Single serializer: rows are emitted in job order as they complete.
  const bool stream_csv = !ctx.common.json && (ctx.common.csv || !ctx.common.quiet);
  if (stream_csv) {
    ctx.out << "n,p,alpha,regime,beta,tail_deviation,bound,monotone,rellich,emden_residual,status\n";
  }
  json rows = json::array();
  for (std::size_t i = 0; i < jobs.size(); ++i) {
    json row;
    {
      std::unique_lock lock(mu);
      ready.wait(lock, [&] { return results[i].has_value(); });
      row = *results[i];
    }
    if (stream_csv) ctx.out << sweep_csv_line(row) << '\n' << std::flush;
    rows.push_back(std::move(row));
  }
  for (auto& t : pool) t.join();
  ctx.record["results"]["rows"] = rows;
  ctx.finish();
  return kOk;
}

// ---- dispatch ---------------------------------------------------------

void add_common(CLI::App* sub, Common& c) {
  sub->add_flag("--json", c.json, "print the full run record as JSON");
  sub->add_flag("--csv", c.csv, "print tabular output as CSV");
  sub->add_flag("--quiet", c.quiet, "suppress human-readable output");
  sub->add_option("--out", c.out_dir, "directory for the run record and data files");
  sub->add_option("--config", c.config_path, "key=value configuration file (default: $BIHARM_CONFIG)");
}

void add_shooting(CLI::App* sub, Settings& s) {
  sub->add_option("--r-start", s.r_start, "series hand-off radius, in units of the length scale");
  sub->add_option("--r-max", s.r_max, "integration horizon, in units of the length scale");
  sub->add_option("--rel-tol", s.rel_tol, "integrator relative tolerance");
  sub->add_option("--abs-tol", s.abs_tol, "integrator absolute tolerance");
  sub->add_option("--beta-tol", s.beta_tol, "relative bisection width (0: to adjacent floats)");
  sub->add_option("--growth-factor", s.growth_factor, "divergence threshold multiplier K");
  sub->add_option("--max-bisections", s.max_bisections, "bisection budget");
  sub->add_option("--critical-continuation", s.critical_continuation,
                  "horizon multiplier used to classify trajectories at p = p_n");
}

void add_quadrature(CLI::App* sub, Settings& s) {
  sub->add_option("--points", s.quad_points, "Gauss-Kronrod nodes per panel (15, 31, 41, 51, 61)");
  sub->add_option("--quad-tol", s.quad_tolerance, "relative quadrature tolerance");
}

}  // namespace

double parse_number(const std::string& text) {
  const std::string t = trim(text);
  auto whole = [](const std::string& s) {
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(s, &used);
    } catch (const std::exception&) {
      throw std::invalid_argument("not a number: '" + s + "'");
    }
    if (used != s.size()) throw std::invalid_argument("not a number: '" + s + "'");
    return v;
  };
  const auto slash = t.find('/');
  if (slash == std::string::npos) return whole(t);
  const double den = whole(trim(t.substr(slash + 1)));
  if (den == 0.0) throw std::invalid_argument("zero denominator in '" + t + "'");
  return whole(trim(t.substr(0, slash))) / den;
}

std::vector<int> parse_int_range(const std::string& text) {
  const std::string t = trim(text);
  auto to_int = [](const std::string& s) {
    const double v = parse_number(s);
    if (v != std::floor(v) || std::abs(v) > 1e9) throw std::invalid_argument("not an integer: '" + s + "'");
    return static_cast<int>(v);
  };
  std::vector<int> out;
  if (const auto dots = t.find(".."); dots != std::string::npos) {
    const int lo = to_int(trim(t.substr(0, dots)));
    const int hi = to_int(trim(t.substr(dots + 2)));
    if (hi < lo) throw std::invalid_argument("empty range '" + t + "'");
    for (int n = lo; n <= hi; ++n) out.push_back(n);
    return out;
  }
  std::stringstream ss(t);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(to_int(item));
  if (out.empty()) throw std::invalid_argument("empty range");
  return out;
}

std::vector<double> parse_number_list(const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(parse_number(item));
  if (out.empty()) throw std::invalid_argument("empty list");
  return out;
}

std::map<std::string, std::string> parse_config(std::istream& in) {
  std::map<std::string, std::string> out;
  std::string line;
  int number = 0;
  while (std::getline(in, line)) {
    ++number;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw std::invalid_argument("config line " + std::to_string(number) + ": expected key = value");
    }
    std::string key = trim(line.substr(0, eq));
    std::replace(key.begin(), key.end(), '-', '_');
    out[key] = trim(line.substr(eq + 1));
  }
  return out;
}

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Entire radial solutions of Delta^2 u = u^p: exponents, shooting and stability checks", "biharm"};
  app.set_version_flag("--version", BIHARM_TOOL_VERSION);
  app.require_subcommand(1);

  Context ctx{out, err, args, {}, {}, {}, {}, {}};
  std::string n_text, p_text, alpha_text = "1", lambda_text = "1", range_text;

  auto* pc = app.add_subcommand("pc", "critical stability exponent p_c(n) over a range of n");
  pc->add_option("--n", range_text, "dimension or range, e.g. 13 or 5..16")->required();

  auto* cls = app.add_subcommand("classify", "regime of (n, p)");
  cls->add_option("--n", n_text, "dimension")->required();
  cls->add_option("--p", p_text, "exponent (fractions such as 17/9 accepted)")->required();

  auto* roots = app.add_subcommand("roots", "roots of the characteristic polynomials P and R");
  roots->add_option("--n", n_text, "dimension")->required();
  roots->add_option("--p", p_text, "exponent")->required();

  auto* solve = app.add_subcommand("solve", "shoot for phi_alpha and write profile CSVs");
  solve->add_option("--n", n_text, "dimension")->required();
  solve->add_option("--p", p_text, "exponent")->required();
  solve->add_option("--alpha", alpha_text, "phi(0)");
  add_shooting(solve, ctx.settings);

  auto* verify = app.add_subcommand("verify", "bound, monotonicity, ordering, Rellich and residual checks");
  verify->add_option("--n", n_text, "dimension")->required();
  verify->add_option("--p", p_text, "exponent")->required();
  verify->add_option("--alpha", alpha_text, "comma-separated list of phi(0) values");
  add_shooting(verify, ctx.settings);
  add_quadrature(verify, ctx.settings);

  auto* en = app.add_subcommand("energy", "instability energy of the bubble test function at p = p_n");
  en->add_option("--n", n_text, "dimension")->required();
  en->add_option("--lambda", lambda_text, "bubble scale");
  add_quadrature(en, ctx.settings);

  auto* probe = app.add_subcommand("probe", "search for a negative direction of the linearized energy");
  probe->add_option("--n", n_text, "dimension")->required();
  probe->add_option("--p", p_text, "exponent")->required();
  probe->add_option("--alpha", alpha_text, "phi(0)");
  add_shooting(probe, ctx.settings);
  add_quadrature(probe, ctx.settings);

  auto* sweep = app.add_subcommand("sweep", "solve and check a grid of (n, p, alpha) in parallel");
  sweep->add_option("--n", range_text, "dimension or range")->required();
  sweep->add_option("--p", p_text, "comma-separated exponents")->required();
  sweep->add_option("--alpha", alpha_text, "comma-separated phi(0) values");
  sweep->add_option("--jobs", ctx.settings.jobs, "worker threads");
  add_shooting(sweep, ctx.settings);

  for (auto* sub : {pc, cls, roots, solve, verify, en, probe, sweep}) add_common(sub, ctx.common);

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) {
      // --help and --version
      if (dynamic_cast<const CLI::CallForVersion*>(&e)) {
        out << BIHARM_TOOL_VERSION << "\n";
      } else {
        const CLI::App* target = &app;
        for (auto* sub : app.get_subcommands()) target = sub;
        out << target->help();
      }
      return kOk;
    }
    err << "usage error: " << e.what() << "\n";
    return kUsage;
  }

  try {
    std::string config_path = ctx.common.config_path;
    if (config_path.empty()) {
      if (const char* env = std::getenv("BIHARM_CONFIG")) config_path = env;
    }
    if (!config_path.empty()) {
      std::ifstream f(config_path);
      if (!f) throw UsageError("cannot read config file '" + config_path + "'");
      apply_config(ctx.settings, parse_config(f));
    }
    ctx.shooting = shooting_config(ctx.settings);
    ctx.quadrature = quadrature_options(ctx.settings);
  } catch (const std::invalid_argument& e) {
    err << "usage error: " << e.what() << "\n";
    return kUsage;
  }

  try {
    auto n_value = [&] { return parse_int_range(n_text).at(0); };
    if (pc->parsed()) return cmd_pc(ctx, range_text);
    if (cls->parsed()) return cmd_classify(ctx, n_value(), parse_number(p_text));
    if (roots->parsed()) return cmd_roots(ctx, n_value(), parse_number(p_text));
    if (solve->parsed()) return cmd_solve(ctx, n_value(), parse_number(p_text), parse_number(alpha_text));
    if (verify->parsed()) return cmd_verify(ctx, n_value(), parse_number(p_text), parse_number_list(alpha_text));
    if (en->parsed()) return cmd_energy(ctx, n_value(), parse_number(lambda_text));
    if (probe->parsed()) return cmd_probe(ctx, n_value(), parse_number(p_text), parse_number(alpha_text));
    if (sweep->parsed()) return cmd_sweep(ctx, range_text, p_text, alpha_text);
  } catch (const VerificationFailed& e) {
    err << e.what() << "\n";
    return kVerification;
  } catch (const RegimeError& e) {
    err << "regime error: " << e.what() << "\n";
    return kRegime;
  } catch (const StabilityViolated& e) {
    err << "regime error: " << e.what() << "\n";
    return kRegime;
  } catch (const NoConvergence& e) {
    err << "convergence failure: " << e.what() << "\n";
    return kConvergence;
  } catch (const StepUnderflow& e) {
    err << "convergence failure: " << e.what() << "\n";
    return kConvergence;
  } catch (const std::invalid_argument& e) {
    err << "usage error: " << e.what() << "\n";
    return kUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
  return kUsage;
}

}  // namespace biharm::cli
