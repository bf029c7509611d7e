#include "whf/runner.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <fstream>
#include <ostream>
#include <string>
#include <vector>

#include "whf/config.hpp"
#include "whf/error.hpp"
#include "whf/ode1.hpp"
#include "whf/ode2.hpp"
#include "whf/problem.hpp"
#include "whf/validate.hpp"

namespace whf {

namespace {

constexpr double kConstraintTol = 1e-8;
constexpr double kIsospectralTol = 1e-8;
constexpr double kQuadratureTol = 1e-8;

std::string sci(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3e", v);
  return buf;
}

std::string fmt(Complex c) {
  char buf[80];
  std::snprintf(buf, sizeof buf, "%.6g%+.6gi", c.real(), c.imag());
  return buf;
}

class Stopwatch {
 public:
  double ms() const {
    return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start_)
        .count();
  }

 private:
  std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

ProblemConfig prepare(const RunConfig& run) {
  ProblemConfig cfg = load_config(run.config);
  if (run.L) cfg.L = *run.L;
  if (run.steps) cfg.steps = *run.steps;
  if (cfg.steps < 10) throw Error(ErrorCode::ConfigError, "steps must be at least 10");
  double top = 0.0;
  for (Complex c : cfg.problem->cuts()) top = std::max(top, c.imag());
  if (!(cfg.L > top + 1.0)) {
    throw Error(ErrorCode::ConfigError, "L must exceed max Im k_j + 1");
  }
  if (run.format != "csv" && run.format != "json") {
    throw Error(ErrorCode::ConfigError, "format must be csv or json");
  }
  return cfg;
}

struct ShorePair {
  std::size_t cut;
  double height;
  std::size_t plus_index;
};

struct Solved {
  CommutantB B;
  Ode2Trajectory trajectory;
  FactorizationResult result;
  std::vector<ShorePair> pairs;
  std::vector<double> residuals;
  double ode2_ms = 0.0;
  double ode1_ms = 0.0;
};

Ode1Options ode1_options(const ProblemConfig& cfg, const RunConfig& run) {
  Ode1Options o;
  o.delta = cfg.delta;
  o.margin = cfg.margin;
  o.threads = run.threads;
  return o;
}

Solved solve(const ProblemConfig& cfg, const RunConfig& run) {
  const FactorizationProblem& p = *cfg.problem;
  Solved out;
  out.B = build_B(p, cfg.poles.empty() ? default_poles(p) : cfg.poles);

  Stopwatch ode2_clock;
  out.trajectory = integrate(p, out.B, cfg.L, cfg.steps);
  out.ode2_ms = ode2_clock.ms();

  std::vector<EvalPoint> points;
  for (Complex k : cfg.points) points.push_back(EvalPoint::straight(k));
  for (std::size_t j = 0; j < cfg.shore_heights.size(); ++j) {
    for (double h : cfg.shore_heights[j]) {
      out.pairs.push_back({j, h, points.size()});
      points.push_back(EvalPoint::shore(p, j, h, Contour::gamma_plus));
      points.push_back(EvalPoint::shore(p, j, h, Contour::gamma_minus));
    }
  }

  const Ode2System sys(p, out.B);
  Stopwatch ode1_clock;
  out.result = solve_U(sys, out.trajectory, points, ode1_options(cfg, run));
  out.ode1_ms = ode1_clock.ms();

  for (const auto& pair : out.pairs) {
    const double h[] = {pair.height};
    const ComplexMat plus[] = {out.result.U[pair.plus_index]};
    const ComplexMat minus[] = {out.result.U[pair.plus_index + 1]};
    out.residuals.push_back(jump_residual(p, pair.cut, h, plus, minus).front());
  }
  return out;
}

/// Checks that belong to a plain factorization run.
std::vector<CheckResult> factorize_checks(const ProblemConfig& cfg, const Solved& s) {
  std::vector<CheckResult> checks;
  if (!s.residuals.empty()) {
    checks.push_back(make_check("jump_residual",
                                *std::max_element(s.residuals.begin(), s.residuals.end()),
                                cfg.residual_tol));
  }
  if (cfg.oracle == "khrapkov") {
    const KhrapkovReference ref({*cfg.problem, 0});
    double worst = 0.0, quad = 0.0;
    std::size_t compared = 0;
    for (std::size_t i = 0; i < s.result.points.size(); ++i) {
      const EvalPoint& pt = s.result.points[i];
      ComplexMat u;
      if (pt.contour == Contour::straight) {
        u = ref.U(Complex{}, pt.k);
        quad = std::max(quad, ref.convergence(Complex{}, pt.k));
      } else {
        u = ref.U_shore(pt.height, pt.contour, cfg.delta, cfg.margin);
      }
      worst = std::max(worst, (s.result.U[i] - u).max_abs());
      ++compared;
    }
    checks.push_back(make_check("khrapkov_oracle", worst, cfg.oracle_tol,
                                std::to_string(compared) + " points"));
    checks.push_back(make_check("oracle_quadrature", quad, kQuadratureTol,
                                "panel and truncation doubling"));
  }
  return checks;
}

std::vector<CheckResult> validation_checks(const ProblemConfig& cfg, const RunConfig& run,
                                           const Solved& s, std::ostream& log) {
  const FactorizationProblem& p = *cfg.problem;
  std::vector<CheckResult> checks;
  const auto& d = s.trajectory.diagnostics;
  checks.push_back(make_check("ode2_constraint", d.constraint_residual, kConstraintTol,
                              "relative residual of the s_j/r_l constraint"));
  checks.push_back(make_check("isospectral_drift", d.isospectral_drift, kIsospectralTol,
                              "max |eig r_l(b) - eig t_l|"));

  if (!cfg.far_points.empty()) {
    std::vector<EvalPoint> far;
    for (Complex k : cfg.far_points) far.push_back(EvalPoint::straight(k));
    const Ode2System sys(p, s.B);
    const auto res = solve_U(sys, s.trajectory, far, ode1_options(cfg, run));
    double worst = 0.0;
    for (const auto& u : res.U)
      worst = std::max(worst, (u - ComplexMat::identity(p.dim())).norm_inf());
    checks.push_back(make_check("normalization_at_infinity", worst, cfg.normalization_tol));
  }

  const double trunc = verify_truncation(p, s.B, cfg.L, cfg.steps / 4 + 10);
  log << "  truncation: ||s(iL) from 2L - s(iL) initial|| = " << sci(trunc) << '\n';
  checks.push_back(make_check("truncation_consistency", trunc, cfg.residual_tol,
                              "ODE2 from 2L vs initial data at L"));

  if (run.b_invariance || !cfg.alt_poles.empty()) {
    std::vector<Complex> alt = cfg.alt_poles;
    if (alt.empty()) {
      alt = default_poles(p);
      for (Complex& z : alt) z *= 1.5;
    }
    const CommutantB B_alt = build_B(p, alt);
    checks.push_back(make_check("b_invariance",
                                b_invariance_check(p, s.B, B_alt, cfg.L, cfg.steps),
                                cfg.b_invariance_tol));
  }
  return checks;
}

void print_summary(const ProblemConfig& cfg, const Solved& s, std::ostream& log) {
  const auto& d = s.trajectory.diagnostics;
  log << "problem: " << (cfg.name.empty() ? "(unnamed)" : cfg.name) << ", cuts:";
  for (Complex c : cfg.problem->cuts()) log << ' ' << fmt(c);
  log << ", poles:";
  for (Complex c : s.B.poles) log << ' ' << fmt(c);
  log << '\n';
  log << "grid: L = " << cfg.L << ", N_b = " << cfg.steps << " (" << s.trajectory.nodes.size()
      << " nodes)\n";
  char buf[160];
  std::snprintf(buf, sizeof buf, "runtime: ODE2 %.1f ms, ODE1 %.1f ms for %zu points\n",
                s.ode2_ms, s.ode1_ms, s.result.points.size());
  log << buf;
  log << "ODE2 diagnostics: constraint " << sci(d.constraint_residual) << ", isospectral drift "
      << sci(d.isospectral_drift) << ", spectrum mismatch " << sci(d.spectrum_mismatch)
      << ", continuity constant " << sci(d.continuity_constant) << '\n';
  for (std::size_t i = 0; i < s.pairs.size(); ++i) {
    log << "jump residual on cut " << s.pairs[i].cut + 1 << " at height " << s.pairs[i].height
        << ": " << sci(s.residuals[i]) << '\n';
  }
}

bool print_checks(const std::vector<CheckResult>& checks, std::ostream& log) {
  bool all = true;
  for (const auto& c : checks) {
    log << (c.passed ? "[PASS] " : "[FAIL] ") << c.name << ": " << sci(c.value)
        << " (tolerance " << sci(c.tolerance) << ")";
    if (!c.note.empty()) log << " - " << c.note;
    log << '\n';
    all = all && c.passed;
  }
  return all;
}

template <class F>
void with_output(const std::optional<std::filesystem::path>& path, std::ostream& fallback, F&& f) {
  if (!path) {
    f(fallback);
    return;
  }
  std::ofstream file(*path);
  if (!file) throw Error(ErrorCode::ConfigError, "cannot write " + path->string());
  f(file);
}

void report_error(const Error& e, std::ostream& log) { log << "error: " << e.what() << '\n'; }

}  // namespace

int run_factorize(const RunConfig& run, std::ostream& result, std::ostream& log) {
  ProblemConfig cfg;
  try {
    cfg = prepare(run);
  } catch (const Error& e) {
    report_error(e, log);
    return kExitBadInput;
  }
  try {
    // A commutant only exists for branch-commutative G; say so up front
    // instead of failing somewhere inside the commutant construction.
    const auto comm = check_branch_commutativity(*cfg.problem);
    if (!comm.passed) {
      log << "error: G is not branch-commutative (max commutator " << comm.max_commutator
          << " over " << comm.samples << " affixes); the two-ODE method does not apply\n";
      return kExitFailed;
    }
    const Solved s = solve(cfg, run);
    std::vector<CheckResult> checks = factorize_checks(cfg, s);
    if (run.validate) {
      checks.push_back(make_check("branch_commutativity", comm.max_commutator, comm.tolerance));
      for (auto& c : validation_checks(cfg, run, s, log)) checks.push_back(std::move(c));
    }

    with_output(run.out, result, [&](std::ostream& os) {
      if (run.format == "json") {
        write_result_json(os, s.result, s.residuals);
      } else {
        write_result_csv(os, s.result);
      }
    });
    if (run.trajectory_dump) {
      with_output(run.trajectory_dump, result,
                  [&](std::ostream& os) { write_trajectory_csv(os, s.trajectory); });
    }
    if (run.report) {
      with_output(run.report, result, [&](std::ostream& os) { write_report_json(os, checks); });
    }
    print_summary(cfg, s, log);
    return print_checks(checks, log) ? kExitOk : kExitFailed;
  } catch (const Error& e) {
    report_error(e, log);
    return kExitFailed;
  }
}

int run_validate(const RunConfig& run, std::ostream& result, std::ostream& log) {
  ProblemConfig cfg;
  try {
    cfg = prepare(run);
  } catch (const Error& e) {
    report_error(e, log);
    return kExitBadInput;
  }
  std::vector<CheckResult> checks;
  try {
    const auto comm = check_branch_commutativity(*cfg.problem);
    checks.push_back(make_check("branch_commutativity", comm.max_commutator, comm.tolerance,
                                std::to_string(comm.samples) + " affixes, " +
                                    std::to_string(comm.sheets) + " sheets, seed " +
                                    std::to_string(comm.seed)));
    if (!comm.passed) {
      log << "G is not branch-commutative; no commutant exists, remaining checks skipped\n";
    } else if (cfg.problem->form() != ProblemForm::moiseev) {
      checks.push_back({"commutant", 0.0, 0.0, false,
                        "commutant construction needs the Moiseev form"});
    } else {
      const Solved s = solve(cfg, run);
      print_summary(cfg, s, log);
      for (auto& c : factorize_checks(cfg, s)) checks.push_back(std::move(c));
      for (auto& c : validation_checks(cfg, run, s, log)) checks.push_back(std::move(c));
      if (run.trajectory_dump) {
        with_output(run.trajectory_dump, result,
                    [&](std::ostream& os) { write_trajectory_csv(os, s.trajectory); });
      }
    }
  } catch (const Error& e) {
    report_error(e, log);
    checks.push_back({"pipeline", 0.0, 0.0, false, e.what()});
  }
  const bool all = print_checks(checks, log);
  try {
    with_output(run.report ? run.report : run.out, result,
                [&](std::ostream& os) { write_report_json(os, checks); });
  } catch (const Error& e) {
    report_error(e, log);
    return kExitFailed;
  }
  return all ? kExitOk : kExitFailed;
}

}  // namespace whf
