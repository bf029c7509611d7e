#include "whf/ode2.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <ostream>
#include <string>

#include "whf/error.hpp"

namespace whf {

namespace {

std::string fmt(Complex c) {
  char buf[80];
  std::snprintf(buf, sizeof buf, "%.6g%+.6gi", c.real(), c.imag());
  return buf;
}

[[noreturn]] void rethrow_at(const Error& e, Complex b) {
  std::string msg = e.what();
  const std::string prefix = std::string(to_string(e.code())) + ": ";
  if (msg.rfind(prefix, 0) == 0) msg.erase(0, prefix.size());
  throw Error(e.code(), msg + " (at b = " + fmt(b) + ")");
}

ComplexMat sandwich(const ComplexMat& vectors, std::span<const Complex> diag) {
  return vectors * ComplexMat::diagonal(diag) * mat_inv(vectors);
}

std::vector<Complex> permuted(std::span<const Complex> values, std::span<const std::size_t> perm) {
  std::vector<Complex> out(values.size());
  for (std::size_t i = 0; i < values.size(); ++i) out[i] = values[perm[i]];
  return out;
}

}  // namespace

void Ode2Diagnostics::merge(const Ode2Diagnostics& other) {
  constraint_residual = std::max(constraint_residual, other.constraint_residual);
  isospectral_drift = std::max(isospectral_drift, other.isospectral_drift);
  spectrum_mismatch = std::max(spectrum_mismatch, other.spectrum_mismatch);
  continuity_constant = std::max(continuity_constant, other.continuity_constant);
  continuity_disagreements += other.continuity_disagreements;
}

ComplexMat match_s(std::span<const Complex> x_diag, const ComplexMat& y, const ComplexMat& prev,
                   double ambiguity_ratio) {
  const EigenPair ey = eig(y);
  const ComplexMat inv = mat_inv(ey.vectors);
  std::vector<std::size_t> perm(x_diag.size());
  std::iota(perm.begin(), perm.end(), std::size_t{0});

  ComplexMat best, second;
  double best_dist = 1e300, second_dist = 1e300;
  do {
    const std::vector<Complex> x = permuted(x_diag, perm);
    ComplexMat cand = ey.vectors * ComplexMat::diagonal(x) * inv;
    const double dist = (cand - prev).norm_inf();
    if (dist < best_dist) {
      second = std::move(best);
      second_dist = best_dist;
      best = std::move(cand);
      best_dist = dist;
    } else if (dist < second_dist) {
      second = std::move(cand);
      second_dist = dist;
    }
  } while (std::next_permutation(perm.begin(), perm.end()));

  if (second_dist < 1e300 && second_dist < ambiguity_ratio * best_dist) {
    // Candidates that coincide (nearly equal eigenvalues) are not a real choice.
    const double spread = (best - second).norm_inf();
    if (spread > 1e-9 * (1.0 + best.norm_inf())) {
      throw Error(ErrorCode::AmbiguousMatch,
                  "two eigenvalue assignments are nearly equidistant from the previous s "
                  "(distances " + std::to_string(best_dist) + " and " +
                      std::to_string(second_dist) + "); reduce the step size");
    }
  }
  return best;
}

ComplexMat match_s_initial(std::span<const Complex> x_diag, const ComplexMat& y,
                           const ComplexMat& p_star) {
  const EigenPair ey = eig(y);
  const std::size_t n = x_diag.size();
  std::vector<std::size_t> perm(n), best_perm;
  std::iota(perm.begin(), perm.end(), std::size_t{0});
  double best = 1e300;
  do {
    double cost = 0.0;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t r = 0; r < n; ++r)
        cost += std::abs(ey.vectors(r, i) - p_star(r, perm[i]));
    if (cost < best) {
      best = cost;
      best_perm = perm;
    }
  } while (std::next_permutation(perm.begin(), perm.end()));
  return sandwich(ey.vectors, permuted(x_diag, best_perm));
}

ComplexMat match_s_spectral(std::span<const Complex> x_diag, std::span<const Complex> beta,
                            const ComplexMat& y, double* mismatch) {
  const EigenPair ey = eig(y);
  double cost = 0.0;
  const auto perm = best_matching(beta, ey.values, &cost);
  if (mismatch) *mismatch = cost;
  return sandwich(ey.vectors, permuted(x_diag, perm));
}

Ode2System::Ode2System(const FactorizationProblem& p, const CommutantB& B, Ode2Options opts)
    : p_(&p), B_(&B), opts_(std::move(opts)) {
  if (B.dim != p.dim()) throw Error(ErrorCode::InvalidArgument, "commutant dimension mismatch");
  for (const auto& t : B.residues) t_spectra_.push_back(eigenvalues(t));
}

Ode2Node Ode2System::initial(double L) const {
  if (!(L > 0.0)) throw Error(ErrorCode::InvalidArgument, "L must be positive");
  const std::size_t n = p_->dim();
  Ode2Node node;
  node.state.b = Complex{0.0, L};
  node.state.r = B_->residues;
  for (std::size_t j = 0; j < p_->cuts().size(); ++j) {
    const Complex kappa = p_->cuts()[j] + node.state.b;
    const ComplexMat h = p_->eval_H(j, kappa);
    const double dev = (h - ComplexMat::identity(n)).norm_inf();
    if (!(dev <= opts_.init_tol)) {
      throw Error(ErrorCode::LTooSmall, "||H_" + std::to_string(j + 1) + " - I|| = " +
                                            std::to_string(dev) + " at L = " + std::to_string(L) +
                                            "; increase L");
    }
    const EigenPair pb = eig(B_->eval(kappa), opts_.eig);
    const ComplexMat d = mat_inv(pb.vectors) * h * pb.vectors;
    double diag_scale = 1.0, off = 0.0;
    std::vector<Complex> f(n);
    for (std::size_t a = 0; a < n; ++a) {
      f[a] = d(a, a);
      diag_scale = std::max(diag_scale, std::abs(f[a]));
      for (std::size_t c = 0; c < n; ++c)
        if (a != c) off = std::max(off, std::abs(d(a, c)));
    }
    if (off > opts_.diagonal_tol * diag_scale) {
      throw Error(ErrorCode::NotDiagonalized,
                  "eigenvectors of B do not diagonalize H_" + std::to_string(j + 1) +
                      " at iL (off-diagonal " + std::to_string(off) + ")");
    }
    const std::vector<Complex> zero(n, Complex{});
    const std::vector<Complex> logs = diag_log_near(f, zero);
    std::vector<Complex> x(n);
    for (std::size_t a = 0; a < n; ++a) x[a] = -logs[a] / kTwoPiI;
    node.state.s.push_back(sandwich(pb.vectors, x));
    node.tracks.push_back(CutTrack{pb.values, logs});
  }
  return node;
}

Ode2System::SValue Ode2System::eval_s(std::size_t j, Complex b, std::span<const ComplexMat> r,
                                      const CutTrack& prev, const ComplexMat* prev_s) const {
  const Complex kj = p_->cuts()[j];
  const std::size_t n = p_->dim();
  // The branch point itself is excluded from the cut; the limit b -> 0 is
  // approached from just above (only reached at the final node, where the
  // graded path has db/dsigma = 0).
  const double floor = 1e-13 * (1.0 + std::abs(kj));
  const Complex kappa = std::abs(b) < floor ? kj + Complex{0.0, floor} : kj + b;

  const EigenPair pb = eig(B_->eval(kappa), opts_.eig);
  const auto relabel = best_matching(pb.values, prev.beta);
  ComplexMat vectors(n);
  std::vector<Complex> beta(n);
  for (std::size_t i = 0; i < n; ++i) {
    beta[i] = pb.values[relabel[i]];
    for (std::size_t row = 0; row < n; ++row) vectors(row, i) = pb.vectors(row, relabel[i]);
  }

  const ComplexMat d = mat_inv(vectors) * p_->eval_H(j, kappa) * vectors;
  std::vector<Complex> f(n);
  for (std::size_t i = 0; i < n; ++i) f[i] = d(i, i);
  std::vector<Complex> logs = diag_log_near(f, prev.logs);
  std::vector<Complex> x(n);
  for (std::size_t i = 0; i < n; ++i) x[i] = -logs[i] / kTwoPiI;

  ComplexMat y = ComplexMat::identity(n);
  const auto& poles = B_->poles;
  for (std::size_t l = 0; l < poles.size(); ++l) y += r[l] / (kappa - poles[l]);

  SValue out;
  if (opts_.matching == MatchMode::continuity && prev_s) {
    out.s = match_s(x, y, *prev_s, opts_.ambiguity_ratio);
  } else {
    out.s = match_s_spectral(x, beta, y, &out.spectrum_mismatch);
  }
  out.track = CutTrack{std::move(beta), std::move(logs)};
  out.x = std::move(x);
  out.y = std::move(y);
  return out;
}

std::vector<ComplexMat> Ode2System::rhs(Complex b, std::span<const ComplexMat> r,
                                        std::span<const ComplexMat> s) const {
  const auto& poles = B_->poles;
  const auto& cuts = p_->cuts();
  std::vector<ComplexMat> out;
  out.reserve(r.size());
  for (std::size_t l = 0; l < r.size(); ++l) {
    ComplexMat acc = ComplexMat::zero(p_->dim());
    for (std::size_t j = 0; j < cuts.size(); ++j)
      acc += commutator(s[j], r[l]) / (poles[l] - (cuts[j] + b));
    out.push_back(std::move(acc));
  }
  return out;
}

std::vector<Ode2Node> Ode2System::integrate(const Ode2Node& start, const PathSegment& segment,
                                            std::size_t steps,
                                            Ode2Diagnostics* diagnostics) const {
  if (steps == 0) throw Error(ErrorCode::InvalidArgument, "ODE2 needs at least one step");
  const std::size_t half_steps = 2 * steps;
  const double hs = 1.0 / static_cast<double>(half_steps);
  const std::size_t cuts = p_->cuts().size();

  std::vector<Ode2Node> nodes;
  nodes.reserve(half_steps + 1);
  nodes.push_back(start);
  nodes.back().db = segment.derivative(0.0);

  using Residues = std::vector<ComplexMat>;
  auto axpy = [](const Residues& r, double h, const Residues& d) {
    Residues out = r;
    for (std::size_t l = 0; l < out.size(); ++l) out[l] += h * d[l];
    return out;
  };

  for (std::size_t i = 0; i < half_steps; ++i) {
    const double sigma = static_cast<double>(i) * hs;
    const Complex b_next = segment.at(sigma + hs);
    try {
      const Ode2Node& cur = nodes[i];
      auto deriv = [&](double sg, const Residues& r) {
        const Complex b = segment.at(sg);
        std::vector<ComplexMat> s;
        s.reserve(cuts);
        for (std::size_t j = 0; j < cuts; ++j)
          s.push_back(eval_s(j, b, r, cur.tracks[j], &cur.state.s[j]).s);
        Residues d = rhs(b, r, s);
        const Complex db = segment.derivative(sg);
        for (auto& m : d) m *= db;
        return d;
      };
      const Residues& r0 = cur.state.r;
      const Residues k1 = deriv(sigma, r0);
      const Residues k2 = deriv(sigma + hs / 2, axpy(r0, hs / 2, k1));
      const Residues k3 = deriv(sigma + hs / 2, axpy(r0, hs / 2, k2));
      const Residues k4 = deriv(sigma + hs, axpy(r0, hs, k3));

      Ode2Node next;
      next.state.b = b_next;
      next.db = segment.derivative(sigma + hs);
      next.state.r = r0;
      for (std::size_t l = 0; l < r0.size(); ++l)
        next.state.r[l] += (hs / 6.0) * (k1[l] + 2.0 * k2[l] + 2.0 * k3[l] + k4[l]);

      for (std::size_t j = 0; j < cuts; ++j) {
        SValue sv = eval_s(j, b_next, next.state.r, cur.tracks[j], &cur.state.s[j]);
        if (diagnostics) {
          diagnostics->spectrum_mismatch =
              std::max(diagnostics->spectrum_mismatch, sv.spectrum_mismatch);
          if (opts_.matching == MatchMode::spectral) {
            try {
              const ComplexMat alt = match_s(sv.x, sv.y, cur.state.s[j], opts_.ambiguity_ratio);
              if ((alt - sv.s).norm_inf() > 1e-8 * (1.0 + sv.s.norm_inf()))
                ++diagnostics->continuity_disagreements;
            } catch (const Error&) {
              ++diagnostics->continuity_disagreements;
            }
          }
        }
        next.state.s.push_back(std::move(sv.s));
        next.tracks.push_back(std::move(sv.track));
      }
      nodes.push_back(std::move(next));
    } catch (const Error& e) {
      rethrow_at(e, b_next);
    }
  }
  return nodes;
}

void Ode2System::diagnose(std::span<const Ode2Node> nodes, Ode2Diagnostics& out) const {
  const auto& poles = B_->poles;
  const auto& cuts = p_->cuts();
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    const Ode2State& st = nodes[i].state;
    for (std::size_t j = 0; j < cuts.size(); ++j) {
      const Complex kappa = cuts[j] + st.b;
      ComplexMat c = ComplexMat::zero(p_->dim());
      double scale = 0.0;
      for (std::size_t l = 0; l < poles.size(); ++l) {
        const Complex den = poles[l] - kappa;
        c += commutator(st.s[j], st.r[l]) / den;
        scale += st.r[l].norm_inf() / std::abs(den);
      }
      scale *= st.s[j].norm_inf();
      if (scale > 0.0) out.constraint_residual = std::max(out.constraint_residual, c.norm_inf() / scale);
    }
    for (std::size_t l = 0; l < st.r.size(); ++l) {
      const std::vector<Complex> ev = eigenvalues(st.r[l]);
      double cost = 0.0;
      (void)best_matching(ev, t_spectra_[l], &cost);
      out.isospectral_drift = std::max(out.isospectral_drift, cost);
    }
    if (i > 0) {
      const double db = std::abs(st.b - nodes[i - 1].state.b);
      if (db > 0.0) {
        for (std::size_t j = 0; j < cuts.size(); ++j) {
          const double ds = (st.s[j] - nodes[i - 1].state.s[j]).norm_inf();
          out.continuity_constant = std::max(out.continuity_constant, ds / db);
        }
      }
    }
  }
}

Ode2State init_state(const FactorizationProblem& p, const CommutantB& B, double L,
                     const Ode2Options& opts) {
  return Ode2System(p, B, opts).initial(L).state;
}

std::vector<ComplexMat> ode2_rhs(const Ode2State& state, const FactorizationProblem& p,
                                 const CommutantB& B) {
  return Ode2System(p, B).rhs(state.b, state.r, state.s);
}

Ode2Trajectory integrate(const FactorizationProblem& p, const CommutantB& B, double L,
                         std::size_t steps, const Ode2Options& opts) {
  const Ode2System sys(p, B, opts);
  Ode2Trajectory traj;
  traj.L = L;
  traj.steps = steps;
  traj.sigma_step = 1.0 / (2.0 * static_cast<double>(steps));
  traj.path = PathSegment::graded(Complex{0.0, L}, Complex{});
  traj.nodes = sys.integrate(sys.initial(L), traj.path, steps, &traj.diagnostics);
  sys.diagnose(traj.nodes, traj.diagnostics);
  return traj;
}

double verify_truncation(const FactorizationProblem& p, const CommutantB& B, double L,
                         std::size_t steps, const Ode2Options& opts) {
  const Ode2System sys(p, B, opts);
  const auto nodes = sys.integrate(
      sys.initial(2.0 * L), PathSegment::linear(Complex{0.0, 2.0 * L}, Complex{0.0, L}), steps);
  const Ode2Node direct = sys.initial(L);
  double worst = 0.0;
  for (std::size_t j = 0; j < direct.state.s.size(); ++j)
    worst = std::max(worst, (nodes.back().state.s[j] - direct.state.s[j]).norm_inf());
  return worst;
}

void write_trajectory_csv(std::ostream& out, const Ode2Trajectory& trajectory) {
  if (trajectory.nodes.empty()) return;
  const auto& first = trajectory.nodes.front().state;
  const std::size_t n = first.r.empty() ? 0 : first.r.front().dim();
  out << "im_b";
  auto header = [&](const char* name, std::size_t count) {
    for (std::size_t m = 0; m < count; ++m)
      for (std::size_t a = 0; a < n; ++a)
        for (std::size_t c = 0; c < n; ++c)
          for (const char* part : {"re", "im"})
            out << ',' << name << m + 1 << '_' << a + 1 << c + 1 << '_' << part;
  };
  header("r", first.r.size());
  header("s", first.s.size());
  out << '\n';
  char buf[64];
  auto put = [&](double v) {
    std::snprintf(buf, sizeof buf, ",%.17g", v);
    out << buf;
  };
  for (const auto& node : trajectory.nodes) {
    std::snprintf(buf, sizeof buf, "%.17g", node.state.b.imag());
    out << buf;
    for (const auto* group : {&node.state.r, &node.state.s})
      for (const auto& m : *group)
        for (Complex v : m.data()) {
          put(v.real());
          put(v.imag());
        }
    out << '\n';
  }
}

}  // namespace whf
