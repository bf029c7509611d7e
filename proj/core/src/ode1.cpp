#include "whf/ode1.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <ostream>
#include <string>
#include <thread>

#include <json.hpp>

#include "whf/error.hpp"

namespace whf {

namespace {

std::string fmt(Complex c) {
  char buf[80];
  std::snprintf(buf, sizeof buf, "%.6g%+.6gi", c.real(), c.imag());
  return buf;
}

/// Distance from z to the segment [0, top].
double distance_to_segment(Complex z, Complex top) {
  const double len2 = std::norm(top);
  if (len2 == 0.0) return std::abs(z);
  const double t = std::clamp((z * std::conj(top)).real() / len2, 0.0, 1.0);
  return std::abs(z - t * top);
}

const char* contour_name(Contour c) {
  switch (c) {
    case Contour::straight: return "straight";
    case Contour::gamma_plus: return "gamma_plus";
    case Contour::gamma_minus: return "gamma_minus";
  }
  return "?";
}

struct PointSolution {
  ComplexMat U;
  double closure = 0.0;
};

class PointSolver {
 public:
  PointSolver(const Ode2System& sys, const Ode2Trajectory& traj, const Ode1Options& opts)
      : sys_(sys), traj_(traj), opts_(opts), radius_(opts.collision_factor * traj.L) {}

  PointSolution solve(const EvalPoint& pt) const {
    if (pt.contour == Contour::straight) return {straight(pt.k), 0.0};
    return shore(pt);
  }

 private:
  ComplexMat coefficient(const Ode2Node& node, Complex k) const {
    // C = db/dsigma * S(b, k), so that RK4 runs in sigma.
    const auto& cuts = sys_.problem().cuts();
    ComplexMat c = ComplexMat::zero(sys_.problem().dim());
    for (std::size_t j = 0; j < cuts.size(); ++j) {
      const Complex den = k - (cuts[j] + node.state.b);
      if (std::abs(den) < radius_) {
        throw Error(ErrorCode::PoleCollision,
                    "k = " + fmt(k) + " meets the pole of S at b = " + fmt(node.state.b) +
                        "; points on a cut need a shore contour");
      }
      c += node.state.s[j] / den;
    }
    return node.db * c;
  }

  ComplexMat run(std::span<const Ode2Node> nodes, double sigma_step, Complex k,
                 const ComplexMat& start) const {
    std::vector<ComplexMat> c;
    c.reserve(nodes.size());
    for (const auto& node : nodes) c.push_back(coefficient(node, k));
    return ordered_exponential_nodes(c, sigma_step, start);
  }

  ComplexMat straight(Complex k) const {
    const Complex top{0.0, traj_.L};
    for (Complex kj : sys_.problem().cuts()) {
      if (distance_to_segment(k - kj, top) < radius_) {
        throw Error(ErrorCode::PoleCollision,
                    "k = " + fmt(k) + " lies on the cut from " + fmt(kj) +
                        "; request a shore contour instead");
      }
    }
    return run(traj_.nodes, traj_.sigma_step, k, ComplexMat::identity(sys_.problem().dim()));
  }

  PointSolution shore(const EvalPoint& pt) const {
    const auto& nodes = traj_.nodes;
    const double m = opts_.margin;
    const double t = pt.height;
    const std::size_t last = nodes.size() - 1;
    std::size_t ia = last + 1, ib = last + 1;
    for (std::size_t i = 0; i <= last; i += 2)
      if (nodes[i].state.b.imag() >= t + m) ia = i;
    for (std::size_t i = last + 1; i-- > 0;)
      if (i % 2 == 0 && nodes[i].state.b.imag() <= t - m) ib = i;
    if (ia > last || ib > last || ia >= ib) {
      throw Error(ErrorCode::InvalidArgument,
                  "shore height " + std::to_string(t) + " must lie in (" + std::to_string(m) +
                      ", L - " + std::to_string(m) + ")");
    }

    const Complex k = pt.k;
    ComplexMat U = run(std::span(nodes).first(ia + 1), traj_.sigma_step, k,
                       ComplexMat::identity(sys_.problem().dim()));

    const double x = pt.contour == Contour::gamma_plus ? -opts_.delta : opts_.delta;
    const Complex ba = nodes[ia].state.b, bb = nodes[ib].state.b;
    const PathSegment segments[] = {
        PathSegment::linear(ba, ba + x),
        PathSegment::linear(ba + x, bb + x),
        PathSegment::linear(bb + x, bb),
    };
    const double h_local = std::abs(nodes[ia].state.b - nodes[ia + 2].state.b);
    Ode2Node state = nodes[ia];
    for (const auto& seg : segments) {
      const auto steps = std::max<std::size_t>(
          2, static_cast<std::size_t>(std::ceil(seg.length() / h_local)));
      const auto detour = sys_.integrate(state, seg, steps);
      U = run(detour, 1.0 / (2.0 * static_cast<double>(steps)), k, U);
      state = detour.back();
    }
    double closure = 0.0;
    for (std::size_t l = 0; l < state.state.r.size(); ++l)
      closure = std::max(closure, (state.state.r[l] - nodes[ib].state.r[l]).norm_inf());

    U = run(std::span(nodes).subspan(ib), traj_.sigma_step, k, U);
    return {U, closure};
  }

  const Ode2System& sys_;
  const Ode2Trajectory& traj_;
  const Ode1Options& opts_;
  double radius_;
};

}  // namespace

EvalPoint EvalPoint::shore(const FactorizationProblem& p, std::size_t cut, double height,
                           Contour contour) {
  if (cut >= p.cuts().size()) throw Error(ErrorCode::InvalidArgument, "cut index out of range");
  if (!(height > 0.0)) throw Error(ErrorCode::InvalidArgument, "shore height must be positive");
  if (contour == Contour::straight) {
    throw Error(ErrorCode::InvalidArgument, "shore points need gamma_plus or gamma_minus");
  }
  return {p.cuts()[cut] + Complex{0.0, height}, contour, cut, height};
}

ComplexMat ode1_rhs(Complex b, const ComplexMat& U, Complex k, std::span<const Complex> cuts,
                    std::span<const ComplexMat> s, double safety_radius) {
  ComplexMat S = ComplexMat::zero(U.dim());
  for (std::size_t j = 0; j < cuts.size(); ++j) {
    const Complex den = k - (cuts[j] + b);
    if (std::abs(den) < safety_radius) {
      throw Error(ErrorCode::PoleCollision, "k = " + fmt(k) + " meets the pole of S at b = " +
                                                fmt(b));
    }
    S += s[j] / den;
  }
  return S * U;
}

ComplexMat ordered_exponential(const std::function<ComplexMat(double)>& coefficient,
                               std::size_t steps, const ComplexMat& start) {
  if (steps == 0) throw Error(ErrorCode::InvalidArgument, "need at least one step");
  const double h = 1.0 / static_cast<double>(steps);
  ComplexMat X = start;
  for (std::size_t i = 0; i < steps; ++i) {
    const double sigma = static_cast<double>(i) * h;
    const ComplexMat c0 = coefficient(sigma);
    const ComplexMat c1 = coefficient(sigma + h / 2);
    const ComplexMat c2 = coefficient(sigma + h);
    const ComplexMat a1 = c0 * X;
    const ComplexMat a2 = c1 * (X + (h / 2) * a1);
    const ComplexMat a3 = c1 * (X + (h / 2) * a2);
    const ComplexMat a4 = c2 * (X + h * a3);
    X += (h / 6) * (a1 + 2.0 * a2 + 2.0 * a3 + a4);
  }
  return X;
}

ComplexMat ordered_exponential_nodes(std::span<const ComplexMat> c, double sigma_step,
                                     const ComplexMat& start) {
  if (c.size() < 3 || c.size() % 2 == 0) {
    throw Error(ErrorCode::InvalidArgument, "need an odd number (>= 3) of coefficient nodes");
  }
  const double h = 2.0 * sigma_step;
  ComplexMat X = start;
  for (std::size_t i = 0; i + 2 < c.size(); i += 2) {
    const ComplexMat a1 = c[i] * X;
    const ComplexMat a2 = c[i + 1] * (X + (h / 2) * a1);
    const ComplexMat a3 = c[i + 1] * (X + (h / 2) * a2);
    const ComplexMat a4 = c[i + 2] * (X + h * a3);
    X += (h / 6) * (a1 + 2.0 * a2 + 2.0 * a3 + a4);
  }
  return X;
}

FactorizationResult solve_U(const Ode2System& system, const Ode2Trajectory& trajectory,
                            std::span<const EvalPoint> points, const Ode1Options& opts) {
  const std::size_t count = points.size();
  FactorizationResult result;
  result.points.assign(points.begin(), points.end());
  result.U.resize(count);
  result.det_abs.resize(count);
  result.detour_closure.resize(count);
  result.L = trajectory.L;
  result.steps = trajectory.steps;

  const PointSolver solver(system, trajectory, opts);
  std::vector<std::exception_ptr> errors(count);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < count; i = next++) {
      try {
        PointSolution sol = solver.solve(points[i]);
        const double d = std::abs(det(sol.U));
        if (!(d >= opts.det_floor)) {
          throw Error(ErrorCode::NonInvertible, "|det U| = " + std::to_string(d) +
                                                    " at k = " + fmt(points[i].k) +
                                                    "; refine the grid");
        }
        result.U[i] = std::move(sol.U);
        result.det_abs[i] = d;
        result.detour_closure[i] = sol.closure;
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };

  std::size_t threads = opts.threads ? opts.threads : std::thread::hardware_concurrency();
  threads = std::clamp<std::size_t>(threads, 1, std::max<std::size_t>(count, 1));
  {
    std::vector<std::jthread> pool;
    for (std::size_t t = 1; t < threads; ++t) pool.emplace_back(worker);
    worker();
  }
  for (const auto& e : errors)
    if (e) std::rethrow_exception(e);
  return result;
}

void write_result_csv(std::ostream& out, const FactorizationResult& result) {
  out << "re_k,im_k";
  const std::size_t n = result.U.empty() ? 2 : result.U.front().dim();
  for (std::size_t a = 0; a < n; ++a)
    for (std::size_t c = 0; c < n; ++c)
      out << ",re_U" << a + 1 << c + 1 << ",im_U" << a + 1 << c + 1;
  out << ",abs_det_U\n";
  char buf[64];
  for (std::size_t i = 0; i < result.U.size(); ++i) {
    std::snprintf(buf, sizeof buf, "%.17g,%.17g", result.points[i].k.real(),
                  result.points[i].k.imag());
    out << buf;
    for (Complex v : result.U[i].data()) {
      std::snprintf(buf, sizeof buf, ",%.17g,%.17g", v.real(), v.imag());
      out << buf;
    }
    std::snprintf(buf, sizeof buf, ",%.17g\n", result.det_abs[i]);
    out << buf;
  }
}

void write_result_json(std::ostream& out, const FactorizationResult& result,
                       std::span<const double> residuals) {
  nlohmann::ordered_json doc;
  doc["L"] = result.L;
  doc["steps"] = result.steps;
  auto& pts = doc["points"] = nlohmann::ordered_json::array();
  for (std::size_t i = 0; i < result.U.size(); ++i) {
    nlohmann::ordered_json p;
    p["k"] = {result.points[i].k.real(), result.points[i].k.imag()};
    p["contour"] = contour_name(result.points[i].contour);
    auto& u = p["U"] = nlohmann::ordered_json::array();
    for (Complex v : result.U[i].data()) u.push_back({v.real(), v.imag()});
    p["abs_det_U"] = result.det_abs[i];
    if (result.points[i].contour != Contour::straight)
      p["detour_closure"] = result.detour_closure[i];
    pts.push_back(std::move(p));
  }
  if (!residuals.empty())
    doc["jump_residuals"] = std::vector<double>(residuals.begin(), residuals.end());
  out << doc.dump(2) << '\n';
}

}  // namespace whf
