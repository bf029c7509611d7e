#include "whf/validate.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <ostream>

#include <json.hpp>

#include "whf/error.hpp"

namespace whf {

namespace {

constexpr std::array<double, 8> kGaussNodes = {
    -0.9602898564975363, -0.7966664774136267, -0.5255324099163290, -0.1834346424956498,
    0.1834346424956498,  0.5255324099163290,  0.7966664774136267,  0.9602898564975363};
constexpr std::array<double, 8> kGaussWeights = {
    0.1012285362903763, 0.2223810344533745, 0.3137066458778873, 0.3626837833783620,
    0.3626837833783620, 0.3137066458778873, 0.2223810344533745, 0.1012285362903763};

Complex closer_sign(Complex value, Complex reference) {
  return std::abs(value - reference) <= std::abs(value + reference) ? value : -value;
}

}  // namespace

KhrapkovReference::KhrapkovReference(KhrapkovSpec spec) : spec_(std::move(spec)) {
  const auto& p = spec_.problem;
  auto phi = p.phi();
  if (!phi) {
    throw Error(ErrorCode::InvalidArgument,
                "the closed-form reference needs a 2x2 traceless Lambda (Lambda^2 = phi I)");
  }
  if (spec_.cut >= p.cuts().size()) throw Error(ErrorCode::InvalidArgument, "no such cut");
  if (spec_.panels == 0 || !(spec_.truncation > 0.0)) {
    throw Error(ErrorCode::InvalidArgument, "quadrature needs panels > 0 and truncation > 0");
  }
  phi_ = std::move(*phi);
  if (phi_.degree() % 2 != 0 || phi_.is_zero()) {
    throw Error(ErrorCode::InvalidArgument, "phi must have even degree");
  }
  half_degree_ = phi_.degree() / 2;
  sqrt_lc_ = std::sqrt(phi_.leading());
  k1_ = p.cuts()[spec_.cut];

  // Lambda / sqrt(phi) at infinity, on the branch sqrt(phi) ~ sqrt(lc) k^n.
  lambda_inf_ = ComplexMat(2);
  for (std::size_t a = 0; a < 2; ++a) {
    for (std::size_t c = 0; c < 2; ++c) {
      const auto& coeffs = p.lambda_entry(a, c).coeffs();
      if (coeffs.size() > half_degree_ + 1) {
        throw Error(ErrorCode::InvalidArgument, "Lambda grows faster than sqrt(phi)");
      }
      if (coeffs.size() == half_degree_ + 1) lambda_inf_(a, c) = coeffs.back() / sqrt_lc_;
    }
  }
}

std::vector<KhrapkovReference::Node> KhrapkovReference::nodes(
    std::span<const PathSegment> top_down, std::span<const std::size_t> panels,
    Complex* sqrt_phi_last, Complex* lp_last, Complex* lm_last) const {
  std::vector<Node> out;
  bool first = true;
  Complex sp_prev{}, lp_prev{}, lm_prev{};
  for (std::size_t s = 0; s < top_down.size(); ++s) {
    const PathSegment& seg = top_down[s];
    const std::size_t count = panels[s];
    const double width = 1.0 / static_cast<double>(count);
    for (std::size_t panel = 0; panel < count; ++panel) {
      for (std::size_t q = 0; q < kGaussNodes.size(); ++q) {
        const double sigma = (static_cast<double>(panel) + 0.5 * (1.0 + kGaussNodes[q])) * width;
        const Complex tau = k1_ + seg.at(sigma);
        // Segments run downward; the integrals are taken upward.
        const Complex weight = -seg.derivative(sigma) * (0.5 * kGaussWeights[q] * width);

        Complex sp = std::sqrt(phi_(tau));
        if (first) {
          Complex ref = sqrt_lc_;
          for (std::size_t m = 0; m < half_degree_; ++m) ref *= tau;
          sp = closer_sign(sp, ref);
        } else {
          sp = closer_sign(sp, sp_prev);
        }
        const auto [h0, h1] = spec_.problem.jump_coefficients(spec_.cut, tau);
        const Complex lp = log_near(h0 + h1 * sp, lp_prev);
        const Complex lm = log_near(h0 - h1 * sp, lm_prev);
        const Complex four_pi_i = 2.0 * kTwoPiI;
        out.push_back({tau, weight, -(lp + lm) / four_pi_i, -(lp - lm) / (four_pi_i * sp)});
        sp_prev = sp;
        lp_prev = lp;
        lm_prev = lm;
        first = false;
      }
    }
  }
  if (sqrt_phi_last) *sqrt_phi_last = sp_prev;
  if (lp_last) *lp_last = lp_prev;
  if (lm_last) *lm_last = lm_prev;
  return out;
}

std::vector<PathSegment> KhrapkovReference::straight_path(Complex b, double top) const {
  return {PathSegment::graded(Complex{0.0, top}, b)};
}

KhrapkovReference::Integrals KhrapkovReference::integrate(std::span<const Node> nodes, Complex k) {
  Integrals in{};
  for (const auto& n : nodes) {
    const Complex kernel = n.weight / (k - n.tau);
    in.xibar -= n.xi * kernel;
    in.etabar -= n.eta * kernel;
    in.zeta -= n.eta * n.weight;
  }
  return in;
}

ComplexMat KhrapkovReference::assemble(const Integrals& in, Complex k) const {
  const Complex sp = std::sqrt(phi_(k));
  const Complex ch = std::cosh(sp * in.etabar);
  // sinh(sp x)/sp is even in sp and tends to x as phi(k) -> 0.
  const Complex sh = std::abs(sp) > 1e-150 ? std::sinh(sp * in.etabar) / sp : in.etabar;
  const ComplexMat I = ComplexMat::identity(2);
  const ComplexMat ut = std::exp(in.xibar) * (ch * I + sh * spec_.problem.eval_lambda(k));
  const ComplexMat q = std::cosh(in.zeta) * I + std::sinh(in.zeta) * lambda_inf_;
  return mat_inv(q) * ut;
}

ComplexMat KhrapkovReference::U_with(Complex b, Complex k, std::size_t panels, double top) const {
  if (b.imag() >= top) return ComplexMat::identity(2);
  const auto path = straight_path(b, top);
  const std::size_t counts[] = {panels};
  return assemble(integrate(nodes(path, counts), k), k);
}

ComplexMat KhrapkovReference::U(Complex b, Complex k) const {
  return U_with(b, k, spec_.panels, spec_.truncation);
}

double KhrapkovReference::convergence(Complex b, Complex k) const {
  const ComplexMat a = U_with(b, k, spec_.panels, spec_.truncation);
  const ComplexMat c = U_with(b, k, 2 * spec_.panels, 2.0 * spec_.truncation);
  return (a - c).max_abs();
}

ComplexMat KhrapkovReference::U_checked(Complex b, Complex k, double tolerance) const {
  const ComplexMat a = U_with(b, k, spec_.panels, spec_.truncation);
  const ComplexMat c = U_with(b, k, 2 * spec_.panels, 2.0 * spec_.truncation);
  const double diff = (a - c).max_abs();
  if (!(diff <= tolerance)) {
    throw Error(ErrorCode::QuadratureNotConverged,
                "panel doubling changes the reference by " + std::to_string(diff));
  }
  return a;
}

ComplexMat KhrapkovReference::U_shore(double height, Contour side, double delta,
                                      double margin) const {
  if (side == Contour::straight) {
    throw Error(ErrorCode::InvalidArgument, "shore value needs gamma_plus or gamma_minus");
  }
  if (!(height > margin) || !(height + margin < spec_.truncation)) {
    throw Error(ErrorCode::InvalidArgument, "shore height outside (margin, truncation)");
  }
  const double x = side == Contour::gamma_plus ? -delta : delta;
  const Complex hi{0.0, height + margin}, lo{0.0, height - margin};
  const PathSegment path[] = {
      PathSegment::graded(Complex{0.0, spec_.truncation}, hi),
      PathSegment::linear(hi, hi + x),
      PathSegment::linear(hi + x, lo + x),
      PathSegment::linear(lo + x, lo),
      PathSegment::graded(lo, Complex{}),
  };
  const std::size_t detour = std::max<std::size_t>(16, spec_.panels / 4);
  const std::size_t counts[] = {spec_.panels, detour, detour, detour, spec_.panels};
  const Complex k = k1_ + Complex{0.0, height};
  return assemble(integrate(nodes(path, counts), k), k);
}

Complex KhrapkovReference::zeta(Complex b) const {
  if (b.imag() >= spec_.truncation) return {};
  const auto path = straight_path(b, spec_.truncation);
  const std::size_t counts[] = {spec_.panels};
  Complex z{};
  for (const auto& n : nodes(path, counts)) z -= n.eta * n.weight;
  return z;
}

ComplexMat KhrapkovReference::Q(Complex b) const {
  const Complex z = zeta(b);
  return std::cosh(z) * ComplexMat::identity(2) + std::sinh(z) * lambda_inf_;
}

ComplexMat KhrapkovReference::s_ref(Complex b) const {
  const auto path = straight_path(b, spec_.truncation);
  const std::size_t counts[] = {spec_.panels};
  Complex sp_last{}, lp_last{}, lm_last{};
  const auto ns = nodes(path, counts, &sp_last, &lp_last, &lm_last);
  Complex z{};
  for (const auto& n : ns) z -= n.eta * n.weight;

  const double floor = 1e-13 * (1.0 + std::abs(k1_));
  const Complex kappa = std::abs(b) < floor ? k1_ + Complex{0.0, floor} : k1_ + b;
  const Complex sp = closer_sign(std::sqrt(phi_(kappa)), sp_last);
  const auto [h0, h1] = spec_.problem.jump_coefficients(spec_.cut, kappa);
  const Complex lp = log_near(h0 + h1 * sp, lp_last);
  const Complex lm = log_near(h0 - h1 * sp, lm_last);
  const Complex four_pi_i = 2.0 * kTwoPiI;
  const Complex xi = -(lp + lm) / four_pi_i;
  const Complex eta = -(lp - lm) / (four_pi_i * sp);

  const ComplexMat q = std::cosh(z) * ComplexMat::identity(2) + std::sinh(z) * lambda_inf_;
  const ComplexMat tilde =
      xi * ComplexMat::identity(2) + eta * spec_.problem.eval_lambda(kappa);
  return mat_inv(q) * tilde * q;
}

std::vector<ComplexMat> KhrapkovReference::r_ref(Complex b, const CommutantB& B) const {
  const ComplexMat q = Q(b);
  const ComplexMat qi = mat_inv(q);
  std::vector<ComplexMat> out;
  for (const auto& t : B.residues) out.push_back(qi * t * q);
  return out;
}

std::vector<double> jump_residual(const FactorizationProblem& p, std::size_t j,
                                  std::span<const double> heights,
                                  std::span<const ComplexMat> U_plus,
                                  std::span<const ComplexMat> U_minus) {
  if (U_plus.size() != heights.size() || U_minus.size() != heights.size()) {
    throw Error(ErrorCode::InvalidArgument, "one shore pair per height expected");
  }
  if (j >= p.cuts().size()) throw Error(ErrorCode::InvalidArgument, "no such cut");
  std::vector<double> out;
  for (std::size_t i = 0; i < heights.size(); ++i) {
    const Complex k = p.cuts()[j] + Complex{0.0, heights[i]};
    const ComplexMat h = p.eval_H(j, k);
    const ComplexMat m = mat_inv(U_minus[i]) * U_plus[i] * mat_inv(h);
    out.push_back((m - ComplexMat::identity(p.dim())).norm_inf());
  }
  return out;
}

double b_invariance_check(const FactorizationProblem& p, const CommutantB& B,
                          const CommutantB& B_alt, double L, std::size_t steps,
                          const Ode2Options& opts) {
  const Ode2Trajectory a = integrate(p, B, L, steps, opts);
  const Ode2Trajectory c = integrate(p, B_alt, L, steps, opts);
  double worst = 0.0;
  for (std::size_t i = 0; i < a.nodes.size(); ++i)
    for (std::size_t j = 0; j < a.nodes[i].state.s.size(); ++j)
      worst = std::max(worst, (a.nodes[i].state.s[j] - c.nodes[i].state.s[j]).norm_inf());
  return worst;
}

void write_report_json(std::ostream& out, std::span<const CheckResult> checks) {
  nlohmann::ordered_json doc;
  bool all = true;
  auto& list = doc["checks"] = nlohmann::ordered_json::array();
  for (const auto& c : checks) {
    nlohmann::ordered_json j;
    j["name"] = c.name;
    j["value"] = c.value;
    j["tolerance"] = c.tolerance;
    j["passed"] = c.passed;
    if (!c.note.empty()) j["note"] = c.note;
    list.push_back(std::move(j));
    all = all && c.passed;
  }
  doc["passed"] = all;
  out << doc.dump(2) << '\n';
}

}  // namespace whf
