#include "dho/core_model.hpp"

#include <algorithm>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <cmath>
#include <numbers>
#include <string>
#include <vector>

#include "dho/error.hpp"

namespace dho {

namespace {

constexpr double kPi = std::numbers::pi;

void require_finite(PhaseState s) {
  if (!std::isfinite(s.x) || !std::isfinite(s.v)) {
    throw Error(ErrorCode::InvalidArgument, "phase state must be finite");
  }
}

void require_off_origin(PhaseState s) {
  require_finite(s);
  if (s.x == 0.0 && s.v == 0.0) {
    throw Error(ErrorCode::OriginUndefined, "state is the phase-space origin");
  }
}

void require_off_axis(PhaseState s) {
  require_finite(s);
  if (s.x == 0.0) {
    throw Error(ErrorCode::AxisUndefined, "x = 0 is outside the domain of the log term");
  }
}

// Reduced angle delta in [0, pi] for the underdamped arctangent, see g_function.
double underdamped_delta(PhaseState s, const OscillatorParams& p, std::optional<HalfPlane> side) {
  const double big_omega = std::sqrt(p.omega * p.omega - p.omega_alpha * p.omega_alpha);
  if (s.v == 0.0) {
    const bool upper = side ? *side == HalfPlane::Upper : s.x > 0.0;
    const bool positive_x = s.x > 0.0;
    // On v = 0 the two half-plane limits differ by exactly pi.
    return (upper == positive_x) ? 0.0 : kPi;
  }
  if (side && ((*side == HalfPlane::Upper) != (s.v > 0.0))) {
    throw Error(ErrorCode::InvalidArgument, "half-plane does not match the sign of v");
  }
  const double delta = std::atan2(big_omega * s.v, p.omega * p.omega * s.x + p.omega_alpha * s.v);
  return s.v > 0.0 ? delta : delta + kPi;
}

GValue g_impl(PhaseState s, const OscillatorParams& p, std::optional<HalfPlane> side) {
  p.validate();
  require_off_origin(s);
  switch (classify_regime(p)) {
    case DampingRegime::Underdamped: {
      const double big_omega = std::sqrt(p.omega * p.omega - p.omega_alpha * p.omega_alpha);
      const double beta = std::atan2(p.omega_alpha, big_omega);
      return {(beta + underdamped_delta(s, p, side)) / big_omega, false};
    }
    case DampingRegime::Critical: {
      const double den = p.omega_alpha * s.x + s.v;
      if (den == 0.0) {
        throw Error(ErrorCode::DomainError, "critical G is singular on v = -omega_alpha x");
      }
      // -1/(omega_alpha + v/x): d/dt [x / (omega_alpha x + v)] = 1 along the flow
      return {-s.x / den, false};
    }
    case DampingRegime::Overdamped: {
      const double mu = std::sqrt(p.omega_alpha * p.omega_alpha - p.omega * p.omega);
      const double num = p.omega_alpha * s.x + s.v - mu * s.x;
      const double den = p.omega_alpha * s.x + s.v + mu * s.x;
      if (num == 0.0 || den == 0.0) {
        throw Error(ErrorCode::DomainError, "overdamped G is singular on an eigen-direction");
      }
      const double ratio = num / den;
      return {std::log(std::abs(ratio)) / (2.0 * mu), ratio < 0.0};
    }
  }
  return {};
}

double k_general_impl(PhaseState s, const OscillatorParams& p, std::optional<HalfPlane> side) {
  const double g = g_impl(s, p, side).seconds;
  const double quad = s.v * s.v + 2.0 * p.omega_alpha * s.x * s.v + p.omega * p.omega * s.x * s.x;
  return 0.5 * p.mass * quad * std::exp(-2.0 * p.omega_alpha * g);
}

}  // namespace

void OscillatorParams::validate() const {
  const bool ok = std::isfinite(mass) && mass > 0.0 && std::isfinite(omega) && omega > 0.0 &&
                  std::isfinite(omega_alpha) && omega_alpha >= 0.0 && std::isfinite(hbar) &&
                  hbar > 0.0;
  if (!ok) {
    throw Error(ErrorCode::InvalidArgument,
                "oscillator parameters need mass, omega, hbar > 0 and omega_alpha >= 0");
  }
}

DampingRegime classify_regime(const OscillatorParams& params) {
  params.validate();
  const double w2 = params.omega * params.omega;
  const double diff = params.omega_alpha * params.omega_alpha - w2;
  if (std::abs(diff) <= kCriticalTolerance * w2) return DampingRegime::Critical;
  return diff < 0.0 ? DampingRegime::Underdamped : DampingRegime::Overdamped;
}

GValue g_function(PhaseState state, const OscillatorParams& params) {
  return g_impl(state, params, std::nullopt);
}

GValue g_function(PhaseState state, const OscillatorParams& params, HalfPlane side) {
  return g_impl(state, params, side);
}

double k_general(PhaseState state, const OscillatorParams& params) {
  return k_general_impl(state, params, std::nullopt);
}

double k_general(PhaseState state, const OscillatorParams& params, HalfPlane side) {
  return k_general_impl(state, params, side);
}

HalfPlane flow_half_plane(PhaseState state, const OscillatorParams& params) {
  if (state.v > 0.0) return HalfPlane::Upper;
  if (state.v < 0.0) return HalfPlane::Lower;
  // v' = -omega^2 x on the axis
  const double accel = velocity_field(state, params).v;
  return accel < 0.0 ? HalfPlane::Lower : HalfPlane::Upper;
}

double sho_energy(PhaseState s, const OscillatorParams& p) {
  return 0.5 * p.mass * (s.v * s.v + p.omega * p.omega * s.x * s.x);
}

double k_weak(PhaseState s, const OscillatorParams& p) {
  p.validate();
  require_off_origin(s);
  const double w = p.omega;
  const double angle = std::atan2(s.v, w * s.x);
  const double r2 = s.v * s.v + w * w * s.x * s.x;
  return sho_energy(s, p) + (p.mass * p.omega_alpha / w) * (s.x * s.v * w - r2 * angle);
}

double lagrangian_weak(PhaseState s, const OscillatorParams& p) {
  p.validate();
  require_off_axis(s);
  const double w = p.omega;
  const double wx = w * s.x;
  const double angle = std::atan(s.v / wx);
  const double log_term = std::log1p((s.v * s.v) / (wx * wx));
  return 0.5 * p.mass * (s.v * s.v - wx * wx) +
         (p.mass * p.omega_alpha / w) * ((wx * wx - s.v * s.v) * angle + wx * s.v * log_term);
}

double momentum_weak(PhaseState s, const OscillatorParams& p) {
  p.validate();
  require_off_axis(s);
  const double w = p.omega;
  const double wx = w * s.x;
  const double angle = std::atan(s.v / wx);
  const double log_term = std::log1p((s.v * s.v) / (wx * wx));
  return p.mass * s.v + (p.mass * p.omega_alpha / w) * (wx + wx * log_term - 2.0 * s.v * angle);
}

PhaseState velocity_field(PhaseState s, const OscillatorParams& p) {
  return {s.v, -p.omega * p.omega * s.x - 2.0 * p.omega_alpha * s.v};
}

double pde_residual(const StateFunction& k, PhaseState s, const OscillatorParams& p) {
  p.validate();
  require_finite(s);
  const double hx = fd_step(s.x);
  const double hv = fd_step(s.v);
  const double dk_dx = (k({s.x + hx, s.v}) - k({s.x - hx, s.v})) / (2.0 * hx);
  const double dk_dv = (k({s.x, s.v + hv}) - k({s.x, s.v - hv})) / (2.0 * hv);
  const PhaseState flow = velocity_field(s, p);
  return flow.x * dk_dx + flow.v * dk_dv;
}

double euler_lagrange_residual(PhaseState s, const OscillatorParams& p) {
  p.validate();
  require_off_axis(s);
  const double hx = fd_step(s.x);
  const double hv = fd_step(s.v);
  const double dp_dx =
      (momentum_weak({s.x + hx, s.v}, p) - momentum_weak({s.x - hx, s.v}, p)) / (2.0 * hx);
  const double dp_dv =
      (momentum_weak({s.x, s.v + hv}, p) - momentum_weak({s.x, s.v - hv}, p)) / (2.0 * hv);
  const double dl_dx =
      (lagrangian_weak({s.x + hx, s.v}, p) - lagrangian_weak({s.x - hx, s.v}, p)) / (2.0 * hx);
  const PhaseState flow = velocity_field(s, p);
  return flow.x * dp_dx + flow.v * dp_dv - dl_dx;
}

double default_quadrature_reference(PhaseState s, const OscillatorParams& p) {
  const double magnitude = p.omega * std::abs(s.x);
  return s.v < 0.0 ? -magnitude : magnitude;
}

double lagrangian_via_quadrature(const StateFunction& k, PhaseState s,
                                 const OscillatorParams& p, std::optional<double> xi_ref) {
  p.validate();
  require_finite(s);
  const double ref = xi_ref ? *xi_ref : default_quadrature_reference(s, p);
  if (ref == 0.0 || s.v == 0.0 || (ref > 0.0) != (s.v > 0.0)) {
    throw Error(ErrorCode::QuadraturePathInvalid,
                "integration path from xi_ref to v must not touch xi = 0");
  }
  if (ref == s.v) return 0.0;

  auto integrand = [&](double xi) { return k({s.x, xi}) / (xi * xi); };
  const double lo = std::min(ref, s.v);
  const double hi = std::max(ref, s.v);
  double error = 0.0;
  double l1 = 0.0;
  const double integral = boost::math::quadrature::gauss_kronrod<double, 31>::integrate(
      integrand, lo, hi, 15, 1e-14, &error, &l1);
  if (!std::isfinite(integral) || error > 1e-10 * std::max(l1, 1e-300)) {
    throw Error(ErrorCode::NonConvergence,
                "adaptive quadrature error estimate " + std::to_string(error));
  }
  const double oriented = s.v >= ref ? integral : -integral;
  return s.v * oriented;
}

ImplicitHamiltonian hamiltonian_implicit(double x, double p, const OscillatorParams& params,
                                         std::pair<double, double> v_bracket) {
  params.validate();
  require_off_axis({x, 0.0});
  auto [lo, hi] = v_bracket;
  if (!(lo < hi) || !std::isfinite(lo) || !std::isfinite(hi) || !std::isfinite(p)) {
    throw Error(ErrorCode::InvalidArgument, "velocity bracket must satisfy lo < hi");
  }
  auto residual = [&](double v) { return momentum_weak({x, v}, params) - p; };

  constexpr int kCells = 64;
  std::vector<double> grid(kCells + 1);
  std::vector<double> values(kCells + 1);
  for (int i = 0; i <= kCells; ++i) {
    grid[i] = lo + (hi - lo) * static_cast<double>(i) / kCells;
    values[i] = residual(grid[i]);
  }

  bool monotone = true;
  for (int i = 1; i < kCells; ++i) {
    const double d0 = values[i] - values[i - 1];
    const double d1 = values[i + 1] - values[i];
    if (d0 * d1 < 0.0) monotone = false;
  }

  constexpr double kVelocityTolerance = 1e-12;
  std::vector<double> roots;
  for (int i = 0; i <= kCells; ++i) {
    if (values[i] == 0.0) roots.push_back(grid[i]);
  }
  for (int i = 0; i < kCells; ++i) {
    double a = grid[i];
    double b = grid[i + 1];
    double fa = values[i];
    double fb = values[i + 1];
    if (fa == 0.0 || fb == 0.0 || (fa > 0.0) == (fb > 0.0)) continue;
    // bisection, with a secant proposal on odd iterations
    for (int iter = 0; iter < 200 && b - a > kVelocityTolerance; ++iter) {
      double trial = 0.5 * (a + b);
      if (iter % 2 == 1) {
        const double secant = b - fb * (b - a) / (fb - fa);
        if (secant > a && secant < b) trial = secant;
      }
      const double ft = residual(trial);
      if (ft == 0.0) {
        a = b = trial;
        break;
      }
      if ((ft > 0.0) == (fa > 0.0)) {
        a = trial;
        fa = ft;
      } else {
        b = trial;
        fb = ft;
      }
    }
    roots.push_back(std::abs(fa) <= std::abs(fb) ? a : b);
  }
  if (roots.empty()) {
    throw Error(ErrorCode::NoRootInBracket, "momentum_weak(x, v) = p has no sign change in bracket");
  }
  const double v = *std::min_element(roots.begin(), roots.end(), [](double l, double r) {
    return std::abs(l) < std::abs(r);
  });
  return {k_weak({x, v}, params), v, roots.size() > 1 || !monotone};
}

ActionAngleState to_action_angle(PhaseState s, const OscillatorParams& p) {
  p.validate();
  require_off_origin(s);
  const double w = p.omega;
  return {std::atan2(s.v, w * s.x), p.mass / (2.0 * w) * (s.v * s.v + w * w * s.x * s.x)};
}

PhaseState from_action_angle(ActionAngleState aa, const OscillatorParams& p) {
  p.validate();
  if (!(aa.j >= 0.0) || !std::isfinite(aa.phi) || !std::isfinite(aa.j)) {
    throw Error(ErrorCode::InvalidArgument, "action must be finite and non-negative");
  }
  const double w = p.omega;
  return {std::sqrt(2.0 * aa.j / (p.mass * w)) * std::cos(aa.phi),
          std::sqrt(2.0 * w * aa.j / p.mass) * std::sin(aa.phi)};
}

double k_action_angle(ActionAngleState aa, const OscillatorParams& p) {
  p.validate();
  return p.omega * aa.j + p.omega_alpha * aa.j * (std::sin(2.0 * aa.phi) - 2.0 * aa.phi);
}

namespace {
double log_cos_checked(double phi) {
  const double c = std::cos(phi);
  if (!(c > 0.0)) {
    throw Error(ErrorCode::DomainError, "ln(cos phi) undefined for cos phi <= 0");
  }
  return std::log(c);
}
}  // namespace

double lagrangian_action_angle(ActionAngleState aa, const OscillatorParams& p) {
  p.validate();
  const double log_cos = log_cos_checked(aa.phi);
  const double c2 = std::cos(2.0 * aa.phi);
  return -p.omega * aa.j * c2 +
         2.0 * p.omega_alpha * aa.j * (c2 - 4.0 * std::sin(2.0 * aa.phi) * log_cos);
}

double momentum_action_angle(ActionAngleState aa, const OscillatorParams& p) {
  p.validate();
  const double log_cos = log_cos_checked(aa.phi);
  const double s = std::sin(aa.phi);
  const double c = std::cos(aa.phi);
  return std::sqrt(2.0 * p.mass * p.omega * aa.j) * s +
         p.omega_alpha * std::sqrt(2.0 * p.mass * aa.j / p.omega) *
             (c * (1.0 - 2.0 * log_cos) - 2.0 * aa.phi * s);
}

}  // namespace dho
