#include "dho/classical_dynamics.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <string>

#include "dho/error.hpp"

namespace dho {

namespace {

using Vec = std::array<double, 2>;

constexpr double kPi = std::numbers::pi;
constexpr double kCrossingTimeTolerance = 1e-12;

Vec axpy(const Vec& y, double h, std::initializer_list<std::pair<double, const Vec*>> terms) {
  Vec out = y;
  for (const auto& [coef, k] : terms) {
    out[0] += h * coef * (*k)[0];
    out[1] += h * coef * (*k)[1];
  }
  return out;
}

// Dormand-Prince 5(4) tableau.
namespace dp {
constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
constexpr double a21 = 1.0 / 5;
constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                 a54 = -212.0 / 729;
constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                 a65 = -5103.0 / 18656;
constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192, b5 = -2187.0 / 6784,
                 b6 = 11.0 / 84;
constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920, e5 = -17253.0 / 339200,
                 e6 = 22.0 / 525, e7 = -1.0 / 40;
}  // namespace dp

struct StepResult {
  Vec y;
  Vec f;  // derivative at the new point (FSAL)
  double error_norm;
};

template <class Rhs>
StepResult dopri_step(const Rhs& rhs, const Vec& y, const Vec& f0, double h, double rel_tol,
                      double abs_tol) {
  using namespace dp;
  const Vec k1 = f0;
  const Vec k2 = rhs(axpy(y, h, {{a21, &k1}}));
  const Vec k3 = rhs(axpy(y, h, {{a31, &k1}, {a32, &k2}}));
  const Vec k4 = rhs(axpy(y, h, {{a41, &k1}, {a42, &k2}, {a43, &k3}}));
  const Vec k5 = rhs(axpy(y, h, {{a51, &k1}, {a52, &k2}, {a53, &k3}, {a54, &k4}}));
  const Vec k6 = rhs(axpy(y, h, {{a61, &k1}, {a62, &k2}, {a63, &k3}, {a64, &k4}, {a65, &k5}}));
  const Vec y1 = axpy(y, h, {{b1, &k1}, {b3, &k3}, {b4, &k4}, {b5, &k5}, {b6, &k6}});
  const Vec k7 = rhs(y1);
  double sum = 0.0;
  for (int i = 0; i < 2; ++i) {
    const double err =
        h * (e1 * k1[i] + e3 * k3[i] + e4 * k4[i] + e5 * k5[i] + e6 * k6[i] + e7 * k7[i]);
    const double scale = abs_tol + rel_tol * std::max(std::abs(y[i]), std::abs(y1[i]));
    sum += (err / scale) * (err / scale);
  }
  return {y1, k7, std::sqrt(sum / 2.0)};
}

// Cubic Hermite interpolant on [t0, t0 + h].
Vec hermite(const Vec& y0, const Vec& f0, const Vec& y1, const Vec& f1, double h, double theta) {
  const double t2 = theta * theta;
  const double t3 = t2 * theta;
  const double h00 = 2 * t3 - 3 * t2 + 1;
  const double h10 = t3 - 2 * t2 + theta;
  const double h01 = -2 * t3 + 3 * t2;
  const double h11 = t3 - t2;
  Vec out{};
  for (int i = 0; i < 2; ++i) out[i] = h00 * y0[i] + h10 * h * f0[i] + h01 * y1[i] + h11 * h * f1[i];
  return out;
}

// Adapter between a concrete coordinate system and the generic engine.
struct Coordinates {
  std::function<Vec(const Vec&)> rhs;
  std::function<PhaseState(const Vec&)> to_phase;
  std::function<double(const Vec&)> crossing_function;  // has the sign of v
};

int sign_of(double value) { return value > 0.0 ? 1 : (value < 0.0 ? -1 : 0); }

struct EngineOutput {
  std::vector<double> t;
  std::vector<Vec> y;
  std::vector<double> k;
  std::vector<int> branch;
  std::vector<int> winding;
  std::vector<CrossingEvent> crossings;
  std::size_t accepted = 0;
  std::size_t rejected = 0;
};

EngineOutput run_engine(const Coordinates& coords, const Vec& y0, const OscillatorParams& params,
                        TimeSpan span, const IntegratorConfig& config) {
  params.validate();
  config.validate();
  if (!(span.end > span.start) || !std::isfinite(span.start) || !std::isfinite(span.end)) {
    throw Error(ErrorCode::InvalidArgument, "time span must satisfy start < end");
  }
  if (!std::isfinite(y0[0]) || !std::isfinite(y0[1])) {
    throw Error(ErrorCode::InvalidArgument, "initial state must be finite");
  }

  auto k_of = [&](const Vec& y) {
    const PhaseState s = coords.to_phase(y);
    return k_general(s, params, flow_half_plane(s, params));
  };
  auto half_plane_of = [&](const Vec& y) {
    return flow_half_plane(coords.to_phase(y), params) == HalfPlane::Upper ? 1 : -1;
  };

  const double duration = span.end - span.start;
  const double max_step = std::min(config.max_step, 0.25 * kPi / params.omega);
  const double dt = config.dense_output_dt;
  const bool every_step = dt <= 0.0;
  std::vector<double> output_times;
  if (!every_step) {
    const auto n = static_cast<std::size_t>(std::floor(duration / dt + 1e-9));
    for (std::size_t i = 1; i <= n; ++i) output_times.push_back(span.start + static_cast<double>(i) * dt);
    if (output_times.empty() || span.end - output_times.back() > 1e-9 * dt) {
      output_times.push_back(span.end);
    } else {
      output_times.back() = span.end;
    }
  }

  EngineOutput out;
  auto record = [&](double t, const Vec& y, int branch, int winding) {
    out.t.push_back(t);
    out.y.push_back(y);
    out.k.push_back(k_of(y));
    out.branch.push_back(branch);
    out.winding.push_back(winding);
  };

  double t = span.start;
  Vec y = y0;
  Vec f = coords.rhs(y);
  int branch = 0;
  int winding = 0;
  record(t, y, branch, winding);

  std::size_t next_output = 0;
  double h = std::min(max_step, 1e-2 * duration);
  constexpr std::size_t kMaxSteps = 50'000'000;

  while (t < span.end) {
    if (out.accepted + out.rejected > kMaxSteps) {
      throw Error(ErrorCode::StepFailure, "step budget exhausted");
    }
    const double target = every_step ? span.end : output_times[next_output];
    const bool clipped = t + h >= target;
    const double step = clipped ? target - t : h;
    if (!(step > 1e-14 * std::max(1.0, std::abs(t)))) {
      throw Error(ErrorCode::StepFailure, "step size underflow at t = " + std::to_string(t));
    }

    const StepResult r = dopri_step(coords.rhs, y, f, step, config.rel_tol, config.abs_tol);
    if (!std::isfinite(r.error_norm) || !std::isfinite(r.y[0]) || !std::isfinite(r.y[1])) {
      ++out.rejected;
      h = 0.2 * step;
      continue;
    }
    const double factor =
        r.error_norm == 0.0 ? 5.0 : std::clamp(0.9 * std::pow(r.error_norm, -0.2), 0.2, 5.0);
    if (r.error_norm > 1.0) {
      ++out.rejected;
      h = step * std::min(1.0, factor);
      continue;
    }
    ++out.accepted;

    const double t_new = clipped ? target : t + step;
    const int plane_before = half_plane_of(y);
    const int plane_after = half_plane_of(r.y);
    if (plane_before != plane_after) {
      // bisection on the Hermite interpolant of the crossing function
      double lo = 0.0;
      double hi = 1.0;
      const double g_lo = coords.crossing_function(y);
      while ((hi - lo) * step > kCrossingTimeTolerance) {
        const double mid = 0.5 * (lo + hi);
        const double g_mid = coords.crossing_function(hermite(y, f, r.y, r.f, step, mid));
        if (g_mid == 0.0) {
          lo = hi = mid;
          break;
        }
        if ((g_mid > 0.0) == (g_lo > 0.0) && g_lo != 0.0) {
          lo = mid;
        } else {
          hi = mid;
        }
      }
      // The Hermite interpolant is only fourth order; polish the root with
      // Newton iterations on a fresh Runge-Kutta sub-step from the step start.
      double tau = 0.5 * (lo + hi) * step;
      Vec y_cross = hermite(y, f, r.y, r.f, step, tau / step);
      for (int iter = 0; iter < 4 && tau > 0.0; ++iter) {
        y_cross = dopri_step(coords.rhs, y, f, tau, config.rel_tol, config.abs_tol).y;
        const Vec fc = coords.rhs(y_cross);
        const double eps = 1e-7;
        const double slope = (coords.crossing_function(axpy(y_cross, eps, {{1.0, &fc}})) -
                              coords.crossing_function(axpy(y_cross, -eps, {{1.0, &fc}}))) /
                             (2.0 * eps);
        if (slope == 0.0) break;
        const double delta = -coords.crossing_function(y_cross) / slope;
        tau = std::clamp(tau + delta, 0.0, step);
        if (std::abs(delta) < kCrossingTimeTolerance) break;
      }
      const double theta = tau / step;
      const PhaseState at = coords.to_phase(y_cross);
      const int side = sign_of(at.x);
      // clockwise: upper -> lower at x > 0, lower -> upper at x < 0
      const bool clockwise = (plane_before == 1) == (side > 0);
      branch += clockwise ? 1 : -1;
      out.crossings.push_back({t + theta * step, side, k_of(y), k_of(r.y)});
    }

    const PhaseState before = coords.to_phase(y);
    const PhaseState after = coords.to_phase(r.y);
    if ((before.x > 0.0) != (after.x > 0.0)) {
      const bool clockwise = (after.x > 0.0) == (after.v > 0.0);
      winding += clockwise ? 1 : -1;
    }

    t = t_new;
    y = r.y;
    f = r.f;
    if (every_step) {
      record(t, y, branch, winding);
    } else if (clipped) {
      record(t, y, branch, winding);
      ++next_output;
      if (next_output == output_times.size()) break;
    }
    // a clipped step says little about the next one, keep the old proposal
    h = std::min(max_step, clipped ? std::max(h, step * factor) : step * factor);
  }
  return out;
}

template <class State, class ToState>
Trajectory<State> assemble(EngineOutput&& out, ToState to_state) {
  Trajectory<State> traj;
  traj.samples.reserve(out.t.size());
  for (std::size_t i = 0; i < out.t.size(); ++i) {
    traj.samples.push_back({out.t[i], to_state(out.y[i]), out.k[i], out.branch[i], out.winding[i]});
  }
  traj.crossings = std::move(out.crossings);
  traj.accepted_steps = out.accepted;
  traj.rejected_steps = out.rejected;
  return traj;
}

}  // namespace

void IntegratorConfig::validate() const {
  const bool ok = rel_tol > 0.0 && abs_tol > 0.0 && max_step > 0.0 && dense_output_dt >= 0.0 &&
                  std::isfinite(rel_tol) && std::isfinite(abs_tol) && std::isfinite(max_step) &&
                  std::isfinite(dense_output_dt);
  if (!ok) {
    throw Error(ErrorCode::InvalidArgument,
                "integrator tolerances and max_step must be positive, dense_output_dt >= 0");
  }
}

PhaseTrajectory integrate_xv(PhaseState initial, const OscillatorParams& params, TimeSpan span,
                             const IntegratorConfig& config) {
  Coordinates coords{
      [&](const Vec& y) {
        const PhaseState d = velocity_field({y[0], y[1]}, params);
        return Vec{d.x, d.v};
      },
      [](const Vec& y) { return PhaseState{y[0], y[1]}; },
      [](const Vec& y) { return y[1]; },
  };
  auto out = run_engine(coords, {initial.x, initial.v}, params, span, config);
  return assemble<PhaseState>(std::move(out), [](const Vec& y) { return PhaseState{y[0], y[1]}; });
}

ActionAngleState action_angle_rhs(const ActionAngleState& s, const OscillatorParams& p) {
  const double sin_phi = std::sin(s.phi);
  return {-(p.omega + p.omega_alpha * std::sin(2.0 * s.phi)),
          -4.0 * p.omega_alpha * s.j * sin_phi * sin_phi};
}

ActionAngleTrajectory integrate_action_angle(ActionAngleState initial,
                                             const OscillatorParams& params, TimeSpan span,
                                             const IntegratorConfig& config,
                                             const ActionAngleRhs& rhs) {
  if (!(initial.j > 0.0)) {
    throw Error(ErrorCode::InvalidArgument, "initial action must be positive");
  }
  Coordinates coords{
      [&](const Vec& y) {
        const ActionAngleState d = rhs({y[0], y[1]}, params);
        return Vec{d.phi, d.j};
      },
      [&](const Vec& y) { return from_action_angle({y[0], std::max(y[1], 0.0)}, params); },
      [](const Vec& y) { return std::sin(y[0]); },
  };
  auto out = run_engine(coords, {initial.phi, initial.j}, params, span, config);
  return assemble<ActionAngleState>(std::move(out),
                                    [](const Vec& y) { return ActionAngleState{y[0], y[1]}; });
}

double analytic_phi(double t, double a, const OscillatorParams& params) {
  params.validate();
  const double arg = params.omega * t + a;
  if (std::abs(std::cos(arg)) < 1e-12) {
    throw Error(ErrorCode::PoleAt, "tan(omega t + a) is singular");
  }
  return -std::atan(std::tan(arg) - params.omega_alpha / params.omega);
}

double analytic_j(double t, double j0, const OscillatorParams& params) {
  params.validate();
  const double arg = params.omega * t;
  if (std::abs(std::cos(arg)) < 1e-12) {
    throw Error(ErrorCode::PoleAt, "tan(omega t) is singular");
  }
  const double u = std::tan(arg) - params.omega_alpha / params.omega;
  const double f = 4.0 * u * u * t / (1.0 + u * u);
  return j0 * std::exp(-params.omega_alpha * f);
}

double orbit_j_of_phi(double phi, double j_tilde, const OscillatorParams& params) {
  params.validate();
  const double denom = params.omega + params.omega_alpha * std::sin(phi);
  if (denom == 0.0) {
    throw Error(ErrorCode::DomainError, "omega + omega_alpha sin(phi) vanishes");
  }
  const double ratio = params.omega_alpha / params.omega;
  return j_tilde / denom * std::exp(2.0 * ratio * std::atan(std::tan(phi) + ratio));
}

std::vector<OrbitPoint> sample_orbit(const OscillatorParams& params, double j_tilde,
                                     std::size_t count) {
  std::vector<OrbitPoint> out;
  out.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    const double phi = 2.0 * kPi * static_cast<double>(i) / static_cast<double>(count);
    out.push_back({phi, orbit_j_of_phi(phi, j_tilde, params)});
  }
  return out;
}

double invariance_drift(const PhaseTrajectory& traj, std::size_t first, std::size_t last) {
  if (first > last || last >= traj.samples.size()) {
    throw Error(ErrorCode::InvalidArgument, "sample range out of bounds");
  }
  const auto& s0 = traj.samples[first];
  for (std::size_t i = first; i <= last; ++i) {
    if (traj.samples[i].branch_index != s0.branch_index) {
      throw Error(ErrorCode::SegmentSpansCrossing,
                  "samples " + std::to_string(first) + ".." + std::to_string(last) +
                      " straddle a v = 0 crossing");
    }
  }
  double worst = 0.0;
  for (std::size_t i = first; i <= last; ++i) {
    worst = std::max(worst, std::abs(traj.samples[i].k_value - s0.k_value) / std::abs(s0.k_value));
  }
  return worst;
}

AnalyticDeviation analytic_solution_deviation(const ActionAngleTrajectory& traj,
                                              const OscillatorParams& params) {
  AnalyticDeviation dev;
  if (traj.samples.empty()) return dev;
  const double t0 = traj.samples.front().t;
  const double phi0 = traj.samples.front().state.phi;
  const double j0 = traj.samples.front().state.j;
  // phi(0) = -arctan(tan a - omega_alpha / omega)
  const double a = std::atan(params.omega_alpha / params.omega - std::tan(phi0));
  for (const auto& s : traj.samples) {
    const double t = s.t - t0;
    if (std::abs(std::cos(params.omega * t + a)) < 1e-6 ||
        std::abs(std::cos(params.omega * t)) < 1e-6) {
      continue;
    }
    const double phi = analytic_phi(t, a, params);
    double diff = std::remainder(phi - s.state.phi, kPi);
    dev.max_phi_deviation = std::max(dev.max_phi_deviation, std::abs(diff));
    const double j = analytic_j(t, j0, params);
    dev.max_j_relative_deviation =
        std::max(dev.max_j_relative_deviation, std::abs(j - s.state.j) / s.state.j);
    ++dev.compared_samples;
  }
  return dev;
}

double orbit_deviation(const ActionAngleTrajectory& traj, const OscillatorParams& params,
                       std::size_t first, std::size_t last) {
  if (first > last || last >= traj.samples.size()) {
    throw Error(ErrorCode::InvalidArgument, "sample range out of bounds");
  }
  double log_offset = 0.0;
  for (std::size_t i = first; i <= last; ++i) {
    const auto& s = traj.samples[i].state;
    log_offset += std::log(s.j) - std::log(orbit_j_of_phi(s.phi, 1.0, params));
  }
  const double j_tilde = std::exp(log_offset / static_cast<double>(last - first + 1));
  double worst = 0.0;
  for (std::size_t i = first; i <= last; ++i) {
    const auto& s = traj.samples[i].state;
    worst = std::max(worst, std::abs(orbit_j_of_phi(s.phi, j_tilde, params) - s.j) / s.j);
  }
  return worst;
}

}  // namespace dho
