#pragma once

#include <cstddef>
#include <functional>
#include <utility>
#include <vector>

#include "dho/core_model.hpp"

namespace dho {

struct IntegratorConfig {
  double rel_tol = 1e-10;
  double abs_tol = 1e-12;  // applied to every coordinate
  double max_step = 0.1;   // s
  // Spacing of recorded samples; 0 records every accepted step.
  double dense_output_dt = 0.05;

  void validate() const;
};

struct TimeSpan {
  double start = 0.0;
  double end = 0.0;
};

template <class State>
struct TrajectorySample {
  double t = 0.0;
  State state{};
  double k_value = 0.0;  // k_general on the half-plane the flow is in
  int branch_index = 0;  // signed count of v = 0 crossings so far
  int winding = 0;       // signed count of x = 0 crossings so far
};

struct CrossingEvent {
  double t_cross = 0.0;
  int side = 0;  // sign of x at the crossing
  double k_before = 0.0;
  double k_after = 0.0;
};

/// Samples are strictly increasing in t. branch_index changes only across an
/// entry of `crossings`. Both counters are positive for the clockwise motion
/// of the damped flow.
template <class State>
struct Trajectory {
  std::vector<TrajectorySample<State>> samples;
  std::vector<CrossingEvent> crossings;
  std::size_t accepted_steps = 0;
  std::size_t rejected_steps = 0;
};

using PhaseTrajectory = Trajectory<PhaseState>;
using ActionAngleTrajectory = Trajectory<ActionAngleState>;

/// Adaptive Dormand-Prince 5(4) integration of x' = v, v' = -omega^2 x - 2 omega_alpha v.
///
/// Steps are clipped to land on every sample time and capped at a quarter of
/// the undamped half-period, so a step holds at most one v = 0 crossing.
/// Crossings are found by a sign change of v between accepted steps and
/// refined by bisection on the cubic Hermite interpolant to 1e-12 s; k_before
/// and k_after are k_general at the two ends of the step that contains it.
/// Throws StepFailure if the step size collapses.
PhaseTrajectory integrate_xv(PhaseState initial, const OscillatorParams& params, TimeSpan span,
                             const IntegratorConfig& config = {});

using ActionAngleRhs =
    std::function<ActionAngleState(const ActionAngleState&, const OscillatorParams&)>;

/// phi' = -(omega + omega_alpha sin 2 phi), J' = -4 omega_alpha J sin^2 phi.
ActionAngleState action_angle_rhs(const ActionAngleState& state, const OscillatorParams& params);

/// Same engine as integrate_xv on (phi, J); phi is left unreduced. `rhs`
/// exists so validation fixtures can substitute a perturbed vector field.
ActionAngleTrajectory integrate_action_angle(ActionAngleState initial,
                                             const OscillatorParams& params, TimeSpan span,
                                             const IntegratorConfig& config = {},
                                             const ActionAngleRhs& rhs = action_angle_rhs);

/// -arctan(tan(omega t + a) - omega_alpha / omega). PoleAt where cos(omega t + a) = 0.
double analytic_phi(double t, double a, const OscillatorParams& params);

/// J0 exp(-omega_alpha f(t)), f = 4 u^2 t / (1 + u^2), u = tan(omega t) - omega_alpha / omega.
double analytic_j(double t, double j0, const OscillatorParams& params);

/// (J0 / (omega + omega_alpha sin phi)) exp((2 omega_alpha / omega) arctan(tan phi + omega_alpha / omega)).
/// Jumps where tan phi changes branch (phi = pi/2, 3pi/2, ...).
double orbit_j_of_phi(double phi, double j_tilde, const OscillatorParams& params);

struct OrbitPoint {
  double phi = 0.0;
  double j = 0.0;
};

/// `count` points with phi = 2 pi i / count on [0, 2 pi).
std::vector<OrbitPoint> sample_orbit(const OscillatorParams& params, double j_tilde,
                                     std::size_t count);

/// max |K(t) - K(t0)| / K(t0) over samples [first, last] (inclusive).
/// SegmentSpansCrossing if a v = 0 crossing lies inside the range.
double invariance_drift(const PhaseTrajectory& traj, std::size_t first, std::size_t last);

/// Maximal index ranges [first, last] of samples sharing one branch_index.
template <class State>
std::vector<std::pair<std::size_t, std::size_t>> branch_segments(const Trajectory<State>& traj) {
  std::vector<std::pair<std::size_t, std::size_t>> out;
  std::size_t begin = 0;
  for (std::size_t i = 1; i <= traj.samples.size(); ++i) {
    if (i == traj.samples.size() ||
        traj.samples[i].branch_index != traj.samples[begin].branch_index) {
      out.emplace_back(begin, i - 1);
      begin = i;
    }
  }
  return out;
}

struct AnalyticDeviation {
  double max_phi_deviation = 0.0;  // rad, compared modulo pi
  double max_j_relative_deviation = 0.0;
  std::size_t compared_samples = 0;
};

/// Compares analytic_phi / analytic_j against an integrated (phi, J)
/// trajectory started at t = 0, with a and J0 matched to the first sample.
/// Samples within 1e-6 of a pole are skipped.
AnalyticDeviation analytic_solution_deviation(const ActionAngleTrajectory& traj,
                                              const OscillatorParams& params);

/// Fits J~0 to samples [first, last] of an integrated (phi, J) trajectory by
/// least squares in log J and returns max |J - J_orbit| / J.
double orbit_deviation(const ActionAngleTrajectory& traj, const OscillatorParams& params,
                       std::size_t first, std::size_t last);

}  // namespace dho
