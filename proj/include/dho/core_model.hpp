#pragma once

// Closed-form classical quantities for the linearly damped oscillator
//
//   x' = v,   v' = -omega^2 x - 2 omega_alpha v
//
// together with the time-independent constant of motion, its weak-damping
// expansion, the Lagrangian and momentum derived from it, and the
// action-angle maps.

#include <functional>
#include <optional>
#include <utility>

namespace dho {

struct OscillatorParams {
  double mass = 1.0;         // kg
  double omega = 1.0;        // natural angular frequency, rad/s
  double omega_alpha = 0.0;  // dissipation parameter alpha / 2m, rad/s
  double hbar = 1.0;         // J s

  /// Throws Error(InvalidArgument) unless mass, omega, hbar > 0 and omega_alpha >= 0.
  void validate() const;

  double damping_constant() const { return 2.0 * mass * omega_alpha; }
  double spring_constant() const { return mass * omega * omega; }
};

struct PhaseState {
  double x = 0.0;  // m
  double v = 0.0;  // m/s
};

struct ActionAngleState {
  double phi = 0.0;  // rad, not reduced mod 2 pi
  double j = 0.0;    // J s
};

enum class DampingRegime { Underdamped, Critical, Overdamped };

/// Which side of the line v = 0 a state is attributed to. The constant of
/// motion is continuous inside each open half-plane and jumps across v = 0.
enum class HalfPlane { Upper, Lower };

/// |omega_alpha^2 - omega^2| <= kCriticalTolerance * omega^2 counts as critical.
inline constexpr double kCriticalTolerance = 1e-12;

DampingRegime classify_regime(const OscillatorParams& params);

struct GValue {
  double seconds = 0.0;
  // Overdamped only: the log argument was negative and ln|.| was used.
  bool negative_log_argument = false;
};

/// G(v/x, omega, omega_alpha) for the regime selected by classify_regime.
///
/// Underdamped: the arctangent is evaluated as
///   arctan((omega_alpha x + v) / (Omega x)) = beta + delta,
/// beta = atan2(omega_alpha, Omega), delta = atan2(Omega v, omega^2 x + omega_alpha v),
/// with delta reduced into [0, pi). Every discontinuity of G then lies on
/// v = 0 and the x -> 0 limits are finite. On v = 0 itself the default
/// attribution is Upper for x > 0 and Lower for x < 0; pass a HalfPlane to
/// choose explicitly.
///
/// Critical: G = -1/(omega_alpha + v/x), the common omega -> omega_alpha limit
/// of the other two forms up to an additive constant.
///
/// Throws OriginUndefined at (0, 0) and DomainError on the singular lines of
/// the critical / overdamped forms.
GValue g_function(PhaseState state, const OscillatorParams& params);
GValue g_function(PhaseState state, const OscillatorParams& params, HalfPlane side);

/// (m/2)(v^2 + 2 omega_alpha x v + omega^2 x^2) exp(-2 omega_alpha G).
double k_general(PhaseState state, const OscillatorParams& params);
double k_general(PhaseState state, const OscillatorParams& params, HalfPlane side);

/// Half-plane the flow enters from `state`: sign(v), or sign(v') on v = 0.
HalfPlane flow_half_plane(PhaseState state, const OscillatorParams& params);

/// 1/2 m v^2 + 1/2 m omega^2 x^2.
double sho_energy(PhaseState state, const OscillatorParams& params);

/// First-order (weak damping) constant of motion. Uses atan2(v, omega x).
double k_weak(PhaseState state, const OscillatorParams& params);

/// Weak-damping Lagrangian; requires x != 0 (AxisUndefined otherwise).
double lagrangian_weak(PhaseState state, const OscillatorParams& params);

/// dL/dv of lagrangian_weak; requires x != 0.
double momentum_weak(PhaseState state, const OscillatorParams& params);

/// Right-hand side of the flow, (x', v').
PhaseState velocity_field(PhaseState state, const OscillatorParams& params);

using StateFunction = std::function<double(const PhaseState&)>;

/// Central-difference step used for every phase-space derivative.
inline double fd_step(double coordinate) {
  return 1e-5 * (1.0 + (coordinate < 0 ? -coordinate : coordinate));
}

/// v dK/dx - (omega^2 x + 2 omega_alpha v) dK/dv by central differences.
double pde_residual(const StateFunction& k, PhaseState state, const OscillatorParams& params);

/// d/dt(dL/dv) - dL/dx along the flow for L = lagrangian_weak. Vanishes for
/// omega_alpha = 0 and is O(omega_alpha^2) otherwise.
double euler_lagrange_residual(PhaseState state, const OscillatorParams& params);

/// omega |x| carrying the sign of v.
double default_quadrature_reference(PhaseState state, const OscillatorParams& params);

/// v * integral_{xi_ref}^{v} K(x, xi) / xi^2 dxi by adaptive Gauss-Kronrod.
/// Agrees with lagrangian_weak up to a gauge term c(x) v.
double lagrangian_via_quadrature(const StateFunction& k, PhaseState state,
                                 const OscillatorParams& params,
                                 std::optional<double> xi_ref = std::nullopt);

struct ImplicitHamiltonian {
  double energy = 0.0;
  double velocity = 0.0;
  // The bracket held more than one root or p(v) was not monotone on it.
  bool multiple_roots = false;
};

/// H(x, p) = k_weak(x, v(x, p)) where v solves momentum_weak(x, v) = p inside
/// `v_bracket`. When several roots exist the one of smallest |v| is returned.
ImplicitHamiltonian hamiltonian_implicit(double x, double p, const OscillatorParams& params,
                                         std::pair<double, double> v_bracket);

/// phi = atan2(v, omega x) in (-pi, pi], J = (m / 2 omega)(v^2 + omega^2 x^2).
ActionAngleState to_action_angle(PhaseState state, const OscillatorParams& params);
PhaseState from_action_angle(ActionAngleState aa, const OscillatorParams& params);

double k_action_angle(ActionAngleState aa, const OscillatorParams& params);
/// Both need cos(phi) > 0 (ln cos phi); DomainError otherwise.
double lagrangian_action_angle(ActionAngleState aa, const OscillatorParams& params);
double momentum_action_angle(ActionAngleState aa, const OscillatorParams& params);

}  // namespace dho
