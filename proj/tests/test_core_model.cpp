#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <numbers>
#include <random>
#include <vector>

#include "dho/core_model.hpp"
#include "dho/error.hpp"
#include "oracles.hpp"

using namespace dho;
using dho::oracle::hp;

namespace {

constexpr double kPi = std::numbers::pi;

OscillatorParams weak(double omega_alpha = 0.001) { return {1.0, 1.0, omega_alpha, 1.0}; }

template <class F>
ErrorCode code_of(F&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected dho::Error");
  return ErrorCode::InvalidArgument;
}

std::vector<PhaseState> random_states(std::size_t count, unsigned seed, bool positive_x = false) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> coord(-2.0, 2.0);
  std::uniform_real_distribution<double> pos(0.05, 2.0);
  std::vector<PhaseState> out;
  while (out.size() < count) {
    PhaseState s{positive_x ? pos(rng) : coord(rng), coord(rng)};
    if (std::abs(s.x) < 1e-3 || std::abs(s.v) < 1e-3) continue;
    out.push_back(s);
  }
  return out;
}

}  // namespace

TEST_CASE("classify_regime covers the three cases") {
  CHECK(classify_regime({1, 1, 0.001, 1}) == DampingRegime::Underdamped);
  CHECK(classify_regime({1, 1, 1, 1}) == DampingRegime::Critical);
  CHECK(classify_regime({1, 1, 2, 1}) == DampingRegime::Overdamped);
  CHECK(classify_regime({1, 1, 1.0 + 1e-14, 1}) == DampingRegime::Critical);
  CHECK(classify_regime({1, 1, 1.0 + 1e-9, 1}) == DampingRegime::Overdamped);
}

TEST_CASE("invalid parameters are rejected") {
  CHECK(code_of([] { classify_regime({0, 1, 0, 1}); }) == ErrorCode::InvalidArgument);
  CHECK(code_of([] { classify_regime({1, -1, 0, 1}); }) == ErrorCode::InvalidArgument);
  CHECK(code_of([] { classify_regime({1, 1, -0.1, 1}); }) == ErrorCode::InvalidArgument);
  CHECK(code_of([] { classify_regime({1, 1, 0, 0}); }) == ErrorCode::InvalidArgument);
}

TEST_CASE("g_function examples") {
  const auto p = weak();
  const hp expected_axis = oracle::g_underdamped_first_quadrant(1, 0, 1, hp("0.001"));
  CHECK(g_function({1, 0}, p).seconds ==
        doctest::Approx(expected_axis.convert_to<double>()).epsilon(1e-14));
  CHECK(g_function({1, 0}, p).seconds == doctest::Approx(1.0000005e-3).epsilon(1e-7));

  // critical: magnitude 1/(omega_alpha + v/x) = 1, sign fixed by the PDE
  CHECK(g_function({1, 0}, {1, 1, 1, 1}).seconds == -1.0);

  const hp expected_pole = oracle::g_underdamped_first_quadrant(0, 1, 1, hp("0.001"));
  CHECK(g_function({0, 1}, p).seconds ==
        doctest::Approx(expected_pole.convert_to<double>()).epsilon(1e-14));
  CHECK(g_function({0, 1}, p).seconds == doctest::Approx(kPi / 2 * (1 + 5e-7)).epsilon(1e-12));

  CHECK(code_of([&] { g_function({0, 0}, p); }) == ErrorCode::OriginUndefined);
}

TEST_CASE("g_function matches the plain arctangent in the first quadrant") {
  const auto p = weak(0.05);
  for (const auto& s : random_states(200, 11, true)) {
    if (s.v < 0) continue;
    const hp ref = oracle::g_underdamped_first_quadrant(s.x, s.v, 1, hp("0.05"));
    CHECK(g_function(s, p).seconds == doctest::Approx(ref.convert_to<double>()).epsilon(1e-13));
  }
}

TEST_CASE("g_function jumps by pi / Omega across v = 0 only") {
  const auto p = weak(0.1);
  const double big_omega = std::sqrt(1 - 0.01);
  // continuous across x = 0 inside each half-plane
  for (double v : {0.7, -0.7}) {
    const double left = g_function({-1e-9, v}, p).seconds;
    const double right = g_function({1e-9, v}, p).seconds;
    CHECK(std::abs(left - right) < 1e-8);
  }
  // explicit half-planes on the axis differ by pi / Omega
  for (double x : {1.3, -0.4}) {
    const double up = g_function({x, 0}, p, HalfPlane::Upper).seconds;
    const double down = g_function({x, 0}, p, HalfPlane::Lower).seconds;
    CHECK(std::abs(std::abs(up - down) - kPi / big_omega) < 1e-12);
    // and they are the one-sided limits
    CHECK(up == doctest::Approx(g_function({x, 1e-12}, p).seconds).epsilon(1e-9));
    CHECK(down == doctest::Approx(g_function({x, -1e-12}, p).seconds).epsilon(1e-9));
  }
  CHECK(code_of([&] { g_function({1, 0.5}, p, HalfPlane::Lower); }) ==
        ErrorCode::InvalidArgument);
}

TEST_CASE("overdamped log branch records the sign flag") {
  const OscillatorParams p{1, 1, 2, 1};
  const double mu = std::sqrt(3.0);
  const auto g = g_function({1, -1}, p);
  const double ratio = (2 - mu - 1) / (2 + mu - 1);
  CHECK(g.negative_log_argument);
  CHECK(g.seconds == doctest::Approx(std::log(std::abs(ratio)) / (2 * mu)));
  CHECK_FALSE(g_function({1, 1}, p).negative_log_argument);
  CHECK(g_function({0, 1}, p).seconds == 0.0);
}

TEST_CASE("k_general examples") {
  const hp g = oracle::g_underdamped_first_quadrant(1, 0, 1, hp("0.001"));
  const hp expected = hp("0.5") * exp(-2 * hp("0.001") * g);
  CHECK(k_general({1, 0}, weak()) == doctest::Approx(expected.convert_to<double>()).epsilon(1e-15));
  CHECK(k_general({1, 0}, weak()) == doctest::Approx(0.4999990).epsilon(1e-7));
  CHECK(k_general({1, 0}, weak(0.0)) == 0.5);
  CHECK(code_of([] { k_general({0, 0}, weak()); }) == ErrorCode::OriginUndefined);
}

TEST_CASE("k_general is strictly positive away from the origin (underdamped)") {
  for (const auto& s : random_states(500, 3)) {
    CHECK(k_general(s, weak(0.3)) > 0.0);
  }
}

TEST_CASE("k_weak examples") {
  CHECK(k_weak({1, 0}, weak()) == 0.5);
  CHECK(k_weak({0, 1}, weak()) == doctest::Approx(0.5 - 0.001 * kPi / 2).epsilon(1e-15));
  CHECK(k_weak({1e-12, 1}, weak()) == doctest::Approx(0.4984292).epsilon(1e-7));
  for (const auto& s : random_states(100, 5)) {
    CHECK(k_weak(s, weak(0.0)) == doctest::Approx(sho_energy(s, weak(0.0))).epsilon(1e-15));
  }
  CHECK(code_of([] { k_weak({0, 0}, weak()); }) == ErrorCode::OriginUndefined);
}

TEST_CASE("lagrangian_weak examples") {
  CHECK(lagrangian_weak({1, 0}, weak()) == -0.5);
  const hp expected = hp("0.001") * log(hp(2));
  CHECK(lagrangian_weak({1, 1}, weak()) ==
        doctest::Approx(expected.convert_to<double>()).epsilon(1e-13));
  CHECK(lagrangian_weak({1, 1}, weak()) == doctest::Approx(6.9315e-4).epsilon(1e-4));
  for (const auto& s : random_states(100, 7)) {
    const double sho = 0.5 * s.v * s.v - 0.5 * s.x * s.x;
    CHECK(lagrangian_weak(s, weak(0.0)) == doctest::Approx(sho).epsilon(1e-15));
  }
  CHECK(code_of([] { lagrangian_weak({0, 1}, weak()); }) == ErrorCode::AxisUndefined);
}

TEST_CASE("momentum_weak examples and dL/dv identity") {
  CHECK(momentum_weak({1, 0}, weak()) == doctest::Approx(0.001).epsilon(1e-15));
  CHECK(momentum_weak({0.3, -1.7}, weak(0.0)) == -1.7);
  CHECK(code_of([] { momentum_weak({0, 1}, weak()); }) == ErrorCode::AxisUndefined);

  const auto p = weak();
  const double fd = oracle::central_difference(
      [&](double v) { return lagrangian_weak({1, v}, p); }, 0.5, 1e-6);
  CHECK(std::abs(fd - momentum_weak({1, 0.5}, p)) / std::abs(fd) < 1e-5);

  for (const auto& s : random_states(300, 9)) {
    const auto q = weak(0.01);
    const double h = fd_step(s.v);
    const double d = oracle::central_difference(
        [&](double v) { return lagrangian_weak({s.x, v}, q); }, s.v, h);
    CHECK(std::abs(d - momentum_weak(s, q)) / std::abs(momentum_weak(s, q)) < 1e-5);
  }
}

TEST_CASE("pde_residual examples") {
  const auto sho = weak(0.0);
  StateFunction energy = [&](const PhaseState& s) { return sho_energy(s, sho); };
  for (const auto& s : random_states(50, 13)) {
    CHECK(std::abs(pde_residual(energy, s, sho)) < 1e-9);
  }

  const auto p = weak();
  StateFunction kg = [&](const PhaseState& s) { return k_general(s, p); };
  CHECK(std::abs(pde_residual(kg, {1, 0.5}, p)) < 1e-6);
  CHECK(std::abs(pde_residual(kg, {1, -0.5}, p)) < 1e-6);
  CHECK(std::abs(pde_residual(kg, {-0.7, 0.2}, p)) < 1e-6);
  CHECK(std::abs(pde_residual(kg, {-0.7, -0.2}, p)) < 1e-6);
}

TEST_CASE("k_general residual vanishes on both half-planes, every regime") {
  for (double wa : {0.001, 0.3, 1.0, 2.5}) {
    const auto p = weak(wa);
    StateFunction kg = [&](const PhaseState& s) { return k_general(s, p); };
    for (const auto& s : random_states(200, 17)) {
      // keep away from the singular lines of the critical / overdamped forms
      if (wa >= 1.0) {
        const double mu = std::sqrt(std::max(wa * wa - 1.0, 0.0));
        const double num = wa * s.x + s.v - mu * s.x;
        const double den = wa * s.x + s.v + mu * s.x;
        if (std::abs(num) < 0.4 || std::abs(den) < 0.4) continue;
      }
      const PhaseState flow = velocity_field(s, p);
      const double scale =
          std::max(1.0, std::abs(k_general(s, p))) * (std::abs(flow.x) + std::abs(flow.v));
      CHECK(std::abs(pde_residual(kg, s, p)) / scale < 1e-6);
    }
  }
}

TEST_CASE("k_weak residual scales quadratically in omega_alpha") {
  std::vector<double> rates;
  std::vector<double> residuals;
  for (double wa : {0.001, 0.002, 0.004}) {
    const auto p = weak(wa);
    StateFunction kw = [&](const PhaseState& s) { return k_weak(s, p); };
    rates.push_back(wa);
    residuals.push_back(pde_residual(kw, {1, 0.5}, p));
  }
  CHECK(residuals[1] / residuals[0] == doctest::Approx(4.0).epsilon(0.05));
  CHECK(oracle::log_log_slope(rates, residuals) == doctest::Approx(2.0).epsilon(0.05));
}

TEST_CASE("alpha -> 0 limit of k_general is the SHO energy, linearly") {
  const auto states = random_states(1000, 19);
  std::vector<double> rates;
  std::vector<double> worst;
  for (double wa : {1e-3, 1e-4, 1e-5, 1e-6}) {
    const auto p = weak(wa);
    double m = 0.0;
    for (const auto& s : states) m = std::max(m, std::abs(k_general(s, p) - sho_energy(s, p)));
    rates.push_back(wa);
    worst.push_back(m);
  }
  CHECK(std::abs(oracle::log_log_slope(rates, worst) - 1.0) < 0.1);
}

TEST_CASE("Euler-Lagrange residual of the weak Lagrangian is second order") {
  CHECK(std::abs(euler_lagrange_residual({1, 0.5}, weak(0.0))) < 1e-8);
  std::vector<double> rates;
  std::vector<double> residuals;
  for (double wa : {0.001, 0.002, 0.004}) {
    rates.push_back(wa);
    residuals.push_back(euler_lagrange_residual({1, 0.5}, weak(wa)));
  }
  CHECK(std::abs(oracle::log_log_slope(rates, residuals) - 2.0) < 0.1);
  // leading coefficient 2 arctan(1/2) from the symbolic expansion
  CHECK(residuals[0] / (0.001 * 0.001) == doctest::Approx(2 * std::atan(0.5)).epsilon(1e-2));
}

TEST_CASE("lagrangian_via_quadrature") {
  const auto sho = weak(0.0);
  StateFunction energy = [&](const PhaseState& s) { return sho_energy(s, sho); };
  CHECK(lagrangian_via_quadrature(energy, {1, 2}, sho, 1.0) == doctest::Approx(1.5).epsilon(1e-14));

  // omega_alpha = 0: second v-derivative is m everywhere
  for (double v : {0.3, 1.1, -0.8}) {
    const auto l = [&](double vv) { return lagrangian_via_quadrature(energy, {0.7, vv}, sho); };
    CHECK(oracle::second_difference(l, v, 1e-3 * (1 + std::abs(v))) ==
          doctest::Approx(1.0).epsilon(1e-6));
  }

  // independent quadrature route gives the same raw value
  const auto p = weak();
  StateFunction kw = [&](const PhaseState& s) { return k_weak(s, p); };
  // v * integral from xi_ref = omega |x| = 1 down to v = 0.5
  const double simpson =
      0.5 * oracle::adaptive_simpson([&](double xi) { return k_weak({1, xi}, p) / (xi * xi); }, 1.0,
                                     0.5);
  CHECK(lagrangian_via_quadrature(kw, {1, 0.5}, p) == doctest::Approx(simpson).epsilon(1e-11));

  // second derivatives of the quadrature and closed-form Lagrangians agree
  const auto lq = [&](double v) { return lagrangian_via_quadrature(kw, {1, v}, p); };
  const auto l7 = [&](double v) { return lagrangian_weak({1, v}, p); };
  const double h = 1e-3 * 1.5;
  const double dq = oracle::second_difference(lq, 0.5, h);
  const double d7 = oracle::second_difference(l7, 0.5, h);
  CHECK(std::abs(dq - d7) / std::abs(d7) < 1e-5);

  CHECK(code_of([&] { lagrangian_via_quadrature(kw, {1, 0.5}, p, -1.0); }) ==
        ErrorCode::QuadraturePathInvalid);
  CHECK(code_of([&] { lagrangian_via_quadrature(kw, {1, 0.0}, p); }) ==
        ErrorCode::QuadraturePathInvalid);
}

TEST_CASE("hamiltonian_implicit") {
  const auto sho = weak(0.0);
  const auto h0 = hamiltonian_implicit(0.7, 0.3, sho, {-2, 2});
  CHECK(h0.energy == doctest::Approx(0.3 * 0.3 / 2 + 0.5 * 0.49).epsilon(1e-12));
  CHECK_FALSE(h0.multiple_roots);

  const auto p = weak();
  const auto h1 = hamiltonian_implicit(1, 0.001, p, {-0.1, 0.1});
  CHECK(std::abs(h1.velocity) < 1e-12);
  CHECK(h1.energy == doctest::Approx(0.5).epsilon(1e-12));

  const double pm = momentum_weak({1, 0.5}, p);
  const auto h2 = hamiltonian_implicit(1, pm, p, {-1, 2});
  CHECK(std::abs(h2.velocity - 0.5) < 1e-11);
  CHECK(h2.energy == doctest::Approx(k_weak({1, 0.5}, p)).epsilon(1e-11));

  CHECK(code_of([&] { hamiltonian_implicit(1, 0.0, p, {1, 2}); }) == ErrorCode::NoRootInBracket);
  CHECK(code_of([&] { hamiltonian_implicit(0, 0.0, p, {-1, 1}); }) == ErrorCode::AxisUndefined);
}

TEST_CASE("hamiltonian_implicit reports non-monotone brackets") {
  // strong damping makes p(v) turn over near v = 0.72 at x = 1
  const auto p = weak(0.8);
  const auto h = hamiltonian_implicit(1, 1.0, p, {0.0, 10.0});
  CHECK(h.multiple_roots);
  CHECK(momentum_weak({1, h.velocity}, p) == doctest::Approx(1.0).epsilon(1e-10));
  CHECK(h.velocity < 0.72);
}

TEST_CASE("action-angle examples") {
  const auto p = weak();
  auto a = to_action_angle({1, 0}, p);
  CHECK(a.phi == 0.0);
  CHECK(a.j == 0.5);
  a = to_action_angle({0, 1}, p);
  CHECK(a.phi == doctest::Approx(kPi / 2));
  CHECK(a.j == 0.5);
  CHECK(code_of([&] { to_action_angle({0, 0}, p); }) == ErrorCode::OriginUndefined);

  auto s = from_action_angle({0, 0.5}, p);
  CHECK(s.x == doctest::Approx(1.0));
  CHECK(s.v == 0.0);
  s = from_action_angle({kPi, 0.5}, p);
  CHECK(s.x == doctest::Approx(-1.0));
  CHECK(std::abs(s.v) < 1e-15);
  s = from_action_angle({1.0, 0.0}, p);
  CHECK(s.x == 0.0);
  CHECK(s.v == 0.0);
}

TEST_CASE("action-angle roundtrip is exact to machine precision") {
  const OscillatorParams p{1.7, 2.3, 0.01, 1};
  for (const auto& s : random_states(1000, 23)) {
    const auto back = from_action_angle(to_action_angle(s, p), p);
    CHECK(std::abs(back.x - s.x) <= 1e-14 * (1 + std::abs(s.x)) * 4);
    CHECK(std::abs(back.v - s.v) <= 1e-14 * (1 + std::abs(s.v)) * 4);
  }
  std::mt19937_64 rng(29);
  std::uniform_real_distribution<double> phi(-10, 10);
  std::uniform_real_distribution<double> j(1e-3, 5);
  for (int i = 0; i < 200; ++i) {
    const ActionAngleState aa{phi(rng), j(rng)};
    CHECK(to_action_angle(from_action_angle(aa, p), p).j == doctest::Approx(aa.j).epsilon(1e-14));
  }
}

TEST_CASE("constant of motion in action-angle form") {
  CHECK(k_action_angle({0, 0.5}, weak()) == 0.5);
  CHECK(k_action_angle({kPi / 4, 1}, weak()) ==
        doctest::Approx(1 + 0.001 * (1 - kPi / 2)).epsilon(1e-15));
  CHECK(k_action_angle({kPi / 4, 1}, weak()) == doctest::Approx(0.9994292).epsilon(1e-7));

  const OscillatorParams p{1.3, 0.8, 0.02, 1};
  for (const auto& s : random_states(500, 31)) {
    CHECK(k_action_angle(to_action_angle(s, p), p) == doctest::Approx(k_weak(s, p)).epsilon(1e-12));
  }
}

TEST_CASE("momentum in action-angle form agrees with the (x, v) form for x > 0") {
  const OscillatorParams p{1.3, 0.8, 0.02, 1};
  for (const auto& s : random_states(500, 37, true)) {
    const auto aa = to_action_angle(s, p);
    CHECK(momentum_action_angle(aa, p) == doctest::Approx(momentum_weak(s, p)).epsilon(1e-11));
  }
}

TEST_CASE("lagrangian in action-angle form") {
  // omega_alpha = 0 reduces to the SHO Lagrangian
  const auto sho = weak(0.0);
  for (const auto& s : random_states(100, 41, true)) {
    const double expected = 0.5 * s.v * s.v - 0.5 * s.x * s.x;
    CHECK(lagrangian_action_angle(to_action_angle(s, sho), sho) ==
          doctest::Approx(expected).epsilon(1e-12));
  }
  CHECK(lagrangian_action_angle({0, 0.5}, weak()) == doctest::Approx(-0.5 + 2 * 0.001 * 0.5));
  CHECK(code_of([] { lagrangian_action_angle({1.6, 1}, weak()); }) == ErrorCode::DomainError);
  CHECK(code_of([] { lagrangian_action_angle({2.0, 1}, weak()); }) == ErrorCode::DomainError);
  CHECK(code_of([] { momentum_action_angle({-2.0, 1}, weak()); }) == ErrorCode::DomainError);
}
