#pragma once

// Invariant suites behind `dho validate`. Each check records the measured
// quantity next to the threshold it is held to.

#include <string>
#include <vector>

#include "dho/classical_dynamics.hpp"
#include "dho/core_model.hpp"
#include "dho/quantum_spectrum.hpp"

namespace dho {

struct CheckResult {
  std::string module;
  std::string name;
  double measured = 0.0;
  double threshold = 0.0;
  bool passed = false;
  // Reported but not part of the pass/fail verdict.
  bool diagnostic = false;
  std::string detail;
};

struct ValidationOptions {
  OscillatorParams params{1.0, 1.0, 0.001, 1.0};
  IntegratorConfig integrator{};
  FockSpaceConfig fock{};
  // Vector field used by the (phi, J) integrations. Tests swap in a broken
  // one to make sure the coordinate-consistency check can fail.
  ActionAngleRhs action_angle_field = dho::action_angle_rhs;
};

struct ValidationReport {
  std::vector<CheckResult> checks;

  /// True iff every non-diagnostic check passed.
  bool all_passed() const;
};

std::vector<CheckResult> validate_core_model(const ValidationOptions& options);
std::vector<CheckResult> validate_classical_dynamics(const ValidationOptions& options);
std::vector<CheckResult> validate_quantum_spectrum(const ValidationOptions& options);

ValidationReport run_validation(const ValidationOptions& options = {});

}  // namespace dho
