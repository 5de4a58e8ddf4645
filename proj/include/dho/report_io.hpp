#pragma once

#include <ostream>
#include <string>
#include <vector>

#include "json.hpp"

#include "dho/classical_dynamics.hpp"
#include "dho/quantum_spectrum.hpp"
#include "dho/validation.hpp"

namespace dho::io {

/// %.17g, enough digits for an exact double roundtrip.
std::string format_double(double value);

struct OrbitRow {
  double phi = 0.0;
  double j = 0.0;
  double j_reference = 0.0;  // same orbit with omega_alpha = 0
};

void write_trajectory_csv(std::ostream& os, const PhaseTrajectory& traj);
void write_crossings_csv(std::ostream& os, const std::vector<CrossingEvent>& crossings);
void write_orbit_csv(std::ostream& os, const std::vector<OrbitRow>& rows);
void write_spectrum_csv(std::ostream& os, const SpectrumReport& report);
void write_validation_csv(std::ostream& os, const ValidationReport& report);

// Column-oriented JSON for the `data` member of a document.
nlohmann::json trajectory_json(const PhaseTrajectory& traj);
nlohmann::json orbit_json(const std::vector<OrbitRow>& rows);
nlohmann::json spectrum_json(const SpectrumReport& report);
nlohmann::json validation_json(const ValidationReport& report);
nlohmann::json params_json(const OscillatorParams& params);

}  // namespace dho::io
