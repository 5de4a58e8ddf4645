#include "dho/report_io.hpp"

#include <cstdio>

namespace dho::io {

namespace {

std::string csv_quote(const std::string& text) {
  if (text.find_first_of(",\"\n") == std::string::npos) return text;
  std::string out = "\"";
  for (char c : text) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

const char* status_of(const CheckResult& c) {
  if (c.diagnostic) return "INFO";
  return c.passed ? "PASS" : "FAIL";
}

}  // namespace

std::string format_double(double value) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", value);
  return buf;
}

void write_trajectory_csv(std::ostream& os, const PhaseTrajectory& traj) {
  os << "t,x,v,K_general,branch_index\n";
  for (const auto& s : traj.samples) {
    os << format_double(s.t) << ',' << format_double(s.state.x) << ',' << format_double(s.state.v)
       << ',' << format_double(s.k_value) << ',' << s.branch_index << '\n';
  }
}

void write_crossings_csv(std::ostream& os, const std::vector<CrossingEvent>& crossings) {
  os << "t_cross,side,k_before,k_after\n";
  for (const auto& c : crossings) {
    os << format_double(c.t_cross) << ',' << c.side << ',' << format_double(c.k_before) << ','
       << format_double(c.k_after) << '\n';
  }
}

void write_orbit_csv(std::ostream& os, const std::vector<OrbitRow>& rows) {
  os << "phi,J,J_reference\n";
  for (const auto& r : rows) {
    os << format_double(r.phi) << ',' << format_double(r.j) << ',' << format_double(r.j_reference)
       << '\n';
  }
}

void write_spectrum_csv(std::ostream& os, const SpectrumReport& report) {
  os << "n,e0,de1,de2,de2_tail,e_pert,e_diag,e_diag_minus_e_pert,de2_closed_form,"
        "de2_closed_minus_sum,e_diag_doubled,truncation_change,stable\n";
  for (const auto& l : report.levels) {
    os << l.n << ',' << format_double(l.e0) << ',' << format_double(l.de1) << ','
       << format_double(l.de2) << ',' << format_double(l.de2_tail) << ','
       << format_double(l.e_pert) << ',' << format_double(l.e_diag) << ','
       << format_double(l.e_diag - l.e_pert) << ',' << format_double(l.de2_closed_form) << ','
       << format_double(l.de2_closed_form - l.de2) << ',' << format_double(l.e_diag_doubled)
       << ',' << format_double(l.truncation_change) << ',' << (l.stable ? 1 : 0) << '\n';
  }
}

void write_validation_csv(std::ostream& os, const ValidationReport& report) {
  os << "status,module,check,measured,threshold,detail\n";
  for (const auto& c : report.checks) {
    os << status_of(c) << ',' << c.module << ',' << csv_quote(c.name) << ','
       << format_double(c.measured) << ',' << format_double(c.threshold) << ','
       << csv_quote(c.detail) << '\n';
  }
}

nlohmann::json trajectory_json(const PhaseTrajectory& traj) {
  nlohmann::json samples = {{"t", nlohmann::json::array()},
                            {"x", nlohmann::json::array()},
                            {"v", nlohmann::json::array()},
                            {"K_general", nlohmann::json::array()},
                            {"branch_index", nlohmann::json::array()}};
  for (const auto& s : traj.samples) {
    samples["t"].push_back(s.t);
    samples["x"].push_back(s.state.x);
    samples["v"].push_back(s.state.v);
    samples["K_general"].push_back(s.k_value);
    samples["branch_index"].push_back(s.branch_index);
  }
  nlohmann::json crossings = {{"t_cross", nlohmann::json::array()},
                              {"side", nlohmann::json::array()},
                              {"k_before", nlohmann::json::array()},
                              {"k_after", nlohmann::json::array()}};
  for (const auto& c : traj.crossings) {
    crossings["t_cross"].push_back(c.t_cross);
    crossings["side"].push_back(c.side);
    crossings["k_before"].push_back(c.k_before);
    crossings["k_after"].push_back(c.k_after);
  }
  return {{"samples", samples}, {"crossings", crossings}};
}

nlohmann::json orbit_json(const std::vector<OrbitRow>& rows) {
  nlohmann::json out = {{"phi", nlohmann::json::array()},
                        {"J", nlohmann::json::array()},
                        {"J_reference", nlohmann::json::array()}};
  for (const auto& r : rows) {
    out["phi"].push_back(r.phi);
    out["J"].push_back(r.j);
    out["J_reference"].push_back(r.j_reference);
  }
  return out;
}

nlohmann::json spectrum_json(const SpectrumReport& report) {
  nlohmann::json levels = nlohmann::json::object();
  for (const char* key : {"n", "e0", "de1", "de2", "de2_tail", "e_pert", "e_diag",
                          "e_diag_minus_e_pert", "de2_closed_form", "de2_closed_minus_sum",
                          "e_diag_doubled", "truncation_change", "stable"}) {
    levels[key] = nlohmann::json::array();
  }
  for (const auto& l : report.levels) {
    levels["n"].push_back(l.n);
    levels["e0"].push_back(l.e0);
    levels["de1"].push_back(l.de1);
    levels["de2"].push_back(l.de2);
    levels["de2_tail"].push_back(l.de2_tail);
    levels["e_pert"].push_back(l.e_pert);
    levels["e_diag"].push_back(l.e_diag);
    levels["e_diag_minus_e_pert"].push_back(l.e_diag - l.e_pert);
    levels["de2_closed_form"].push_back(l.de2_closed_form);
    levels["de2_closed_minus_sum"].push_back(l.de2_closed_form - l.de2);
    levels["e_diag_doubled"].push_back(l.e_diag_doubled);
    levels["truncation_change"].push_back(l.truncation_change);
    levels["stable"].push_back(l.stable ? 1 : 0);
  }
  return {{"levels", levels},
          {"max_truncation_change", report.max_truncation_change},
          {"truncation_stable", report.truncation_stable}};
}

nlohmann::json validation_json(const ValidationReport& report) {
  nlohmann::json checks = nlohmann::json::array();
  for (const auto& c : report.checks) {
    checks.push_back({{"status", status_of(c)},
                      {"module", c.module},
                      {"check", c.name},
                      {"measured", c.measured},
                      {"threshold", c.threshold},
                      {"detail", c.detail}});
  }
  return {{"checks", checks}, {"all_passed", report.all_passed()}};
}

nlohmann::json params_json(const OscillatorParams& params) {
  return {{"mass", params.mass},
          {"omega", params.omega},
          {"omega_alpha", params.omega_alpha},
          {"hbar", params.hbar}};
}

}  // namespace dho::io
