#include "dho/cli.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <numbers>
#include <optional>

#include "CLI11.hpp"
#include "json.hpp"

#include "dho/classical_dynamics.hpp"
#include "dho/error.hpp"
#include "dho/quantum_spectrum.hpp"
#include "dho/report_io.hpp"
#include "dho/validation.hpp"

namespace dho::cli {

namespace {

using nlohmann::json;

struct RunConfig {
  OscillatorParams params{1.0, 1.0, 0.001, 1.0};
  IntegratorConfig integrator{};
  FockSpaceConfig fock{};
  TimeSpan span{0.0, 200.0 * std::numbers::pi};
  double x0 = 1.0;
  double v0 = 0.0;
  std::size_t samples = 1000;
  double j_tilde = 1.0;
  std::size_t levels = 21;
  std::string format = "csv";
  std::string out;
};

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

double as_number(const json& value, const std::string& key) {
  if (!value.is_number() || !std::isfinite(value.get<double>())) {
    throw ConfigError(key + " must be a finite number");
  }
  return value.get<double>();
}

std::size_t as_count(const json& value, const std::string& key) {
  if (!value.is_number_unsigned()) throw ConfigError(key + " must be a non-negative integer");
  return value.get<std::size_t>();
}

std::string as_string(const json& value, const std::string& key) {
  if (!value.is_string()) throw ConfigError(key + " must be a string");
  return value.get<std::string>();
}

enum Command : unsigned { kSimulate = 1, kOrbit = 2, kSpectrum = 4, kValidate = 8, kAll = 15 };

struct Field {
  std::string key;  // config-file key; the flag is --key with '_' -> '-'
  unsigned commands;
  bool text;  // flag value taken verbatim rather than parsed as JSON
  std::string help;
  std::function<void(RunConfig&, const json&)> set;
};

const std::vector<Field>& fields() {
  static const std::vector<Field> table = {
      {"mass", kAll, false, "mass (kg)",
       [](RunConfig& c, const json& v) { c.params.mass = as_number(v, "mass"); }},
      {"omega", kAll, false, "natural angular frequency (rad/s)",
       [](RunConfig& c, const json& v) { c.params.omega = as_number(v, "omega"); }},
      {"omega_alpha", kAll, false, "dissipation parameter (rad/s)",
       [](RunConfig& c, const json& v) { c.params.omega_alpha = as_number(v, "omega_alpha"); }},
      {"hbar", kAll, false, "quantum of action (J s)",
       [](RunConfig& c, const json& v) { c.params.hbar = as_number(v, "hbar"); }},
      {"t_span", kAll, false, "end time T, or start,end (s)",
       [](RunConfig& c, const json& v) {
         if (v.is_array()) {
           if (v.size() != 2) throw ConfigError("t_span needs two values");
           c.span = {as_number(v[0], "t_span"), as_number(v[1], "t_span")};
         } else {
           c.span = {0.0, as_number(v, "t_span")};
         }
       }},
      {"dt", kAll, false, "sample spacing (s); 0 records every step",
       [](RunConfig& c, const json& v) { c.integrator.dense_output_dt = as_number(v, "dt"); }},
      {"n_max", kAll, false, "Fock basis size",
       [](RunConfig& c, const json& v) { c.fock.n_max = as_count(v, "n_max"); }},
      {"series_k_max", kAll, false, "phi series truncation",
       [](RunConfig& c, const json& v) { c.fock.series_k_max = as_count(v, "series_k_max"); }},
      {"format", kAll, true, "csv or json",
       [](RunConfig& c, const json& v) { c.format = as_string(v, "format"); }},
      {"out", kAll, true, "output path (default stdout)",
       [](RunConfig& c, const json& v) { c.out = as_string(v, "out"); }},
      {"x0", kSimulate, false, "initial position (m)",
       [](RunConfig& c, const json& v) { c.x0 = as_number(v, "x0"); }},
      {"v0", kSimulate, false, "initial velocity (m/s)",
       [](RunConfig& c, const json& v) { c.v0 = as_number(v, "v0"); }},
      {"rel_tol", kSimulate, false, "integrator relative tolerance",
       [](RunConfig& c, const json& v) { c.integrator.rel_tol = as_number(v, "rel_tol"); }},
      {"abs_tol", kSimulate, false, "integrator absolute tolerance",
       [](RunConfig& c, const json& v) { c.integrator.abs_tol = as_number(v, "abs_tol"); }},
      {"max_step", kSimulate, false, "largest integrator step (s)",
       [](RunConfig& c, const json& v) { c.integrator.max_step = as_number(v, "max_step"); }},
      {"samples", kOrbit, false, "number of orbit points on [0, 2 pi)",
       [](RunConfig& c, const json& v) { c.samples = as_count(v, "samples"); }},
      {"j_tilde", kOrbit, false, "orbit constant J~0",
       [](RunConfig& c, const json& v) { c.j_tilde = as_number(v, "j_tilde"); }},
      {"levels", kSpectrum, false, "number of levels in the report",
       [](RunConfig& c, const json& v) { c.levels = as_count(v, "levels"); }},
  };
  return table;
}

std::string flag_of(const std::string& key) {
  std::string flag = "--" + key;
  std::replace(flag.begin(), flag.end(), '_', '-');
  return flag;
}

json flag_value(const Field& field, const std::string& text) {
  if (field.text) return text;
  const std::string source = text.find(',') != std::string::npos ? "[" + text + "]" : text;
  try {
    return json::parse(source);
  } catch (const json::parse_error&) {
    throw ConfigError("invalid value '" + text + "' for " + flag_of(field.key));
  }
}

void apply_config_file(RunConfig& cfg, const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file " + path);
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError("config file " + path + ": " + e.what());
  }
  if (!doc.is_object()) throw ConfigError("config file must hold a JSON object");
  for (const auto& [key, value] : doc.items()) {
    const auto& table = fields();
    const auto it = std::find_if(table.begin(), table.end(),
                                 [&](const Field& f) { return f.key == key; });
    if (it == table.end()) throw ConfigError("unknown config key '" + key + "'");
    it->set(cfg, value);
  }
}

void check_config(const RunConfig& cfg, unsigned command) {
  cfg.params.validate();
  if (cfg.format != "csv" && cfg.format != "json") {
    throw ConfigError("format must be csv or json, got '" + cfg.format + "'");
  }
  if (command == kSimulate || command == kValidate) {
    cfg.integrator.validate();
  }
  if (command == kSimulate) {
    if (!(cfg.span.end > cfg.span.start)) throw ConfigError("t_span must have start < end");
  }
  if (command == kOrbit) {
    if (cfg.samples == 0) throw ConfigError("samples must be positive");
    if (!(cfg.j_tilde > 0.0)) throw ConfigError("j_tilde must be positive");
    if (!(cfg.params.omega_alpha < cfg.params.omega)) {
      throw ConfigError("the orbit formula needs omega_alpha < omega");
    }
  }
  if (command == kSpectrum || command == kValidate) {
    cfg.fock.validate();
    if (cfg.levels == 0 || cfg.levels > cfg.fock.trusted_window()) {
      throw ConfigError("levels must lie in 1.." + std::to_string(cfg.fock.trusted_window()));
    }
  }
}

json document(const std::string& command, const RunConfig& cfg, json config, json data) {
  return {{"schema_version", 1},
          {"command", command},
          {"params", io::params_json(cfg.params)},
          {"config", std::move(config)},
          {"data", std::move(data)}};
}

// Writes to --out or to `fallback`.
void emit(const RunConfig& cfg, std::ostream& fallback,
          const std::function<void(std::ostream&)>& write) {
  if (cfg.out.empty()) {
    write(fallback);
    return;
  }
  std::ofstream file(cfg.out, std::ios::binary);
  if (!file) throw ConfigError("cannot write " + cfg.out);
  write(file);
}

int cmd_simulate(const RunConfig& cfg, std::ostream& out) {
  const PhaseTrajectory traj = integrate_xv({cfg.x0, cfg.v0}, cfg.params, cfg.span, cfg.integrator);
  if (cfg.format == "json") {
    const json config = {{"t_span", {cfg.span.start, cfg.span.end}},
                         {"dt", cfg.integrator.dense_output_dt},
                         {"x0", cfg.x0},
                         {"v0", cfg.v0},
                         {"rel_tol", cfg.integrator.rel_tol},
                         {"abs_tol", cfg.integrator.abs_tol},
                         {"max_step", cfg.integrator.max_step}};
    const json doc = document("simulate", cfg, config, io::trajectory_json(traj));
    emit(cfg, out, [&](std::ostream& os) { os << doc.dump() << '\n'; });
    return kOk;
  }
  if (cfg.out.empty()) {
    io::write_trajectory_csv(out, traj);
    out << '\n';
    io::write_crossings_csv(out, traj.crossings);
    return kOk;
  }
  emit(cfg, out, [&](std::ostream& os) { io::write_trajectory_csv(os, traj); });
  std::filesystem::path sibling(cfg.out);
  sibling.replace_extension();
  RunConfig crossings_cfg = cfg;
  crossings_cfg.out = sibling.string() + ".crossings.csv";
  emit(crossings_cfg, out, [&](std::ostream& os) { io::write_crossings_csv(os, traj.crossings); });
  return kOk;
}

int cmd_orbit(const RunConfig& cfg, std::ostream& out) {
  OscillatorParams reference = cfg.params;
  reference.omega_alpha = 0.0;
  std::vector<io::OrbitRow> rows;
  for (const auto& pt : sample_orbit(cfg.params, cfg.j_tilde, cfg.samples)) {
    rows.push_back({pt.phi, pt.j, orbit_j_of_phi(pt.phi, cfg.j_tilde, reference)});
  }
  if (cfg.format == "json") {
    const json config = {{"samples", cfg.samples}, {"j_tilde", cfg.j_tilde}};
    const json doc = document("orbit", cfg, config, io::orbit_json(rows));
    emit(cfg, out, [&](std::ostream& os) { os << doc.dump() << '\n'; });
  } else {
    emit(cfg, out, [&](std::ostream& os) { io::write_orbit_csv(os, rows); });
  }
  return kOk;
}

int cmd_spectrum(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  const SpectrumReport report =
      diagonalize_k(cfg.fock, cfg.params, cfg.levels, TruncationPolicy::Report);
  if (cfg.format == "json") {
    const json config = {{"n_max", cfg.fock.n_max},
                         {"series_k_max", cfg.fock.series_k_max},
                         {"series_tolerance", cfg.fock.series_tolerance},
                         {"trusted_window", cfg.fock.trusted_window()},
                         {"levels", cfg.levels}};
    const json doc = document("spectrum", cfg, config, io::spectrum_json(report));
    emit(cfg, out, [&](std::ostream& os) { os << doc.dump() << '\n'; });
  } else {
    emit(cfg, out, [&](std::ostream& os) { io::write_spectrum_csv(os, report); });
  }
  if (!report.truncation_stable) {
    err << "TruncationUnstable: eigenvalues moved by " << report.max_truncation_change
        << " (relative) when n_max was doubled\n";
    return kTruncationUnstable;
  }
  return kOk;
}

int cmd_validate(const RunConfig& cfg, std::ostream& out) {
  ValidationOptions options;
  options.params = cfg.params;
  options.integrator = cfg.integrator;
  options.fock = cfg.fock;
  const ValidationReport report = run_validation(options);
  if (cfg.format == "json") {
    const json config = {{"n_max", cfg.fock.n_max},
                         {"series_k_max", cfg.fock.series_k_max},
                         {"dt", cfg.integrator.dense_output_dt}};
    const json doc = document("validate", cfg, config, io::validation_json(report));
    emit(cfg, out, [&](std::ostream& os) { os << doc.dump() << '\n'; });
  } else {
    emit(cfg, out, [&](std::ostream& os) { io::write_validation_csv(os, report); });
  }
  return report.all_passed() ? kOk : kValidationFailed;
}

int exit_code_for(const Error& e) {
  switch (e.code()) {
    case ErrorCode::StepFailure:
      return kIntegrationFailed;
    case ErrorCode::TruncationUnstable:
      return kTruncationUnstable;
    default:
      return kInvalidConfig;
  }
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Damped harmonic oscillator: constant of motion and its quantization"};
  app.name("dho");
  app.require_subcommand(1);

  const std::vector<std::pair<std::string, unsigned>> commands = {
      {"simulate", kSimulate}, {"orbit", kOrbit}, {"spectrum", kSpectrum}, {"validate", kValidate}};
  const std::map<std::string, std::string> descriptions = {
      {"simulate", "integrate the flow in (x, v) and write the trajectory"},
      {"orbit", "write the (phi, J) orbit on [0, 2 pi)"},
      {"spectrum", "perturbative and diagonalized spectrum of the quantized constant"},
      {"validate", "run the invariant suites"}};

  std::map<std::string, std::map<std::string, std::string>> raw;
  std::map<std::string, std::map<std::string, CLI::Option*>> options;
  std::map<std::string, std::string> config_path;
  std::map<std::string, CLI::App*> subs;
  for (const auto& [name, mask] : commands) {
    CLI::App* sub = app.add_subcommand(name, descriptions.at(name));
    subs[name] = sub;
    for (const auto& f : fields()) {
      if ((f.commands & mask) == 0) continue;
      options[name][f.key] = sub->add_option(flag_of(f.key), raw[name][f.key], f.help);
    }
    sub->add_option("--config", config_path[name], "JSON file of defaults (flags win)");
  }

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kInvalidConfig;
  }

  for (const auto& [name, mask] : commands) {
    if (!subs[name]->parsed()) continue;
    RunConfig cfg;
    try {
      if (!config_path[name].empty()) apply_config_file(cfg, config_path[name]);
      for (const auto& f : fields()) {
        if ((f.commands & mask) == 0 || options[name][f.key]->count() == 0) continue;
        f.set(cfg, flag_value(f, raw[name][f.key]));
      }
      check_config(cfg, mask);
      switch (mask) {
        case kSimulate:
          return cmd_simulate(cfg, out);
        case kOrbit:
          return cmd_orbit(cfg, out);
        case kSpectrum:
          return cmd_spectrum(cfg, out, err);
        default:
          return cmd_validate(cfg, out);
      }
    } catch (const ConfigError& e) {
      err << "invalid configuration: " << e.what() << '\n';
      return kInvalidConfig;
    } catch (const Error& e) {
      err << e.what() << '\n';
      return exit_code_for(e);
    }
  }
  return kInvalidConfig;
}

}  // namespace dho::cli
