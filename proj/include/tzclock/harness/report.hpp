#pragma once

// Run report: ordered key/value entries (every parameter used plus derived
// quantities) and warnings. Rendered as "key = value" text and as JSON.

#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "tzclock/harness/config.hpp"
#include "tzclock/harness/result_table.hpp"

namespace tzclock::harness {

struct Report {
  std::vector<std::pair<std::string, std::string>> entries;
  std::vector<std::string> warnings;

  void set(const std::string& key, double v) { entries.emplace_back(key, detail::num(v)); }
  void set(const std::string& key, int v) { entries.emplace_back(key, std::to_string(v)); }
  void set(const std::string& key, std::int64_t v) { entries.emplace_back(key, std::to_string(v)); }
  void set(const std::string& key, std::uint64_t v) { entries.emplace_back(key, std::to_string(v)); }
  void set(const std::string& key, bool v) { entries.emplace_back(key, v ? "true" : "false"); }
  void set(const std::string& key, const std::string& v) { entries.emplace_back(key, v); }
  void set(const std::string& key, const char* v) { entries.emplace_back(key, v); }

  const std::string* find(const std::string& key) const {
    for (const auto& [k, v] : entries)
      if (k == key) return &v;
    return nullptr;
  }

  double number(const std::string& key) const {
    const auto* v = find(key);
    if (!v) throw std::out_of_range("report has no entry '" + key + "'");
    return std::stod(*v);
  }
};

inline std::string to_text(const Report& r) {
  std::string out;
  for (const auto& [k, v] : r.entries) out += k + " = " + v + "\n";
  for (const auto& w : r.warnings) out += "warning = " + w + "\n";
  return out;
}

inline std::string to_json(const Report& r) {
  nlohmann::ordered_json j;
  nlohmann::ordered_json e = nlohmann::ordered_json::object();
  for (const auto& [k, v] : r.entries) e[k] = v;
  j["entries"] = e;
  j["warnings"] = r.warnings;
  return j.dump(2) + "\n";
}

// Echo of every physical and run parameter in effect.
inline void echo_config(const ExperimentConfig& c, Report& r) {
  const SectionUsage use = section_usage(c.kind);
  r.set("config.experiment", to_string(c.kind));
  r.set("config.seed", c.seed);
  r.set("config.shots_per_point", c.shots_per_point);
  r.set("config.output_dir", c.output_dir);
  if (use.array) {
    if (c.kind == ExperimentKind::dual_quadrature || c.kind == ExperimentKind::local_dd ||
        c.kind == ExperimentKind::kernel_schedule) {
      r.set("config.array.ensembles", c.ensembles);
      r.set("config.array.atoms_per_quadrature", c.atoms_per_quadrature);
    } else {
      r.set("config.array.sites", c.sites);
    }
  }
  if (c.kind == ExperimentKind::cardinal_tomography) r.set("config.array.sites", 6);
  if (use.drive) {
    r.set("config.drive.wavelength_nm", c.compile.drive.wavelength_nm());
    r.set("config.drive.rabi_frequency_hz", c.compile.drive.rabi_frequency_hz());
    r.set("config.drive.detuning_hz", c.sim.detuning_hz);
    r.set("config.drive.shift_time_us", c.compile.shift_time_us);
    r.set("config.drive.pad_us", c.compile.pad_us);
    r.set("config.drive.flip_mode", c.compile.flip_mode == FlipMode::ideal ? "ideal" : "composite");
    r.set("config.drive.distance_scale", c.sim.distance_scale);
  }
  if (use.noise) {
    r.set("config.noise.kind", to_string(c.noise.kind));
    r.set("config.noise.beta", c.noise.beta);
    r.set("config.noise.alpha", c.noise.effective_alpha());
    r.set("config.noise.time_unit_us", c.noise.time_unit_us);
  }
  if (use.spam) {
    r.set("config.spam.enabled", c.spam_enabled);
    r.set("config.spam.survival", c.sim.spam.survival);
    r.set("config.spam.detect", c.sim.spam.detect);
    r.set("config.spam.eject", c.sim.spam.eject);
    r.set("config.spam.readout_pulse_fidelity", c.sim.spam.readout_pulse_fidelity);
    r.set("config.spam.pulse_infidelity", c.sim.pulse_infidelity);
  }
  if (use.grid) {
    r.set("config.grid.points", static_cast<int>(c.grid.values.size()));
    if (!c.grid.values.empty()) {
      r.set("config.grid.first", c.grid.values.front());
      r.set("config.grid.last", c.grid.values.back());
    }
  }
  if (use.protocol) {
    const auto& p = c.protocol;
    switch (c.kind) {
      case ExperimentKind::phase_pattern: r.set("config.protocol.pattern", p.pattern); break;
      case ExperimentKind::kernel_schedule: r.set("config.protocol.kernels", p.kernels); break;
      case ExperimentKind::dual_quadrature:
        if (p.sigma_qpn) r.set("config.protocol.sigma_qpn", *p.sigma_qpn);
        r.set("config.protocol.histogram_bins", p.histogram_bins);
        break;
      case ExperimentKind::multi_ensemble_slip: {
        std::string ms;
        for (int m : p.ensembles) ms += (ms.empty() ? "" : ",") + std::to_string(m);
        r.set("config.protocol.ensembles", ms);
        if (p.stage_sigma) r.set("config.protocol.stage_sigma", *p.stage_sigma);
        else r.set("config.protocol.atoms_per_quadrature", p.slip_atoms_per_quadrature);
        break;
      }
      default: break;
    }
  }
}

}  // namespace tzclock::harness
