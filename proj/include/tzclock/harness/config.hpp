#pragma once

// Experiment configuration, read from a JSON file with named sections:
//
//   experiment        parity-sweep | phase-pattern | cardinal-tomography |
//                     dual-quadrature | local-dd | kernel-schedule |
//                     multi-ensemble-slip
//   seed              unsigned integer, mandatory
//   shots_per_point   shots per grid point (trials per point for the slip run)
//   output_dir        optional, default "tzclock-out"
//   array             {sites} or {ensembles, atoms_per_quadrature}
//   drive             {wavelength_nm, rabi_frequency_hz, detuning_hz,
//                      shift_time_us, pad_us, flip_mode, distance_scale}
//   noise             {kind, beta, alpha, time_unit_us}
//   spam              {enabled, survival, detect, eject,
//                      readout_pulse_fidelity, pulse_infidelity}
//   grid              {start, stop, points[, spacing: linear|log]} or {values: [...]}
//   protocol          kind-specific options, see ProtocolOptions
//
// Grid units: nm for parity-sweep, us of dark time for the Ramsey kinds,
// radians of full-phase spread for multi-ensemble-slip.
//
// Which sections are required depends on the kind (see section_usage). A
// section the kind does not use, or any unknown key, is an error. All
// problems are collected and reported together.

#include <cmath>
#include <cstdint>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

#include "tzclock/errors.hpp"
#include "tzclock/noise.hpp"
#include "tzclock/sequence.hpp"
#include "tzclock/simulator.hpp"

namespace tzclock::harness {

class ConfigError : public std::invalid_argument {
 public:
  explicit ConfigError(std::vector<std::string> problems)
      : std::invalid_argument(join(problems)), problems_(std::move(problems)) {}

  const std::vector<std::string>& problems() const noexcept { return problems_; }

 private:
  static std::string join(const std::vector<std::string>& p) {
    std::string s = "invalid config (" + std::to_string(p.size()) + " problem" + (p.size() == 1 ? "" : "s") + ")";
    for (const auto& x : p) s += "\n  - " + x;
    return s;
  }
  std::vector<std::string> problems_;
};

enum class ExperimentKind {
  parity_sweep,
  phase_pattern,
  cardinal_tomography,
  dual_quadrature,
  local_dd,
  kernel_schedule,
  multi_ensemble_slip,
};

inline const std::map<std::string, ExperimentKind>& experiment_names() {
  static const std::map<std::string, ExperimentKind> names{
      {"parity-sweep", ExperimentKind::parity_sweep},
      {"phase-pattern", ExperimentKind::phase_pattern},
      {"cardinal-tomography", ExperimentKind::cardinal_tomography},
      {"dual-quadrature", ExperimentKind::dual_quadrature},
      {"local-dd", ExperimentKind::local_dd},
      {"kernel-schedule", ExperimentKind::kernel_schedule},
      {"multi-ensemble-slip", ExperimentKind::multi_ensemble_slip},
  };
  return names;
}

inline std::string to_string(ExperimentKind k) {
  for (const auto& [name, kind] : experiment_names())
    if (kind == k) return name;
  return "?";
}

struct GridSpec {
  std::vector<double> values;
};

struct ProtocolOptions {
  // phase-pattern: "antiphase", "staircase" or explicit per-site phases
  std::string pattern = "antiphase";
  std::vector<double> pattern_values;
  // kernel-schedule
  int kernels = 2;
  // dual-quadrature
  std::optional<double> sigma_qpn;
  std::vector<double> epsilons{1e-4, 1e-3, 1e-2, 0.05, 0.1, 0.2};
  int histogram_bins = 24;
  // multi-ensemble-slip
  std::vector<int> ensembles{1, 2, 3, 4};
  std::optional<double> stage_sigma;  // unset: projection noise of the atoms
  int slip_atoms_per_quadrature = 10;
};

struct ExperimentConfig {
  ExperimentKind kind = ExperimentKind::parity_sweep;
  std::uint64_t seed = 0;
  int shots_per_point = 100;
  std::string output_dir = "tzclock-out";

  int sites = 0;                 // parity-sweep, phase-pattern, cardinal-tomography
  int ensembles = 1;             // layout kinds
  int atoms_per_quadrature = 1;  // layout kinds

  CompileOptions compile{};
  SimulationSettings sim{};
  bool spam_enabled = false;
  SpamParams spam_values{};
  LaserNoiseParams noise{};

  GridSpec grid;
  ProtocolOptions protocol;

  EnsembleLayout layout() const { return EnsembleLayout::blocks(ensembles, atoms_per_quadrature); }
};

// Which sections each kind reads.
struct SectionUsage {
  bool array, drive, noise, spam, grid, protocol;
};

inline SectionUsage section_usage(ExperimentKind k) {
  switch (k) {
    case ExperimentKind::parity_sweep: return {true, true, true, true, true, false};
    case ExperimentKind::phase_pattern: return {true, true, true, true, true, true};
    case ExperimentKind::cardinal_tomography: return {false, true, true, true, false, false};
    case ExperimentKind::dual_quadrature: return {true, true, true, true, true, true};
    case ExperimentKind::local_dd: return {true, true, true, true, true, false};
    case ExperimentKind::kernel_schedule: return {true, true, true, true, true, true};
    case ExperimentKind::multi_ensemble_slip: return {false, false, false, false, true, true};
  }
  return {};
}

namespace detail {

using nlohmann::json;

// Reads keys from one JSON object, recording type errors and keys nobody
// asked for.
class Section {
 public:
  Section(const json* j, std::string path, std::vector<std::string>& errors)
      : j_(j), path_(std::move(path)), errors_(errors) {
    if (j_ && !j_->is_object()) {
      errors_.push_back(path_ + ": must be an object");
      j_ = nullptr;
    }
  }

  bool present() const { return j_ != nullptr; }

  const json* raw(const std::string& key) {
    used_.insert(key);
    if (!j_) return nullptr;
    auto it = j_->find(key);
    return it == j_->end() ? nullptr : &*it;
  }

  std::string where(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

  void error(const std::string& key, const std::string& msg) { errors_.push_back(where(key) + ": " + msg); }

  std::optional<double> number(const std::string& key) {
    const json* v = raw(key);
    if (!v) return std::nullopt;
    if (!v->is_number()) {
      error(key, "must be a number");
      return std::nullopt;
    }
    const double d = v->get<double>();
    if (!std::isfinite(d)) {
      error(key, "must be finite");
      return std::nullopt;
    }
    return d;
  }

  double number(const std::string& key, double fallback) { return number(key).value_or(fallback); }

  std::optional<std::int64_t> integer(const std::string& key) {
    const json* v = raw(key);
    if (!v) return std::nullopt;
    if (!v->is_number_integer()) {
      error(key, "must be an integer");
      return std::nullopt;
    }
    return v->get<std::int64_t>();
  }

  std::optional<std::string> string(const std::string& key) {
    const json* v = raw(key);
    if (!v) return std::nullopt;
    if (!v->is_string()) {
      error(key, "must be a string");
      return std::nullopt;
    }
    return v->get<std::string>();
  }

  std::optional<bool> boolean(const std::string& key) {
    const json* v = raw(key);
    if (!v) return std::nullopt;
    if (!v->is_boolean()) {
      error(key, "must be true or false");
      return std::nullopt;
    }
    return v->get<bool>();
  }

  std::optional<std::vector<double>> numbers(const std::string& key) {
    const json* v = raw(key);
    if (!v) return std::nullopt;
    if (!v->is_array()) {
      error(key, "must be an array of numbers");
      return std::nullopt;
    }
    std::vector<double> out;
    for (const auto& e : *v) {
      if (!e.is_number() || !std::isfinite(e.get<double>())) {
        error(key, "must be an array of finite numbers");
        return std::nullopt;
      }
      out.push_back(e.get<double>());
    }
    return out;
  }

  void finish() {
    if (!j_) return;
    for (auto it = j_->begin(); it != j_->end(); ++it)
      if (!used_.count(it.key())) errors_.push_back(where(it.key()) + ": unknown key");
  }

 private:
  const json* j_;
  std::string path_;
  std::vector<std::string>& errors_;
  std::set<std::string> used_;
};

}  // namespace detail

inline ExperimentConfig parse_config(const nlohmann::json& root) {
  using detail::Section;
  std::vector<std::string> errors;
  ExperimentConfig cfg;
  if (!root.is_object()) throw ConfigError({"config root must be a JSON object"});

  Section top(&root, "", errors);
  const auto kind_name = top.string("experiment");
  bool kind_ok = false;
  if (!kind_name) {
    errors.push_back("experiment: missing (one of parity-sweep, phase-pattern, cardinal-tomography, "
                     "dual-quadrature, local-dd, kernel-schedule, multi-ensemble-slip)");
  } else if (auto it = experiment_names().find(*kind_name); it == experiment_names().end()) {
    errors.push_back("experiment: unknown kind '" + *kind_name + "'");
  } else {
    cfg.kind = it->second;
    kind_ok = true;
  }

  if (const auto* s = top.raw("seed"); !s) {
    errors.push_back("seed: missing (no implicit entropy)");
  } else if (!s->is_number_unsigned()) {
    errors.push_back("seed: must be a non-negative integer");
  } else {
    cfg.seed = s->get<std::uint64_t>();
  }

  if (auto n = top.integer("shots_per_point"); !n) {
    if (!top.raw("shots_per_point")) errors.push_back("shots_per_point: missing");
  } else if (*n < 1 || *n > 100000000) {
    errors.push_back("shots_per_point: must lie in [1, 1e8]");
  } else {
    cfg.shots_per_point = static_cast<int>(*n);
  }
  if (auto o = top.string("output_dir")) {
    if (o->empty()) errors.push_back("output_dir: must not be empty");
    else cfg.output_dir = *o;
  }

  const SectionUsage use = kind_ok ? section_usage(cfg.kind) : SectionUsage{true, true, true, true, true, true};
  auto section = [&](const std::string& name, bool used) {
    const nlohmann::json* j = top.raw(name);
    if (kind_ok && used && !j) errors.push_back(name + ": missing section (required by " + to_string(cfg.kind) + ")");
    if (kind_ok && !used && j) errors.push_back(name + ": section is not used by " + to_string(cfg.kind));
    return Section(used ? j : nullptr, name, errors);
  };

  bool sites_given = false;
  // array
  {
    Section a = section("array", use.array);
    if (a.present()) {
      const bool layout_kind = cfg.kind == ExperimentKind::dual_quadrature || cfg.kind == ExperimentKind::local_dd ||
                               cfg.kind == ExperimentKind::kernel_schedule;
      if (layout_kind) {
        auto m = a.integer("ensembles");
        auto n = a.integer("atoms_per_quadrature");
        const int m_default = cfg.kind == ExperimentKind::dual_quadrature ? 1
                              : cfg.kind == ExperimentKind::local_dd     ? 3
                                                                         : 3;
        cfg.ensembles = static_cast<int>(m.value_or(m_default));
        if (!n) {
          if (!a.raw("atoms_per_quadrature")) errors.push_back("array.atoms_per_quadrature: missing");
        } else {
          cfg.atoms_per_quadrature = static_cast<int>(*n);
        }
        if (cfg.atoms_per_quadrature < 1 || cfg.atoms_per_quadrature > 10000)
          errors.push_back("array.atoms_per_quadrature: must lie in [1, 10000]");
        if (cfg.kind == ExperimentKind::dual_quadrature && cfg.ensembles != 1)
          errors.push_back("array.ensembles: dual-quadrature uses exactly 1 ensemble");
        if (cfg.kind == ExperimentKind::local_dd && cfg.ensembles != 3)
          errors.push_back("array.ensembles: local-dd uses exactly 3 ensembles");
        if (cfg.kind == ExperimentKind::kernel_schedule && (cfg.ensembles < 2 || cfg.ensembles > 12))
          errors.push_back("array.ensembles: kernel-schedule needs 2..12 ensembles");
      } else {
        auto n = a.integer("sites");
        sites_given = n.has_value();
        if (!n) {
          if (!a.raw("sites") && cfg.kind != ExperimentKind::phase_pattern) errors.push_back("array.sites: missing");
        } else if (*n < 2 || *n > 100000) {
          errors.push_back("array.sites: must lie in [2, 100000]");
        } else {
          cfg.sites = static_cast<int>(*n);
        }
      }
      a.finish();
    }
  }

  // drive
  {
    Section d = section("drive", use.drive);
    if (d.present()) {
      const double lambda = d.number("wavelength_nm", 698.4);
      const double rabi = d.number("rabi_frequency_hz", 2.5e3);
      if (!(lambda > 0.0)) errors.push_back("drive.wavelength_nm: must be > 0");
      if (!(rabi > 0.0)) errors.push_back("drive.rabi_frequency_hz: must be > 0");
      if (lambda > 0.0 && rabi > 0.0) cfg.compile.drive = DriveParams(lambda, rabi);
      cfg.sim.detuning_hz = d.number("detuning_hz", 0.0);
      cfg.compile.shift_time_us = d.number("shift_time_us", 32.0);
      cfg.compile.pad_us = d.number("pad_us", 34.0);
      if (cfg.compile.shift_time_us < cfg.compile.min_shift_time_us)
        errors.push_back("drive.shift_time_us: must be >= " + std::to_string(cfg.compile.min_shift_time_us));
      if (cfg.compile.pad_us < 0.0) errors.push_back("drive.pad_us: must be >= 0");
      if (auto fm = d.string("flip_mode")) {
        if (*fm == "composite") cfg.compile.flip_mode = FlipMode::composite;
        else if (*fm == "ideal") cfg.compile.flip_mode = FlipMode::ideal;
        else errors.push_back("drive.flip_mode: must be 'composite' or 'ideal'");
      }
      cfg.sim.distance_scale = d.number("distance_scale", 1.0);
      if (!(cfg.sim.distance_scale > 0.0)) errors.push_back("drive.distance_scale: must be > 0");
      cfg.sim.drive = cfg.compile.drive;
      d.finish();
    }
  }

  // noise
  {
    Section n = section("noise", use.noise);
    if (n.present()) {
      if (auto k = n.string("kind")) {
        try {
          cfg.noise.kind = parse_noise_kind(*k);
        } catch (const std::exception& e) {
          errors.push_back(std::string("noise.kind: ") + e.what());
        }
      }
      cfg.noise.beta = n.number("beta", 0.0);
      cfg.noise.alpha = n.number("alpha", 0.5);
      cfg.noise.time_unit_us = n.number("time_unit_us", 1000.0);
      try {
        cfg.noise.validate();
      } catch (const std::exception& e) {
        errors.push_back(e.what());
      }
      if (cfg.noise.beta > 0.0) cfg.sim.noise = cfg.noise;
      n.finish();
    }
  }

  // spam
  {
    Section s = section("spam", use.spam);
    if (s.present()) {
      cfg.spam_enabled = s.boolean("enabled").value_or(false);
      SpamParams p;
      p.survival = s.number("survival", p.survival);
      p.detect = s.number("detect", p.detect);
      p.eject = s.number("eject", p.eject);
      p.readout_pulse_fidelity = s.number("readout_pulse_fidelity", p.readout_pulse_fidelity);
      const double infid = s.number("pulse_infidelity", 2e-3);
      try {
        p.validate();
      } catch (const std::exception& e) {
        errors.push_back(e.what());
      }
      if (!(infid >= 0.0 && infid <= 0.5)) errors.push_back("spam.pulse_infidelity: must lie in [0, 0.5]");
      cfg.spam_values = p;
      if (cfg.spam_enabled) {
        cfg.sim.spam = p;
        cfg.sim.pulse_infidelity = infid;
      }
      s.finish();
    }
  }

  // grid
  {
    Section g = section("grid", use.grid);
    if (g.present()) {
      auto values = g.numbers("values");
      auto start = g.number("start");
      auto stop = g.number("stop");
      auto points = g.integer("points");
      const auto spacing = g.string("spacing").value_or("linear");
      const bool log_spacing = spacing == "log";
      if (spacing != "linear" && spacing != "log") errors.push_back("grid.spacing: must be 'linear' or 'log'");
      if (log_spacing && start && stop && !(*start > 0.0 && *stop > 0.0))
        errors.push_back("grid: log spacing needs start and stop > 0");
      if (values && (start || stop || points)) {
        errors.push_back("grid: give either values or start/stop/points, not both");
      } else if (values) {
        cfg.grid.values = *values;
      } else if (start && stop && points) {
        if (*points < 1 || *points > 1000000) {
          errors.push_back("grid.points: must lie in [1, 1e6]");
        } else {
          for (std::int64_t i = 0; i < *points; ++i) {
            const double f = *points == 1 ? 0.0 : static_cast<double>(i) / static_cast<double>(*points - 1);
            cfg.grid.values.push_back(log_spacing ? *start * std::pow(*stop / *start, f) : *start + (*stop - *start) * f);
          }
        }
      } else if (!g.raw("values")) {
        errors.push_back("grid: needs values or all of start, stop, points");
      }
      if (kind_ok && cfg.kind != ExperimentKind::parity_sweep)
        for (double v : cfg.grid.values)
          if (!(v >= 0.0)) {
            errors.push_back("grid: values must be >= 0 for " + to_string(cfg.kind));
            break;
          }
      g.finish();
    }
  }

  // protocol
  {
    Section p = section("protocol", use.protocol);
    if (p.present()) {
      auto& o = cfg.protocol;
      switch (cfg.kind) {
        case ExperimentKind::phase_pattern: {
          const auto* raw = p.raw("pattern");
          if (raw && raw->is_string()) {
            o.pattern = raw->get<std::string>();
            if (o.pattern != "antiphase" && o.pattern != "staircase")
              errors.push_back("protocol.pattern: must be 'antiphase', 'staircase' or a list of phases");
          } else if (raw && raw->is_array()) {
            o.pattern = "explicit";
            for (const auto& e : *raw) {
              if (!e.is_number()) {
                errors.push_back("protocol.pattern: list entries must be numbers");
                break;
              }
              o.pattern_values.push_back(e.get<double>());
            }
          } else if (raw) {
            errors.push_back("protocol.pattern: must be a string or a list of phases");
          }
          break;
        }
        case ExperimentKind::kernel_schedule: {
          if (auto k = p.integer("kernels")) o.kernels = static_cast<int>(*k);
          if (o.kernels < 1 || o.kernels > 64) errors.push_back("protocol.kernels: must lie in [1, 64]");
          break;
        }
        case ExperimentKind::dual_quadrature: {
          if (auto s = p.number("sigma_qpn")) {
            if (*s < 0.0) errors.push_back("protocol.sigma_qpn: must be >= 0");
            o.sigma_qpn = *s;
          }
          if (auto e = p.numbers("epsilons")) {
            o.epsilons = *e;
            for (double x : o.epsilons)
              if (!(x > 0.0 && x < 1.0)) {
                errors.push_back("protocol.epsilons: values must lie in (0, 1)");
                break;
              }
          }
          if (auto b = p.integer("histogram_bins")) o.histogram_bins = static_cast<int>(*b);
          if (o.histogram_bins < 2 || o.histogram_bins > 1000)
            errors.push_back("protocol.histogram_bins: must lie in [2, 1000]");
          break;
        }
        case ExperimentKind::multi_ensemble_slip: {
          if (const auto* e = p.raw("ensembles")) {
            o.ensembles.clear();
            if (!e->is_array() || e->empty()) {
              errors.push_back("protocol.ensembles: must be a non-empty list of integers");
            } else {
              for (const auto& x : *e) {
                if (!x.is_number_integer() || x.get<int>() < 1 || x.get<int>() > 16) {
                  errors.push_back("protocol.ensembles: entries must be integers in [1, 16]");
                  break;
                }
                o.ensembles.push_back(x.get<int>());
              }
            }
          }
          if (auto s = p.number("stage_sigma")) {
            if (*s < 0.0) errors.push_back("protocol.stage_sigma: must be >= 0");
            o.stage_sigma = *s;
          }
          if (auto n = p.integer("atoms_per_quadrature")) o.slip_atoms_per_quadrature = static_cast<int>(*n);
          if (o.slip_atoms_per_quadrature < 1 || o.slip_atoms_per_quadrature > 10000)
            errors.push_back("protocol.atoms_per_quadrature: must lie in [1, 10000]");
          break;
        }
        default:
          break;
      }
      p.finish();
    }
  }

  if (kind_ok && cfg.kind == ExperimentKind::phase_pattern) {
    if (cfg.protocol.pattern == "explicit") {
      if (cfg.sites != 0 && cfg.sites != static_cast<int>(cfg.protocol.pattern_values.size()))
        errors.push_back("array.sites: does not match the length of protocol.pattern");
      cfg.sites = static_cast<int>(cfg.protocol.pattern_values.size());
      if (cfg.sites < 1) errors.push_back("protocol.pattern: empty list");
    } else if (!sites_given) {
      errors.push_back("array.sites: missing");
    }
    if (cfg.sim.detuning_hz == 0.0) errors.push_back("drive.detuning_hz: phase-pattern needs a nonzero detuning to draw fringes");
  }
  if (kind_ok && cfg.kind == ExperimentKind::cardinal_tomography) cfg.sites = 6;
  if (kind_ok && (cfg.kind == ExperimentKind::local_dd || cfg.kind == ExperimentKind::kernel_schedule) &&
      cfg.sim.detuning_hz == 0.0)
    errors.push_back("drive.detuning_hz: " + to_string(cfg.kind) + " needs a nonzero detuning to measure fringe rates");
  if (kind_ok && use.grid && cfg.grid.values.empty() && top.raw("grid")) errors.push_back("grid: no points");

  top.finish();
  if (!errors.empty()) throw ConfigError(errors);
  return cfg;
}

inline ExperimentConfig parse_config_text(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError({std::string("not valid JSON: ") + e.what()});
  }
  return parse_config(j);
}

inline ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError({"cannot read config file '" + path + "'"});
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config_text(ss.str());
}

}  // namespace tzclock::harness
